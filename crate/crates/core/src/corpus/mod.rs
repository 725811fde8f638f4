//! YOLO-format datasets: class tables, manifests, label/prediction files.

mod manifest;
mod record;
pub mod synthetic;
mod validate;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use manifest::{DatasetManifest, ImageEntry, ManifestDoc, SplitDirs, SplitSpec, SPLIT_NAMES};
pub use record::{
    format_annotations, format_predictions, parse_annotation_line, parse_annotation_text, parse_prediction_line,
    parse_prediction_text, read_annotations, read_predictions, write_annotations, write_predictions, GtRecord, NormBox,
    ParseOptions, PredRecord, EDGE_TOLERANCE,
};
pub use validate::{load_split, validate_dataset, SplitItem, ValidationReport, Violation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorpusError {
    #[error("WrongTokenCount: line {line}: expected {expected} tokens, found {found}")]
    WrongTokenCount { line: usize, expected: usize, found: usize },
    #[error("NonNumericToken: line {line}: `{token}`")]
    NonNumericToken { line: usize, token: String },
    #[error("ClassIdOutOfRange: line {line}: `{token}`")]
    ClassIdOutOfRange { line: usize, token: String },
    #[error("CoordinateOutOfRange: line {line}: `{token}`")]
    CoordinateOutOfRange { line: usize, token: String },
    #[error("ConfidenceOutOfRange: line {line}: `{token}`")]
    ConfidenceOutOfRange { line: usize, token: String },
    #[error("ManifestUnreadable: {0}")]
    ManifestUnreadable(String),
    #[error("SplitMissing: split `{0}` is not declared in the manifest")]
    SplitMissing(String),
    #[error("LabelMissing: no label file for image `{image_id}` (expected {path})")]
    LabelMissing { image_id: String, path: PathBuf },
    #[error("InvalidClassTable: {0}")]
    InvalidClassTable(String),
    #[error("IoFailure: {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<CorpusError>,
    },
}

impl CorpusError {
    pub(crate) fn io(path: &Path, err: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }

    pub(crate) fn in_file(self, path: &Path) -> Self {
        CorpusError::InFile {
            path: path.to_path_buf(),
            source: Box::new(self),
        }
    }

    /// The innermost error, with file context stripped.
    pub fn root(&self) -> &CorpusError {
        match self {
            CorpusError::InFile { source, .. } => source.root(),
            other => other,
        }
    }

    /// 1-based line number for line-level errors.
    pub fn line(&self) -> Option<usize> {
        match self.root() {
            CorpusError::WrongTokenCount { line, .. }
            | CorpusError::NonNumericToken { line, .. }
            | CorpusError::ClassIdOutOfRange { line, .. }
            | CorpusError::CoordinateOutOfRange { line, .. }
            | CorpusError::ConfidenceOutOfRange { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// Ordered class names. Class ids index into this table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct ClassTable {
    names: Vec<String>,
}

impl ClassTable {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, CorpusError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(CorpusError::InvalidClassTable("class list is empty".into()));
        }
        for (i, name) in names.iter().enumerate() {
            if name.trim().is_empty() {
                return Err(CorpusError::InvalidClassTable(format!("class {i} has an empty name")));
            }
            if names[..i].contains(name) {
                return Err(CorpusError::InvalidClassTable(format!("duplicate class name `{name}`")));
            }
        }
        Ok(Self { names })
    }

    /// The seven KIIT-MiTA classes in dataset order.
    pub fn kiit_mita() -> Self {
        Self::new([
            "Artillery",
            "Missile",
            "Radar",
            "Multiple Rocket Launcher",
            "Soldier",
            "Tank",
            "Vehicle",
        ])
        .expect("static table is valid")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, class_id: usize) -> Option<&str> {
        self.names.get(class_id).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn parse_options(&self) -> ParseOptions {
        ParseOptions::new(self.len())
    }
}

impl TryFrom<Vec<String>> for ClassTable {
    type Error = CorpusError;

    fn try_from(names: Vec<String>) -> Result<Self, Self::Error> {
        ClassTable::new(names)
    }
}

impl From<ClassTable> for Vec<String> {
    fn from(t: ClassTable) -> Self {
        t.names
    }
}
