//! Dataset manifest: a TOML document naming classes and split directories.
//!
//! ```toml
//! classes = ["Artillery", "Missile", "Radar"]
//!
//! [splits.train]
//! images = "train/images"
//! labels = "train/labels"
//! ```
//!
//! Relative paths resolve against the manifest's own directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ClassTable, CorpusError};

pub const SPLIT_NAMES: [&str; 3] = ["train", "val", "test"];

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];
const LABEL_EXTENSION: &str = "txt";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitDirs {
    pub images: PathBuf,
    pub labels: PathBuf,
}

/// The manifest as written on disk, before any directory is touched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestDoc {
    pub classes: ClassTable,
    pub splits: BTreeMap<String, SplitDirs>,
}

impl ManifestDoc {
    pub fn from_toml_str(text: &str) -> Result<Self, CorpusError> {
        let doc: ManifestDoc = toml::from_str(text).map_err(|e| CorpusError::ManifestUnreadable(e.to_string()))?;
        if let Some(bad) = doc.splits.keys().find(|k| !SPLIT_NAMES.contains(&k.as_str())) {
            return Err(CorpusError::ManifestUnreadable(format!(
                "unknown split `{bad}` (expected one of train, val, test)"
            )));
        }
        Ok(doc)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageEntry {
    pub image_id: String,
    pub image_path: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    pub images_dir: PathBuf,
    pub labels_dir: PathBuf,
    /// Sorted by `image_id`.
    pub images: Vec<ImageEntry>,
}

impl SplitSpec {
    pub fn label_path(&self, image_id: &str) -> PathBuf {
        self.labels_dir.join(format!("{image_id}.{LABEL_EXTENSION}"))
    }
}

/// A manifest with all directories resolved and image lists scanned.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub class_table: ClassTable,
    pub splits: BTreeMap<String, SplitSpec>,
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CorpusError::ManifestUnreadable(format!("{}: {e}", path.display())))?;
        let doc = ManifestDoc::from_toml_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::resolve(doc, base)
    }

    pub fn resolve(doc: ManifestDoc, base: &Path) -> Result<Self, CorpusError> {
        let mut splits = BTreeMap::new();
        for (name, dirs) in doc.splits {
            let images_dir = base.join(&dirs.images);
            let labels_dir = base.join(&dirs.labels);
            let images = scan_images(&images_dir)?;
            splits.insert(
                name,
                SplitSpec {
                    images_dir,
                    labels_dir,
                    images,
                },
            );
        }
        Ok(Self {
            class_table: doc.classes,
            splits,
        })
    }

    pub fn split(&self, name: &str) -> Result<&SplitSpec, CorpusError> {
        self.splits
            .get(name)
            .ok_or_else(|| CorpusError::SplitMissing(name.to_string()))
    }
}

pub(crate) fn is_image_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        .unwrap_or(false)
}

fn scan_images(dir: &Path) -> Result<Vec<ImageEntry>, CorpusError> {
    let read = fs::read_dir(dir)
        .map_err(|e| CorpusError::ManifestUnreadable(format!("image directory {}: {e}", dir.display())))?;
    let mut seen = BTreeSet::new();
    let mut images = Vec::new();
    for entry in read {
        let entry = entry.map_err(|e| CorpusError::io(dir, e))?;
        let path = entry.path();
        if !path.is_file() || !is_image_file(&path) {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        if !seen.insert(stem.to_string()) {
            return Err(CorpusError::ManifestUnreadable(format!(
                "image id `{stem}` appears twice in {}",
                dir.display()
            )));
        }
        images.push(ImageEntry {
            image_id: stem.to_string(),
            image_path: path,
        });
    }
    images.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    Ok(images)
}
