use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::manifest::SplitSpec;
use super::record::{parse_annotation_text, read_annotations};
use super::{CorpusError, DatasetManifest, GtRecord, ParseOptions};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub file: PathBuf,
    pub line: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub image_count: usize,
    pub label_count: usize,
    /// Indexed by class id.
    pub per_class: Vec<usize>,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

struct FileScan {
    per_class: Vec<usize>,
    violations: Vec<Violation>,
}

fn scan_label_file(path: &Path, opts: &ParseOptions, image_id: &str) -> FileScan {
    let mut scan = FileScan {
        per_class: vec![0; opts.num_classes],
        violations: Vec::new(),
    };
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            scan.violations.push(Violation {
                file: path.to_path_buf(),
                line: None,
                reason: CorpusError::LabelMissing {
                    image_id: image_id.to_string(),
                    path: path.to_path_buf(),
                }
                .to_string(),
            });
            return scan;
        }
        Err(e) => {
            scan.violations.push(Violation {
                file: path.to_path_buf(),
                line: None,
                reason: CorpusError::io(path, e).to_string(),
            });
            return scan;
        }
    };
    for result in parse_annotation_text(&text, opts) {
        match result {
            Ok(rec) => scan.per_class[rec.class_id] += 1,
            Err(err) => scan.violations.push(Violation {
                file: path.to_path_buf(),
                line: err.line(),
                reason: err.to_string(),
            }),
        }
    }
    scan
}

fn orphan_labels(split: &SplitSpec) -> Vec<Violation> {
    let Ok(read) = fs::read_dir(&split.labels_dir) else {
        return Vec::new();
    };
    let ids: BTreeSet<&str> = split.images.iter().map(|e| e.image_id.as_str()).collect();
    let mut out: Vec<Violation> = read
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("txt"))
        .filter(|p| {
            p.file_stem()
                .and_then(|s| s.to_str())
                .map(|s| !ids.contains(s))
                .unwrap_or(true)
        })
        .map(|p| Violation {
            file: p,
            line: None,
            reason: "label file has no matching image".into(),
        })
        .collect();
    out.sort_by(|a, b| a.file.cmp(&b.file));
    out
}

/// Scans every split and every label line, collecting all violations.
pub fn validate_dataset(manifest: &DatasetManifest) -> ValidationReport {
    let opts = manifest.class_table.parse_options();
    let mut report = ValidationReport {
        image_count: 0,
        label_count: 0,
        per_class: vec![0; opts.num_classes],
        violations: Vec::new(),
    };
    for split in manifest.splits.values() {
        let scans: Vec<FileScan> = split
            .images
            .par_iter()
            .map(|entry| scan_label_file(&split.label_path(&entry.image_id), &opts, &entry.image_id))
            .collect();
        report.image_count += split.images.len();
        for scan in scans {
            for (total, n) in report.per_class.iter_mut().zip(&scan.per_class) {
                *total += n;
            }
            report.violations.extend(scan.violations);
        }
        report.violations.extend(orphan_labels(split));
    }
    report.label_count = report.per_class.iter().sum();
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitItem {
    pub image_id: String,
    pub image_path: PathBuf,
    pub records: Vec<GtRecord>,
}

/// Loads a split in lexicographic `image_id` order.
pub fn load_split(manifest: &DatasetManifest, split_name: &str) -> Result<Vec<SplitItem>, CorpusError> {
    let split = manifest.split(split_name)?;
    let opts = manifest.class_table.parse_options();
    split
        .images
        .par_iter()
        .map(|entry| {
            let label = split.label_path(&entry.image_id);
            if !label.is_file() {
                return Err(CorpusError::LabelMissing {
                    image_id: entry.image_id.clone(),
                    path: label,
                });
            }
            Ok(SplitItem {
                image_id: entry.image_id.clone(),
                image_path: entry.image_path.clone(),
                records: read_annotations(&label, &opts)?,
            })
        })
        .collect()
}
