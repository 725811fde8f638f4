//! Drone-imagery modality simulation and detection evaluation.
//!
//! - [`corpus`]: YOLO label/prediction files, manifests and dataset checks.
//! - [`spectral`]: grayscale, pseudo-thermal, night-vision and obscura transforms.
//! - [`eval`]: IoU matching, AP/mAP, macro P/R/F1 and confusion matrices.
//! - [`report`]: timing aggregation, comparison tables and annotated renders.

pub mod corpus;
pub mod eval;
pub mod report;
pub mod spectral;
