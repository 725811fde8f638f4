//! Photometric simulation of the four drone-imagery modalities: grayscale,
//! pseudo-thermal, night vision and seeded blur/fog/contrast degradation.
//!
//! All transforms are pure per-image functions and never move geometry, so
//! annotations stay valid unchanged.

mod batch;
mod image;
mod lut;
mod obscura;
mod ops;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::corpus::CorpusError;

pub use self::image::{GrayImage, ImageBuffer};
pub use batch::{
    transform_corpus, transform_image, Modality, SeverityNote, TransformParams, TransformReport, TransformRow,
    OUTPUT_MANIFEST, REPORT_FILE,
};
pub use lut::{format_lut_asset, parse_lut_asset, ColorMapLUT, LutAsset};
pub use obscura::{
    obscura_transform, sample_obscura, severity_score, FogMeasure, ObscuraParams, ObscuraSample, SeverityNormalization,
    SeverityScore, TransformSeed,
};
pub use ops::{
    adjust_contrast_brightness, apply_colormap, apply_fog, line_kernel, linear_scale_abs, luma, motion_blur,
    night_vision_transform, normalize_contrast, thermal_transform, to_grayscale, NightVisionParams, LUMA_WEIGHTS,
};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("InvalidImage: {0}")]
    InvalidImage(String),
    #[error("InvalidLut: {0}")]
    InvalidLut(String),
    #[error("InvalidParams: {0}")]
    InvalidParams(String),
    #[error("NegativeInput: severity inputs must be nonnegative, got {0}")]
    NegativeInput(f64),
    #[error("ImageDecode: {path}: {message}")]
    Decode { path: PathBuf, message: String },
    #[error("IoFailure: {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

impl SpectralError {
    pub(crate) fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        SpectralError::Io {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }
}
