//! Seeded blur/fog/contrast degradation and its weighted severity score.
//!
//! The severity score is `O_s = alpha * M_b + beta * F_g + gamma * C_b`,
//! with the three components normalized as configured in
//! [`SeverityNormalization`]. With the defaults (blur limit 3, fog 0.1,
//! contrast/brightness limit 0.1, unit weights) the score is 0.25.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ops::{adjust_contrast_brightness, apply_fog, motion_blur};
use super::{ImageBuffer, SpectralError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeverityScore(pub f64);

impl SeverityScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Weighted sum of the three degradation magnitudes.
pub fn severity_score(
    m_b: f64,
    f_g: f64,
    c_b: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> Result<SeverityScore, SpectralError> {
    let inputs = [m_b, f_g, c_b, alpha, beta, gamma];
    if let Some(bad) = inputs.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(SpectralError::NegativeInput(*bad));
    }
    Ok(SeverityScore(alpha * m_b + beta * f_g + gamma * c_b))
}

/// Which fog value feeds the `F_g` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FogMeasure {
    /// The configured fog coefficient limit.
    Configured,
    /// The coefficient actually drawn for this image.
    Realized,
}

/// Maps realized magnitudes onto the severity components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeverityNormalization {
    /// `M_b = (kernel_len - 1) / blur_divisor`.
    pub blur_divisor: f64,
    pub fog: FogMeasure,
}

impl Default for SeverityNormalization {
    fn default() -> Self {
        Self {
            blur_divisor: 40.0,
            fog: FogMeasure::Configured,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObscuraParams {
    /// Largest odd kernel length drawn for motion blur.
    pub blur_limit: u32,
    pub fog_coeff: f64,
    /// Contrast factor spans `1 ± cb_limit`, brightness shift `± cb_limit`.
    pub cb_limit: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub normalization: SeverityNormalization,
}

impl Default for ObscuraParams {
    fn default() -> Self {
        Self {
            blur_limit: 3,
            fog_coeff: 0.1,
            cb_limit: 0.1,
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            normalization: SeverityNormalization::default(),
        }
    }
}

impl ObscuraParams {
    pub fn validate(&self) -> Result<(), SpectralError> {
        let bad = |m: String| Err(SpectralError::InvalidParams(format!("obscura: {m}")));
        if self.blur_limit < 3 || self.blur_limit.is_multiple_of(2) {
            return bad(format!("blur_limit must be odd and >= 3, got {}", self.blur_limit));
        }
        for (name, v) in [("fog_coeff", self.fog_coeff), ("cb_limit", self.cb_limit)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must be in [0, 1], got {v}"));
            }
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be a nonnegative number, got {v}"));
            }
        }
        if !(self.normalization.blur_divisor > 0.0 && self.normalization.blur_divisor.is_finite()) {
            return bad("blur_divisor must be > 0".into());
        }
        Ok(())
    }

    /// Score at the configured limits, i.e. with the largest blur kernel.
    pub fn nominal_severity(&self) -> Result<SeverityScore, SpectralError> {
        self.validate()?;
        self.score(self.blur_limit, self.fog_coeff)
    }

    fn score(&self, kernel_len: u32, realized_fog: f64) -> Result<SeverityScore, SpectralError> {
        let m_b = (kernel_len - 1) as f64 / self.normalization.blur_divisor;
        let f_g = match self.normalization.fog {
            FogMeasure::Configured => self.fog_coeff,
            FogMeasure::Realized => realized_fog,
        };
        severity_score(m_b, f_g, self.cb_limit, self.alpha, self.beta, self.gamma)
    }
}

/// Global seed from which per-image random streams are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TransformSeed(pub u64);

impl TransformSeed {
    /// Independent stream for one image; depends only on the seed and id.
    pub fn stream(&self, image_id: &str) -> ChaCha8Rng {
        let mut hasher = Sha256::new();
        hasher.update(b"visdet/image-stream/v1");
        hasher.update(self.0.to_le_bytes());
        hasher.update((image_id.len() as u64).to_le_bytes());
        hasher.update(image_id.as_bytes());
        ChaCha8Rng::from_seed(hasher.finalize().into())
    }
}

/// Magnitudes drawn for one image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObscuraSample {
    pub kernel_len: u32,
    pub angle_deg: f64,
    pub fog_coeff: f64,
    pub contrast_factor: f64,
    pub brightness_shift: f64,
}

pub fn sample_obscura(
    params: &ObscuraParams,
    seed: TransformSeed,
    image_id: &str,
) -> Result<ObscuraSample, SpectralError> {
    params.validate()?;
    let mut rng = seed.stream(image_id);
    let steps = (params.blur_limit - 3) / 2;
    let kernel_len = 3 + 2 * rng.gen_range(0..=steps);
    let angle_deg = rng.gen_range(0.0..180.0);
    let fog_coeff = rng.gen_range(0.5 * params.fog_coeff..=params.fog_coeff);
    let contrast_factor = rng.gen_range(1.0 - params.cb_limit..=1.0 + params.cb_limit);
    let brightness_shift = rng.gen_range(-params.cb_limit..=params.cb_limit);
    Ok(ObscuraSample {
        kernel_len,
        angle_deg,
        fog_coeff,
        contrast_factor,
        brightness_shift,
    })
}

/// Applies blur, then fog, then contrast/brightness with magnitudes drawn
/// from the image's stream. Identical inputs give bit-identical output.
pub fn obscura_transform(
    img: &ImageBuffer,
    params: &ObscuraParams,
    seed: TransformSeed,
    image_id: &str,
) -> Result<(ImageBuffer, SeverityScore, ObscuraSample), SpectralError> {
    let s = sample_obscura(params, seed, image_id)?;
    let out = motion_blur(img, s.kernel_len, s.angle_deg)?;
    let out = apply_fog(&out, s.fog_coeff)?;
    let out = adjust_contrast_brightness(&out, s.contrast_factor, s.brightness_shift)?;
    let score = params.score(s.kernel_len, s.fog_coeff)?;
    Ok((out, score, s))
}
