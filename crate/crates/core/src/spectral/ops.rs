//! Per-pixel photometric operations. Every function preserves image
//! dimensions, and all rounding is half away from zero (`f64::round`).

use serde::{Deserialize, Serialize};

use super::{ColorMapLUT, GrayImage, ImageBuffer, SpectralError};

/// BT.601 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

pub fn luma([r, g, b]: [u8; 3]) -> f64 {
    LUMA_WEIGHTS[0] * r as f64 + LUMA_WEIGHTS[1] * g as f64 + LUMA_WEIGHTS[2] * b as f64
}

#[inline]
pub(crate) fn saturate(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

pub fn to_grayscale(img: &ImageBuffer) -> GrayImage {
    let values = img.pixels().iter().map(|&p| saturate(luma(p))).collect();
    GrayImage::new(img.width(), img.height(), values).expect("same shape")
}

/// Stretches intensities to span 0..=255. A constant image maps to zeros.
pub fn normalize_contrast(gray: &GrayImage) -> GrayImage {
    let values = gray.intensities();
    let lo = *values.iter().min().expect("non-empty");
    let hi = *values.iter().max().expect("non-empty");
    if lo == hi {
        return gray.map(|_| 0);
    }
    let span = (hi - lo) as f64;
    gray.map(|x| saturate((x.saturating_sub(lo)) as f64 * 255.0 / span))
}

pub fn apply_colormap(gray: &GrayImage, lut: &ColorMapLUT) -> ImageBuffer {
    let pixels = gray.intensities().iter().map(|&v| lut.get(v)).collect();
    ImageBuffer::new(gray.width(), gray.height(), pixels).expect("same shape")
}

/// Grayscale, full-range stretch, then the inferno colormap.
pub fn thermal_transform(img: &ImageBuffer, lut: &ColorMapLUT) -> ImageBuffer {
    apply_colormap(&normalize_contrast(&to_grayscale(img)), lut)
}

/// `clamp(round(gain * x + bias))`, the `convertScaleAbs` mapping.
pub fn linear_scale_abs(gray: &GrayImage, gain: f64, bias: f64) -> GrayImage {
    gray.map(|x| saturate((gain * x as f64 + bias).abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NightVisionParams {
    pub gain: f64,
    pub bias: f64,
    /// Red, green, blue multipliers on the enhanced intensity.
    pub channel_weights: [f64; 3],
}

impl Default for NightVisionParams {
    fn default() -> Self {
        Self {
            gain: 1.2,
            bias: 30.0,
            channel_weights: [0.1, 1.0, 0.1],
        }
    }
}

impl NightVisionParams {
    pub fn validate(&self) -> Result<(), SpectralError> {
        let [wr, wg, wb] = self.channel_weights;
        let bad = |m: &str| Err(SpectralError::InvalidParams(format!("night: {m}")));
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return bad("gain must be > 0");
        }
        if !(0.0..=255.0).contains(&self.bias) {
            return bad("bias must be in [0, 255]");
        }
        if !(wr >= 0.0 && wb >= 0.0 && wr <= wg && wb <= wg && wg <= 1.5) {
            return bad("channel weights need 0 <= red, blue <= green <= 1.5");
        }
        Ok(())
    }
}

/// Enhanced grayscale spread into a green-dominant tint.
pub fn night_vision_transform(img: &ImageBuffer, params: &NightVisionParams) -> Result<ImageBuffer, SpectralError> {
    params.validate()?;
    let enhanced = linear_scale_abs(&to_grayscale(img), params.gain, params.bias);
    let [wr, wg, wb] = params.channel_weights;
    let mut table = [[0u8; 3]; 256];
    for (g, slot) in table.iter_mut().enumerate() {
        let g = g as f64;
        *slot = [saturate(wr * g), saturate(wg * g), saturate(wb * g)];
    }
    let pixels = enhanced.intensities().iter().map(|&g| table[g as usize]).collect();
    ImageBuffer::new(img.width(), img.height(), pixels)
}

/// Offsets `(dx, dy)` of a one-pixel-wide line of `kernel_len` cells through
/// the origin. The line is stepped along its dominant axis so every cell is
/// distinct; the set is point-symmetric.
pub fn line_kernel(kernel_len: u32, angle_deg: f64) -> Vec<(i32, i32)> {
    let r = (kernel_len / 2) as i32;
    let theta = angle_deg.to_radians();
    let (s, c) = theta.sin_cos();
    (-r..=r)
        .map(|t| {
            if c.abs() >= s.abs() {
                // image y grows downward
                (t, (-(t as f64) * s / c).round() as i32)
            } else {
                ((-(t as f64) * c / s).round() as i32, -t)
            }
        })
        .collect()
}

/// Line-kernel blur with edge replication. `kernel_len` must be odd.
pub fn motion_blur(img: &ImageBuffer, kernel_len: u32, angle_deg: f64) -> Result<ImageBuffer, SpectralError> {
    if kernel_len == 0 || kernel_len.is_multiple_of(2) {
        return Err(SpectralError::InvalidParams(format!(
            "motion blur kernel length must be odd, got {kernel_len}"
        )));
    }
    if kernel_len == 1 {
        return Ok(img.clone());
    }
    let offsets = line_kernel(kernel_len, angle_deg);
    let k = offsets.len() as u32;
    let (w, h) = (img.width() as i64, img.height() as i64);
    let src = img.pixels();
    let mut out = Vec::with_capacity(src.len());
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0u32; 3];
            for &(dx, dy) in &offsets {
                let sx = (x + dx as i64).clamp(0, w - 1);
                let sy = (y + dy as i64).clamp(0, h - 1);
                let p = src[(sy * w + sx) as usize];
                acc[0] += p[0] as u32;
                acc[1] += p[1] as u32;
                acc[2] += p[2] as u32;
            }
            // integer round-half-up of acc / k
            out.push(acc.map(|s| ((2 * s + k) / (2 * k)) as u8));
        }
    }
    ImageBuffer::new(img.width(), img.height(), out)
}

/// Blend toward white: `round(x + f * (255 - x))`.
pub fn apply_fog(img: &ImageBuffer, fog_coeff: f64) -> Result<ImageBuffer, SpectralError> {
    if !(0.0..=1.0).contains(&fog_coeff) {
        return Err(SpectralError::InvalidParams(format!(
            "fog coefficient must be in [0, 1], got {fog_coeff}"
        )));
    }
    Ok(img.map_channels(|x| saturate(x as f64 + fog_coeff * (255.0 - x as f64))))
}

/// Contrast about mid-gray 128, then a brightness shift given as a fraction of 255.
pub fn adjust_contrast_brightness(
    img: &ImageBuffer,
    contrast_factor: f64,
    brightness_shift: f64,
) -> Result<ImageBuffer, SpectralError> {
    if !(contrast_factor > 0.0 && contrast_factor.is_finite()) || !brightness_shift.is_finite() {
        return Err(SpectralError::InvalidParams(format!(
            "contrast factor must be > 0 (got {contrast_factor}), shift finite (got {brightness_shift})"
        )));
    }
    let shift = 255.0 * brightness_shift;
    Ok(img.map_channels(|x| saturate(contrast_factor * (x as f64 - 128.0) + 128.0 + shift)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn px(p: [u8; 3]) -> ImageBuffer {
        ImageBuffer::new(1, 1, vec![p]).unwrap()
    }

    fn gray(values: &[u8]) -> GrayImage {
        GrayImage::new(values.len() as u32, 1, values.to_vec()).unwrap()
    }

    #[test]
    fn grayscale_examples() {
        assert_eq!(to_grayscale(&px([255, 255, 255])).intensities(), &[255]);
        assert_eq!(to_grayscale(&px([255, 0, 0])).intensities(), &[76]);
        for x in 0..=255u8 {
            assert_eq!(to_grayscale(&px([x, x, x])).intensities(), &[x]);
        }
    }

    #[test]
    fn normalize_examples() {
        let full = gray(&[0, 30, 255]);
        assert_eq!(normalize_contrast(&full), full);
        assert_eq!(normalize_contrast(&gray(&[9, 9, 9])).intensities(), &[0, 0, 0]);
        assert_eq!(normalize_contrast(&gray(&[50, 150])).intensities(), &[0, 255]);
        // (100 - 50) * 255 / 100 = 127.5
        assert_eq!(normalize_contrast(&gray(&[50, 100, 150])).intensities(), &[0, 128, 255]);
    }

    #[test]
    fn colormap_indexing() {
        let lut = ColorMapLUT::inferno();
        let out = apply_colormap(&gray(&[0, 255]), &lut);
        assert_eq!(out.pixels(), &[lut.get(0), lut.get(255)]);
        let g = gray(&[3, 77, 200]);
        assert_eq!(apply_colormap(&g, &ColorMapLUT::identity()), g.to_rgb());
    }

    #[test]
    fn thermal_endpoints() {
        let lut = ColorMapLUT::inferno();
        let black = ImageBuffer::filled(3, 2, [0, 0, 0]).unwrap();
        assert!(thermal_transform(&black, &lut)
            .pixels()
            .iter()
            .all(|&p| p == lut.get(0)));

        let ramp = ImageBuffer::new(3, 1, vec![[10, 10, 10], [90, 90, 90], [240, 240, 240]]).unwrap();
        let out = thermal_transform(&ramp, &lut);
        assert_eq!(out.get(0, 0), lut.get(0));
        assert_eq!(out.get(2, 0), lut.get(255));
    }

    #[test]
    fn linear_scale_examples() {
        let g = gray(&[0, 100, 200, 255]);
        assert_eq!(linear_scale_abs(&g, 1.0, 0.0), g);
        assert_eq!(linear_scale_abs(&g, 1.2, 30.0).intensities(), &[30, 150, 255, 255]);
    }

    #[test]
    fn night_vision_examples() {
        let defaults = NightVisionParams::default();
        let black = ImageBuffer::filled(2, 2, [0, 0, 0]).unwrap();
        // bias lifts black to 30, so black stays black only without bias
        let no_bias = NightVisionParams { bias: 0.0, ..defaults };
        assert_eq!(night_vision_transform(&black, &no_bias).unwrap(), black);

        // g = round(1.2 * 100 + 30) = 150
        let out = night_vision_transform(&px([100, 100, 100]), &defaults).unwrap();
        assert_eq!(out.pixels(), &[[15, 150, 15]]);

        let bad = NightVisionParams {
            channel_weights: [1.0, 0.5, 0.1],
            ..defaults
        };
        assert!(night_vision_transform(&black, &bad).is_err());
        assert!(NightVisionParams { gain: 0.0, ..defaults }.validate().is_err());
        assert!(NightVisionParams {
            bias: 300.0,
            ..defaults
        }
        .validate()
        .is_err());
    }

    #[test]
    fn kernel_shapes() {
        assert_eq!(line_kernel(3, 0.0), vec![(-1, 0), (0, 0), (1, 0)]);
        assert_eq!(line_kernel(3, 90.0), vec![(0, 1), (0, 0), (0, -1)]);
        assert_eq!(line_kernel(3, 45.0), vec![(-1, 1), (0, 0), (1, -1)]);
        for angle in [0.0, 17.0, 45.0, 63.0, 90.0, 135.0, 179.9] {
            let k = line_kernel(7, angle);
            assert_eq!(k.len(), 7);
            for &(dx, dy) in &k {
                assert!(k.contains(&(-dx, -dy)), "asymmetric at {angle}");
            }
        }
    }

    #[test]
    fn motion_blur_examples() {
        let row = ImageBuffer::new(5, 1, [0, 0, 255, 0, 0].map(|v| [v, v, v]).to_vec()).unwrap();
        let out = motion_blur(&row, 3, 0.0).unwrap();
        let got: Vec<u8> = out.pixels().iter().map(|p| p[0]).collect();
        assert_eq!(got, vec![0, 85, 85, 85, 0]);

        assert_eq!(motion_blur(&row, 1, 33.0).unwrap(), row);
        let flat = ImageBuffer::filled(6, 4, [12, 200, 77]).unwrap();
        assert_eq!(motion_blur(&flat, 5, 30.0).unwrap(), flat);
        assert!(motion_blur(&row, 4, 0.0).is_err());
    }

    #[test]
    fn fog_examples() {
        let img = ImageBuffer::new(2, 1, vec![[100, 0, 255], [7, 8, 9]]).unwrap();
        assert_eq!(apply_fog(&img, 0.0).unwrap(), img);
        assert!(apply_fog(&img, 1.0).unwrap().pixels().iter().all(|&p| p == [255; 3]));
        assert_eq!(
            apply_fog(&px([100, 100, 100]), 0.1).unwrap().pixels(),
            &[[116, 116, 116]]
        );
        assert!(apply_fog(&img, 1.1).is_err());
    }

    #[test]
    fn contrast_examples() {
        let img = ImageBuffer::new(2, 1, vec![[0, 128, 255], [3, 99, 200]]).unwrap();
        assert_eq!(adjust_contrast_brightness(&img, 1.0, 0.0).unwrap(), img);
        assert_eq!(
            adjust_contrast_brightness(&px([128; 3]), 0.9, 0.0).unwrap().pixels(),
            &[[128; 3]]
        );
        assert_eq!(
            adjust_contrast_brightness(&px([200; 3]), 1.1, 0.1).unwrap().pixels(),
            &[[233; 3]]
        );
        assert!(adjust_contrast_brightness(&img, 0.0, 0.0).is_err());
    }
}
