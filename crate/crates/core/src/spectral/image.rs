use std::path::Path;

use image::{GrayImage as ImgGray, RgbImage};

use super::SpectralError;

/// Row-major 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

/// Row-major 8-bit single-channel image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    intensities: Vec<u8>,
}

fn check_shape(width: u32, height: u32, len: usize) -> Result<(), SpectralError> {
    if width == 0 || height == 0 {
        return Err(SpectralError::InvalidImage(format!(
            "{width}x{height} has a zero dimension"
        )));
    }
    if (width as usize) * (height as usize) != len {
        return Err(SpectralError::InvalidImage(format!(
            "{width}x{height} needs {} pixels, got {len}",
            width as usize * height as usize
        )));
    }
    Ok(())
}

impl ImageBuffer {
    pub fn new(width: u32, height: u32, pixels: Vec<[u8; 3]>) -> Result<Self, SpectralError> {
        check_shape(width, height, pixels.len())?;
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Result<Self, SpectralError> {
        Self::new(width, height, vec![rgb; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [[u8; 3]] {
        &mut self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn put(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        self.pixels[y as usize * self.width as usize + x as usize] = rgb;
    }

    /// Applies `f` to every channel value independently.
    pub fn map_channels(&self, f: impl Fn(u8) -> u8) -> ImageBuffer {
        let mut lut = [0u8; 256];
        for (i, slot) in lut.iter_mut().enumerate() {
            *slot = f(i as u8);
        }
        ImageBuffer {
            width: self.width,
            height: self.height,
            pixels: self
                .pixels
                .iter()
                .map(|p| [lut[p[0] as usize], lut[p[1] as usize], lut[p[2] as usize]])
                .collect(),
        }
    }

    pub fn from_rgb_image(img: &RgbImage) -> Result<Self, SpectralError> {
        let pixels = img.pixels().map(|p| p.0).collect();
        Self::new(img.width(), img.height(), pixels)
    }

    pub fn to_rgb_image(&self) -> RgbImage {
        let raw: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        RgbImage::from_raw(self.width, self.height, raw).expect("shape checked at construction")
    }

    /// Reads PNG or JPEG, converting to 8-bit RGB.
    pub fn open(path: &Path) -> Result<Self, SpectralError> {
        let img = image::open(path).map_err(|e| SpectralError::Decode {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_rgb_image(&img.to_rgb8())
    }

    pub fn save_png(&self, path: &Path) -> Result<(), SpectralError> {
        self.to_rgb_image()
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(|e| SpectralError::io(path, e))
    }
}

impl GrayImage {
    pub fn new(width: u32, height: u32, intensities: Vec<u8>) -> Result<Self, SpectralError> {
        check_shape(width, height, intensities.len())?;
        Ok(Self {
            width,
            height,
            intensities,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn intensities(&self) -> &[u8] {
        &self.intensities
    }

    pub fn map(&self, f: impl Fn(u8) -> u8) -> GrayImage {
        let mut lut = [0u8; 256];
        for (i, slot) in lut.iter_mut().enumerate() {
            *slot = f(i as u8);
        }
        GrayImage {
            width: self.width,
            height: self.height,
            intensities: self.intensities.iter().map(|&v| lut[v as usize]).collect(),
        }
    }

    /// Replicates the intensity into all three channels.
    pub fn to_rgb(&self) -> ImageBuffer {
        ImageBuffer {
            width: self.width,
            height: self.height,
            pixels: self.intensities.iter().map(|&v| [v, v, v]).collect(),
        }
    }

    pub fn save_png(&self, path: &Path) -> Result<(), SpectralError> {
        ImgGray::from_raw(self.width, self.height, self.intensities.clone())
            .expect("shape checked at construction")
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(|e| SpectralError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_is_enforced() {
        assert!(ImageBuffer::new(0, 1, vec![]).is_err());
        assert!(ImageBuffer::new(2, 2, vec![[0; 3]; 3]).is_err());
        assert!(GrayImage::new(3, 1, vec![1, 2, 3]).is_ok());
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.png");
        let img = ImageBuffer::new(2, 1, vec![[1, 2, 3], [250, 128, 0]]).unwrap();
        img.save_png(&path).unwrap();
        assert_eq!(ImageBuffer::open(&path).unwrap(), img);
    }
}
