//! Procedural YOLO corpora for smoke tests and demos.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{write_annotations, ClassTable, CorpusError, GtRecord, ManifestDoc, NormBox, SplitDirs};
use crate::spectral::ImageBuffer;

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub images: usize,
    pub width: u32,
    pub height: u32,
    pub max_objects: usize,
    pub split: String,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            images: 20,
            width: 64,
            height: 48,
            max_objects: 4,
            split: "test".into(),
            seed: 7,
        }
    }
}

fn paint(width: u32, height: u32, records: &[GtRecord], rng: &mut impl Rng) -> ImageBuffer {
    let tint: [u8; 3] = [rng.gen(), rng.gen(), rng.gen()];
    let mut img = ImageBuffer::filled(width, height, [0, 0, 0]).expect("non-zero size");
    for y in 0..height {
        for x in 0..width {
            let g = ((x * 255) / width.max(1)) as u16;
            let v = ((y * 255) / height.max(1)) as u16;
            img.put(
                x,
                y,
                [
                    ((g + tint[0] as u16) / 2) as u8,
                    ((v + tint[1] as u16) / 2) as u8,
                    tint[2] / 2,
                ],
            );
        }
    }
    for r in records {
        let color: [u8; 3] = [rng.gen(), rng.gen(), rng.gen()];
        let (x0, y0, x1, y1) = r.bbox.corners();
        let px = |v: f64, n: u32| ((v * n as f64) as u32).min(n - 1);
        for y in px(y0, height)..=px(y1, height) {
            for x in px(x0, width)..=px(x1, width) {
                img.put(x, y, color);
            }
        }
    }
    img
}

/// Writes `<root>/manifest.toml`, `<root>/<split>/images/*.png` and
/// `<root>/<split>/labels/*.txt`, returning the manifest path.
pub fn write_synthetic_corpus(root: &Path, classes: &ClassTable, spec: &SyntheticSpec) -> Result<PathBuf, CorpusError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let images = root.join(&spec.split).join("images");
    let labels = root.join(&spec.split).join("labels");
    for dir in [&images, &labels] {
        fs::create_dir_all(dir).map_err(|e| CorpusError::io(dir, e))?;
    }
    for i in 0..spec.images {
        let id = format!("img_{i:04}");
        let records: Vec<GtRecord> = (0..rng.gen_range(1..=spec.max_objects.max(1)))
            .map(|_| {
                let w = (rng.gen_range(0.1..0.4f64) * 1e6).round() / 1e6;
                let h = (rng.gen_range(0.1..0.4f64) * 1e6).round() / 1e6;
                let cx = (rng.gen_range(w / 2.0 + 1e-6..1.0 - w / 2.0 - 1e-6) * 1e6).round() / 1e6;
                let cy = (rng.gen_range(h / 2.0 + 1e-6..1.0 - h / 2.0 - 1e-6) * 1e6).round() / 1e6;
                GtRecord {
                    class_id: rng.gen_range(0..classes.len()),
                    bbox: NormBox { cx, cy, w, h },
                }
            })
            .collect();
        let img = paint(spec.width, spec.height, &records, &mut rng);
        let img_path = images.join(format!("{id}.png"));
        img.save_png(&img_path).map_err(|e| CorpusError::Io {
            path: img_path.clone(),
            message: e.to_string(),
        })?;
        write_annotations(&records, &labels.join(format!("{id}.txt")))?;
    }
    let doc = ManifestDoc {
        classes: classes.clone(),
        splits: [(
            spec.split.clone(),
            SplitDirs {
                images: PathBuf::from(&spec.split).join("images"),
                labels: PathBuf::from(&spec.split).join("labels"),
            },
        )]
        .into_iter()
        .collect(),
    };
    let manifest = root.join("manifest.toml");
    fs::write(&manifest, doc.to_toml_string()).map_err(|e| CorpusError::io(&manifest, e))?;
    Ok(manifest)
}
