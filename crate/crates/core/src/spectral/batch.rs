//! Whole-split modality generation.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use super::obscura::{obscura_transform, ObscuraParams, SeverityNormalization, TransformSeed};
use super::ops::{night_vision_transform, thermal_transform, to_grayscale, NightVisionParams};
use super::{ColorMapLUT, ImageBuffer, SpectralError};
use crate::corpus::{DatasetManifest, ManifestDoc, SplitDirs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Gray,
    Thermal,
    Night,
    Obscura,
}

impl Modality {
    pub const ALL: [Modality; 4] = [Modality::Gray, Modality::Thermal, Modality::Night, Modality::Obscura];

    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Gray => "gray",
            Modality::Thermal => "thermal",
            Modality::Night => "night",
            Modality::Obscura => "obscura",
        }
    }

    /// Display name used in comparison tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Modality::Gray => "Gray Scale",
            Modality::Thermal => "Thermal Vision",
            Modality::Night => "Night Vision",
            Modality::Obscura => "ObscuraVision",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modality {
    type Err = SpectralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Modality::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| SpectralError::InvalidParams(format!("unknown modality `{s}`")))
    }
}

/// Parameters for all modalities, loadable from a TOML params file.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransformParams {
    pub night: NightVisionParams,
    pub obscura: ObscuraParams,
}

impl TransformParams {
    pub fn from_toml_str(text: &str) -> Result<Self, SpectralError> {
        let p: TransformParams = toml::from_str(text).map_err(|e| SpectralError::InvalidParams(e.to_string()))?;
        p.night.validate()?;
        p.obscura.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformRow {
    pub image_id: String,
    pub modality: Modality,
    #[serde(serialize_with = "severity_or_dash", deserialize_with = "dash_or_severity")]
    pub severity: Option<f64>,
    pub output_path: PathBuf,
}

fn severity_or_dash<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_str("-"),
    }
}

fn dash_or_severity<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Cell {
        Num(f64),
        Text(String),
    }
    match Cell::deserialize(d)? {
        Cell::Num(x) => Ok(Some(x)),
        Cell::Text(t) if t == "-" => Ok(None),
        Cell::Text(t) => Err(serde::de::Error::custom(format!("bad severity `{t}`"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformReport {
    pub modality: Modality,
    pub split: String,
    pub seed: u64,
    pub image_count: usize,
    pub label_files_copied: usize,
    /// Not written to disk so the output tree stays byte-reproducible.
    #[serde(skip)]
    pub wall_time_ms: f64,
    /// Present for obscura: how severity components were normalized.
    pub severity_normalization: Option<SeverityNote>,
    pub rows: Vec<TransformRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverityNote {
    pub blur_component: String,
    pub fog_component: String,
    pub contrast_component: String,
    pub weights: [f64; 3],
    pub note: String,
}

impl SeverityNote {
    fn new(p: &ObscuraParams) -> Self {
        let SeverityNormalization { blur_divisor, fog } = p.normalization;
        Self {
            blur_component: format!("(kernel_len - 1) / {blur_divisor}"),
            fog_component: format!("{fog:?}").to_lowercase(),
            contrast_component: "configured cb_limit".into(),
            weights: [p.alpha, p.beta, p.gamma],
            note: "component normalization is a modelling choice; defaults score 0.25".into(),
        }
    }
}

/// Output layout under `out_dir`: `images/<id>.png`, `labels/<id>.txt`
/// (byte copies of the source labels), `transform_report.json` and a
/// `manifest.toml` declaring the result as the same split.
pub const REPORT_FILE: &str = "transform_report.json";
pub const OUTPUT_MANIFEST: &str = "manifest.toml";

/// Transforms a single image by modality. Gray output is replicated to RGB
/// here; [`transform_corpus`] writes it as a one-channel PNG.
pub fn transform_image(
    img: &ImageBuffer,
    modality: Modality,
    params: &TransformParams,
    lut: &ColorMapLUT,
    seed: TransformSeed,
    image_id: &str,
) -> Result<(ImageBuffer, Option<f64>), SpectralError> {
    Ok(match modality {
        Modality::Gray => (to_grayscale(img).to_rgb(), None),
        Modality::Thermal => (thermal_transform(img, lut), None),
        Modality::Night => (night_vision_transform(img, &params.night)?, None),
        Modality::Obscura => {
            let (out, score, _) = obscura_transform(img, &params.obscura, seed, image_id)?;
            (out, Some(score.value()))
        }
    })
}

fn write_one(
    src: &Path,
    dst: &Path,
    image_id: &str,
    modality: Modality,
    params: &TransformParams,
    lut: &ColorMapLUT,
    seed: TransformSeed,
) -> Result<Option<f64>, SpectralError> {
    let img = ImageBuffer::open(src)?;
    if modality == Modality::Gray {
        to_grayscale(&img).save_png(dst)?;
        return Ok(None);
    }
    let (out, severity) = transform_image(&img, modality, params, lut, seed, image_id)?;
    out.save_png(dst)?;
    Ok(severity)
}

/// Transforms every image of a split and copies its labels unchanged.
/// Output bytes do not depend on `workers`.
pub fn transform_corpus(
    manifest: &DatasetManifest,
    split_name: &str,
    modality: Modality,
    params: &TransformParams,
    seed: TransformSeed,
    out_dir: &Path,
    workers: Option<usize>,
) -> Result<TransformReport, SpectralError> {
    params.night.validate()?;
    params.obscura.validate()?;
    let split = manifest.split(split_name)?;
    for entry in &split.images {
        let label = split.label_path(&entry.image_id);
        if !label.is_file() {
            return Err(crate::corpus::CorpusError::LabelMissing {
                image_id: entry.image_id.clone(),
                path: label,
            }
            .into());
        }
    }
    let images_out = out_dir.join("images");
    let labels_out = out_dir.join("labels");
    for dir in [&images_out, &labels_out] {
        fs::create_dir_all(dir).map_err(|e| SpectralError::io(dir, e))?;
    }
    let same = |a: &Path, b: &Path| matches!((a.canonicalize(), b.canonicalize()), (Ok(x), Ok(y)) if x == y);
    if same(&images_out, &split.images_dir) || same(&labels_out, &split.labels_dir) {
        return Err(SpectralError::InvalidParams(
            "output directory overlaps the source split; refusing to overwrite inputs".into(),
        ));
    }

    let lut = ColorMapLUT::inferno();
    let started = Instant::now();
    let job = || {
        split
            .images
            .par_iter()
            .map(|entry| {
                let id = &entry.image_id;
                let dst = images_out.join(format!("{id}.png"));
                let severity = write_one(&entry.image_path, &dst, id, modality, params, &lut, seed)?;
                let label_src = split.label_path(id);
                let label_dst = labels_out.join(format!("{id}.txt"));
                fs::copy(&label_src, &label_dst).map_err(|e| SpectralError::io(&label_dst, e))?;
                Ok(TransformRow {
                    image_id: id.clone(),
                    modality,
                    severity,
                    output_path: PathBuf::from("images").join(format!("{id}.png")),
                })
            })
            .collect::<Result<Vec<_>, SpectralError>>()
    };
    let rows = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| SpectralError::InvalidParams(format!("worker pool: {e}")))?
            .install(job),
        None => job(),
    }?;

    let report = TransformReport {
        modality,
        split: split_name.to_string(),
        seed: seed.0,
        image_count: rows.len(),
        label_files_copied: rows.len(),
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        severity_normalization: (modality == Modality::Obscura).then(|| SeverityNote::new(&params.obscura)),
        rows,
    };
    let doc = ManifestDoc {
        classes: manifest.class_table.clone(),
        splits: [(
            split_name.to_string(),
            SplitDirs {
                images: "images".into(),
                labels: "labels".into(),
            },
        )]
        .into_iter()
        .collect(),
    };
    let manifest_path = out_dir.join(OUTPUT_MANIFEST);
    fs::write(&manifest_path, doc.to_toml_string()).map_err(|e| SpectralError::io(&manifest_path, e))?;
    let report_path = out_dir.join(REPORT_FILE);
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    fs::write(&report_path, json + "\n").map_err(|e| SpectralError::io(&report_path, e))?;
    Ok(report)
}
