//! Annotation and prediction records in the YOLO text format.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// Default slack allowed on box edges before a box is rejected.
pub const EDGE_TOLERANCE: f64 = 1e-6;

/// Box in normalized center-size form. All fields are fractions of the
/// image width/height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

/// Reason a box failed validation, mapped to a token by the line parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxField {
    Cx,
    Cy,
    W,
    H,
}

impl NormBox {
    /// Validates the box. Edges that overshoot `[0, 1]` by at most
    /// `tolerance` are clamped back into range.
    pub fn new(cx: f64, cy: f64, w: f64, h: f64, tolerance: f64) -> Result<Self, BoxField> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(cx) {
            return Err(BoxField::Cx);
        }
        if !unit(cy) {
            return Err(BoxField::Cy);
        }
        if !(w > 0.0 && w <= 1.0) {
            return Err(BoxField::W);
        }
        if !(h > 0.0 && h <= 1.0) {
            return Err(BoxField::H);
        }
        let (cx, w) = clamp_axis(cx, w, tolerance).ok_or(BoxField::W)?;
        let (cy, h) = clamp_axis(cy, h, tolerance).ok_or(BoxField::H)?;
        Ok(Self { cx, cy, w, h })
    }

    /// Corner form `(x0, y0, x1, y1)`.
    pub fn corners(&self) -> (f64, f64, f64, f64) {
        let hw = self.w / 2.0;
        let hh = self.h / 2.0;
        (self.cx - hw, self.cy - hh, self.cx + hw, self.cy + hh)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

// Values are only rewritten when an edge actually leaves the unit interval,
// so in-range boxes survive a write/parse cycle untouched.
fn clamp_axis(center: f64, size: f64, tolerance: f64) -> Option<(f64, f64)> {
    let lo = center - size / 2.0;
    let hi = center + size / 2.0;
    if lo >= 0.0 && hi <= 1.0 {
        return Some((center, size));
    }
    if lo < -tolerance || hi > 1.0 + tolerance {
        return None;
    }
    let lo = lo.max(0.0);
    let hi = hi.min(1.0);
    let size = hi - lo;
    if size <= 0.0 {
        return None;
    }
    Some(((lo + hi) / 2.0, size))
}

/// One ground-truth object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtRecord {
    pub class_id: usize,
    #[serde(rename = "box")]
    pub bbox: NormBox,
}

/// One detector output, assumed to be post-NMS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredRecord {
    pub class_id: usize,
    #[serde(rename = "box")]
    pub bbox: NormBox,
    pub confidence: f64,
}

/// Knobs for the line parsers.
#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    pub num_classes: usize,
    pub edge_tolerance: f64,
}

impl ParseOptions {
    pub fn new(num_classes: usize) -> Self {
        Self {
            num_classes,
            edge_tolerance: EDGE_TOLERANCE,
        }
    }
}

fn parse_class(token: &str, line: usize, opts: &ParseOptions) -> Result<usize, CorpusError> {
    let value: i64 = token.parse().map_err(|_| CorpusError::NonNumericToken {
        line,
        token: token.to_string(),
    })?;
    if value < 0 || value as u64 >= opts.num_classes as u64 {
        return Err(CorpusError::ClassIdOutOfRange {
            line,
            token: token.to_string(),
        });
    }
    Ok(value as usize)
}

fn parse_fraction(token: &str, line: usize) -> Result<f64, CorpusError> {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CorpusError::NonNumericToken {
            line,
            token: token.to_string(),
        }),
    }
}

fn parse_box(tokens: &[&str], line: usize, opts: &ParseOptions) -> Result<NormBox, CorpusError> {
    let mut v = [0.0; 4];
    for (slot, token) in v.iter_mut().zip(tokens) {
        *slot = parse_fraction(token, line)?;
    }
    NormBox::new(v[0], v[1], v[2], v[3], opts.edge_tolerance).map_err(|field| {
        let idx = match field {
            BoxField::Cx => 0,
            BoxField::Cy => 1,
            BoxField::W => 2,
            BoxField::H => 3,
        };
        CorpusError::CoordinateOutOfRange {
            line,
            token: tokens[idx].to_string(),
        }
    })
}

/// Parses `<class_id> <cx> <cy> <w> <h>`. `line` is the 1-based line number
/// carried into any error.
pub fn parse_annotation_line(text: &str, line: usize, opts: &ParseOptions) -> Result<GtRecord, CorpusError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() != 5 {
        return Err(CorpusError::WrongTokenCount {
            line,
            expected: 5,
            found: tokens.len(),
        });
    }
    let class_id = parse_class(tokens[0], line, opts)?;
    let bbox = parse_box(&tokens[1..5], line, opts)?;
    Ok(GtRecord { class_id, bbox })
}

/// Parses `<class_id> <cx> <cy> <w> <h> <confidence>`.
pub fn parse_prediction_line(text: &str, line: usize, opts: &ParseOptions) -> Result<PredRecord, CorpusError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() != 6 {
        return Err(CorpusError::WrongTokenCount {
            line,
            expected: 6,
            found: tokens.len(),
        });
    }
    let class_id = parse_class(tokens[0], line, opts)?;
    let bbox = parse_box(&tokens[1..5], line, opts)?;
    let confidence = parse_fraction(tokens[5], line)?;
    if !(0.0..=1.0).contains(&confidence) {
        return Err(CorpusError::ConfidenceOutOfRange {
            line,
            token: tokens[5].to_string(),
        });
    }
    Ok(PredRecord {
        class_id,
        bbox,
        confidence,
    })
}

fn parse_lines<T>(
    text: &str,
    mut parse: impl FnMut(&str, usize) -> Result<T, CorpusError>,
) -> Vec<Result<T, CorpusError>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse(l, i + 1))
        .collect()
}

/// Parses a whole label file body, returning one result per non-blank line.
pub fn parse_annotation_text(text: &str, opts: &ParseOptions) -> Vec<Result<GtRecord, CorpusError>> {
    parse_lines(text, |l, n| parse_annotation_line(l, n, opts))
}

/// Parses a whole prediction file body, failing on the first bad line.
pub fn parse_prediction_text(text: &str, opts: &ParseOptions) -> Result<Vec<PredRecord>, CorpusError> {
    parse_lines(text, |l, n| parse_prediction_line(l, n, opts))
        .into_iter()
        .collect()
}

/// Reads a label file, failing on the first bad line with file context.
pub fn read_annotations(path: &Path, opts: &ParseOptions) -> Result<Vec<GtRecord>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    parse_annotation_text(&text, opts)
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(|e| e.in_file(path))
}

/// Reads a prediction file. A missing file means no predictions.
pub fn read_predictions(path: &Path, opts: &ParseOptions) -> Result<Vec<PredRecord>, CorpusError> {
    match fs::read_to_string(path) {
        Ok(text) => parse_prediction_text(&text, opts).map_err(|e| e.in_file(path)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(CorpusError::io(path, e)),
    }
}

pub fn format_annotations(records: &[GtRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let b = &r.bbox;
        let _ = writeln!(out, "{} {:.6} {:.6} {:.6} {:.6}", r.class_id, b.cx, b.cy, b.w, b.h);
    }
    out
}

pub fn format_predictions(records: &[PredRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let b = &r.bbox;
        let _ = writeln!(
            out,
            "{} {:.6} {:.6} {:.6} {:.6} {:.6}",
            r.class_id, b.cx, b.cy, b.w, b.h, r.confidence
        );
    }
    out
}

/// Writes one line per record with 6-decimal fractions and LF endings.
pub fn write_annotations(records: &[GtRecord], destination: &Path) -> Result<(), CorpusError> {
    fs::write(destination, format_annotations(records)).map_err(|e| CorpusError::io(destination, e))
}

pub fn write_predictions(records: &[PredRecord], destination: &Path) -> Result<(), CorpusError> {
    fs::write(destination, format_predictions(records)).map_err(|e| CorpusError::io(destination, e))
}
