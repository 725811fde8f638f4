//! 256-entry color lookup tables and the on-disk LUT asset format.
//!
//! The asset is one header line followed by 256 `index r g b` lines:
//!
//! ```text
//! # inferno-lut v1 provenance="..." sha256=<hex digest of the 256 body lines>
//! 0 0 0 4
//! ...
//! ```

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use super::ops::luma;
use super::SpectralError;

const INFERNO_ASSET: &str = include_str!("../../assets/inferno.lut");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorMapLUT {
    entries: Box<[[u8; 3]; 256]>,
}

impl ColorMapLUT {
    /// Requires entry 0 to be the darkest and entry 255 the brightest by luma.
    pub fn new(entries: &[[u8; 3]]) -> Result<Self, SpectralError> {
        let table: [[u8; 3]; 256] = entries
            .try_into()
            .map_err(|_| SpectralError::InvalidLut(format!("expected 256 entries, got {}", entries.len())))?;
        let lumas: Vec<f64> = table.iter().map(|&p| luma(p)).collect();
        let lo = lumas.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = lumas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lumas[0] != lo || lumas[255] != hi {
            return Err(SpectralError::InvalidLut(
                "first entry must be darkest and last entry brightest".into(),
            ));
        }
        Ok(Self {
            entries: Box::new(table),
        })
    }

    /// Gray ramp: entry `i` is `(i, i, i)`.
    pub fn identity() -> Self {
        let ramp: Vec<[u8; 3]> = (0..=255u8).map(|i| [i, i, i]).collect();
        Self::new(&ramp).expect("ramp is ordered")
    }

    /// The bundled inferno table.
    pub fn inferno() -> Self {
        parse_lut_asset(INFERNO_ASSET)
            .expect("bundled inferno asset is valid")
            .lut
    }

    pub fn get(&self, intensity: u8) -> [u8; 3] {
        self.entries[intensity as usize]
    }

    pub fn entries(&self) -> &[[u8; 3]; 256] {
        &self.entries
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LutAsset {
    pub provenance: String,
    pub sha256: String,
    pub lut: ColorMapLUT,
}

fn body_text(entries: &[[u8; 3]; 256]) -> String {
    let mut body = String::with_capacity(256 * 12);
    for (i, [r, g, b]) in entries.iter().enumerate() {
        let _ = writeln!(body, "{i} {r} {g} {b}");
    }
    body
}

fn digest_hex(data: &str) -> String {
    Sha256::digest(data.as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Serializes a LUT in the asset format, computing the checksum. Quotes
/// and line breaks in `provenance` become `'` and spaces.
pub fn format_lut_asset(name: &str, provenance: &str, lut: &ColorMapLUT) -> String {
    let body = body_text(lut.entries());
    let provenance: String = provenance
        .chars()
        .map(|c| match c {
            '"' => '\'',
            '\n' | '\r' => ' ',
            c => c,
        })
        .collect();
    format!(
        "# {name} v1 provenance=\"{provenance}\" sha256={}\n{body}",
        digest_hex(&body)
    )
}

fn bad(msg: impl Into<String>) -> SpectralError {
    SpectralError::InvalidLut(msg.into())
}

/// Parses and checksum-verifies a LUT asset.
pub fn parse_lut_asset(text: &str) -> Result<LutAsset, SpectralError> {
    let (header, body) = text.split_once('\n').ok_or_else(|| bad("missing header line"))?;
    let header = header
        .strip_prefix("# ")
        .ok_or_else(|| bad("header must start with `# `"))?;
    let (rest, sha256) = header
        .rsplit_once(" sha256=")
        .ok_or_else(|| bad("header lacks sha256 field"))?;
    let provenance = rest
        .split_once(" provenance=")
        .and_then(|(_, p)| p.strip_prefix('"')?.strip_suffix('"'))
        .map(str::to_string)
        .ok_or_else(|| bad("header lacks a quoted provenance field"))?;
    if sha256.len() != 64 || !sha256.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(bad("malformed sha256 digest"));
    }
    let actual = digest_hex(body);
    if !actual.eq_ignore_ascii_case(sha256) {
        return Err(bad(format!("checksum mismatch: header {sha256}, body {actual}")));
    }

    let mut entries = Vec::with_capacity(256);
    for (i, line) in body.lines().enumerate() {
        let fields: Vec<&str> = line.split(' ').collect();
        if fields.len() != 4 {
            return Err(bad(format!("line {}: expected `index r g b`", i + 2)));
        }
        let index: usize = fields[0]
            .parse()
            .map_err(|_| bad(format!("line {}: bad index", i + 2)))?;
        if index != i {
            return Err(bad(format!("line {}: index {index} out of sequence", i + 2)));
        }
        let mut rgb = [0u8; 3];
        for (c, f) in rgb.iter_mut().zip(&fields[1..]) {
            *c = f
                .parse()
                .map_err(|_| bad(format!("line {}: bad channel `{f}`", i + 2)))?;
        }
        entries.push(rgb);
    }
    Ok(LutAsset {
        provenance,
        sha256: sha256.to_ascii_lowercase(),
        lut: ColorMapLUT::new(&entries)?,
    })
}
