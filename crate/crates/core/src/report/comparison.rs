use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ReportError, TimingSummary};
use crate::eval::EvalSummary;

/// Headline metrics carried into the comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModalityMetrics {
    pub map50: f64,
    pub map50_95: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl From<&EvalSummary> for ModalityMetrics {
    fn from(s: &EvalSummary) -> Self {
        Self {
            map50: s.map50,
            map50_95: s.map50_95,
            precision: s.precision,
            recall: s.recall,
            f1: s.f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalityResult {
    pub modality: String,
    pub metrics: ModalityMetrics,
    pub timing: TimingSummary,
    pub training_time_h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedRow {
    pub rank: usize,
    pub result: ModalityResult,
}

/// Rows ordered by mAP@0.50 descending, then mAP@0.50:0.95 descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<RankedRow>,
}

fn ranking(a: &ModalityResult, b: &ModalityResult) -> Ordering {
    b.metrics
        .map50
        .total_cmp(&a.metrics.map50)
        .then(b.metrics.map50_95.total_cmp(&a.metrics.map50_95))
        // name keeps the order independent of input order on full ties
        .then(a.modality.cmp(&b.modality))
}

pub fn compose_comparison(results: &[ModalityResult]) -> Result<ComparisonTable, ReportError> {
    if results.is_empty() {
        return Err(ReportError::EmptyInput("no modality results".into()));
    }
    let mut seen = BTreeSet::new();
    for r in results {
        if !seen.insert(r.modality.as_str()) {
            return Err(ReportError::DuplicateModalityName(r.modality.clone()));
        }
    }
    let mut sorted = results.to_vec();
    sorted.sort_by(ranking);
    Ok(ComparisonTable {
        rows: sorted
            .into_iter()
            .enumerate()
            .map(|(i, result)| RankedRow { rank: i + 1, result })
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Markdown,
    Csv,
    Json,
}

impl FromStr for TableFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" | "md" => Ok(Self::Markdown),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(ReportError::UnknownFormat(other.to_string())),
        }
    }
}

pub const COLUMNS: [&str; 11] = [
    "modality",
    "preprocess",
    "inference",
    "postprocess",
    "total",
    "map50",
    "map50_95",
    "precision",
    "recall",
    "f1",
    "training_time_h",
];

/// Display cells. Times get one decimal and the total is rounded from the
/// unrounded stage sum.
fn cells(r: &ModalityResult) -> [String; 11] {
    let ms = |v: f64| format!("{v:.1}");
    let m = |v: f64| format!("{v:.3}");
    [
        r.modality.clone(),
        ms(r.timing.preprocess_ms),
        ms(r.timing.inference_ms),
        ms(r.timing.postprocess_ms),
        ms(r.timing.preprocess_ms + r.timing.inference_ms + r.timing.postprocess_ms),
        m(r.metrics.map50),
        m(r.metrics.map50_95),
        m(r.metrics.precision),
        m(r.metrics.recall),
        m(r.metrics.f1),
        r.training_time_h.map_or_else(|| "-".to_string(), m),
    ]
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Renders the table. Output bytes depend only on the table contents.
pub fn emit(table: &ComparisonTable, format: TableFormat) -> String {
    let mut out = String::new();
    match format {
        TableFormat::Markdown => {
            let _ = writeln!(out, "| {} |", COLUMNS.join(" | "));
            let _ = writeln!(out, "|{}", ["---|"; 11].concat());
            for row in &table.rows {
                let c = cells(&row.result).map(|s| s.replace('|', "\\|"));
                let _ = writeln!(out, "| {} |", c.join(" | "));
            }
        }
        TableFormat::Csv => {
            let _ = writeln!(out, "{}", COLUMNS.join(","));
            for row in &table.rows {
                let c = cells(&row.result).map(|s| csv_cell(&s));
                let _ = writeln!(out, "{}", c.join(","));
            }
        }
        TableFormat::Json => {
            let rows: Vec<serde_json::Map<String, serde_json::Value>> = table
                .rows
                .iter()
                .map(|row| {
                    let r = &row.result;
                    let t = &r.timing;
                    let values = [
                        serde_json::json!(r.modality),
                        serde_json::json!(t.preprocess_ms),
                        serde_json::json!(t.inference_ms),
                        serde_json::json!(t.postprocess_ms),
                        serde_json::json!(t.preprocess_ms + t.inference_ms + t.postprocess_ms),
                        serde_json::json!(r.metrics.map50),
                        serde_json::json!(r.metrics.map50_95),
                        serde_json::json!(r.metrics.precision),
                        serde_json::json!(r.metrics.recall),
                        serde_json::json!(r.metrics.f1),
                        r.training_time_h
                            .map_or(serde_json::json!("-"), |h| serde_json::json!(h)),
                    ];
                    COLUMNS.iter().map(|c| c.to_string()).zip(values).collect()
                })
                .collect();
            out = serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n";
        }
    }
    out
}
