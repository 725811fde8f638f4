//! Timing aggregation, cross-modality comparison tables and annotated renders.

mod comparison;
mod render;
mod timing;

use thiserror::Error;

pub use comparison::{
    compose_comparison, emit, ComparisonTable, ModalityMetrics, ModalityResult, RankedRow, TableFormat, COLUMNS,
};
pub use render::{class_color, label_text, pixel_rect, render_detections, LINE_WIDTH, PALETTE};
pub use timing::{aggregate_timing, format_timing_jsonl, parse_timing_jsonl, TimingRecord, TimingSummary};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error("EmptyInput: {0}")]
    EmptyInput(String),
    #[error("DuplicateModalityName: `{0}` appears more than once")]
    DuplicateModalityName(String),
    #[error("TimingUnreadable: line {line}: {message}")]
    TimingUnreadable { line: usize, message: String },
    #[error("UnknownFormat: `{0}` (expected markdown, csv or json)")]
    UnknownFormat(String),
}
