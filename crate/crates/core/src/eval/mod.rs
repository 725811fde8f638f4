//! Detection metrics: IoU matching, PR curves, AP/mAP, macro P/R/F1 and the
//! confusion matrix, plus an independent brute-force oracle used to check
//! the engine.

mod confusion;
mod curve;
mod matching;
pub mod oracle;
mod summary;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use confusion::{confusion_matrix, ConfusionMatrix};
pub use curve::{average_precision, pr_curve, Interpolation, PrCurve, PrPoint, ScoredDetection};
pub use matching::{
    confidence_order, count_matches, f1_score, iou, match_detections, precision_recall_f1, EvalCounts, MatchFlag,
};
pub use summary::{evaluate_split, ClassCurve, ClassResult, EvalSummary, GroundTruthSet, PredictionSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("UnknownImageId: predictions reference image `{0}` with no ground truth entry")]
    UnknownImageId(String),
    #[error("ClassIdOutOfRange: image `{image_id}` uses class {class_id}")]
    ClassIdOutOfRange { image_id: String, class_id: usize },
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error("InstanceTooLarge: {0} predictions exceeds the oracle limit of {max}", max = oracle::MAX_ORACLE_PREDICTIONS)]
    InstanceTooLarge(usize),
    #[error("SummaryUnreadable: {0}")]
    SummaryUnreadable(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatchConfig {
    /// Strictly increasing, each in (0, 1].
    pub iou_thresholds: Vec<f64>,
    pub confidence_floor: f64,
    pub interpolation: Interpolation,
    pub cm_conf: f64,
    pub cm_iou: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            iou_thresholds: coco_thresholds(),
            confidence_floor: 0.001,
            interpolation: Interpolation::Point101,
            cm_conf: 0.25,
            cm_iou: 0.45,
        }
    }
}

/// 0.50, 0.55, ..., 0.95.
pub fn coco_thresholds() -> Vec<f64> {
    (0..10).map(|i| (50 + 5 * i) as f64 / 100.0).collect()
}

impl MatchConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        let t = &self.iou_thresholds;
        if t.is_empty() {
            return Err(EvalError::InvalidConfig("no IoU thresholds".into()));
        }
        if t.iter().any(|&v| !(v > 0.0 && v <= 1.0)) {
            return Err(EvalError::InvalidConfig("IoU thresholds must lie in (0, 1]".into()));
        }
        if t.windows(2).any(|w| w[0] >= w[1]) {
            return Err(EvalError::InvalidConfig(
                "IoU thresholds must be strictly increasing".into(),
            ));
        }
        for (name, v) in [
            ("confidence_floor", self.confidence_floor),
            ("cm_conf", self.cm_conf),
            ("cm_iou", self.cm_iou),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(EvalError::InvalidConfig(format!("{name} must be in [0, 1]")));
            }
        }
        Ok(())
    }

    pub(crate) fn index_of_50(&self) -> Option<usize> {
        self.iou_thresholds.iter().position(|&t| t == 0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid() {
        let c = MatchConfig::default();
        assert_eq!(c.iou_thresholds.len(), 10);
        assert_eq!(c.iou_thresholds[0], 0.5);
        assert_eq!(c.iou_thresholds[9], 0.95);
        assert_eq!(c.index_of_50(), Some(0));
        c.validate().unwrap();
    }

    #[test]
    fn config_rules() {
        let bad = MatchConfig {
            iou_thresholds: vec![0.5, 0.5],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = MatchConfig {
            iou_thresholds: vec![0.0],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = MatchConfig {
            cm_iou: 2.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
