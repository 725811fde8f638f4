use serde::{Deserialize, Serialize};

use crate::corpus::{GtRecord, NormBox, PredRecord};

/// Intersection over union of two normalized boxes.
pub fn iou(a: &NormBox, b: &NormBox) -> f64 {
    let (ax0, ay0, ax1, ay1) = a.corners();
    let (bx0, by0, bx1, by1) = b.corners();
    let iw = (ax1.min(bx1) - ax0.max(bx0)).max(0.0);
    let ih = (ay1.min(by1) - ay0.max(by0)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatchFlag {
    TruePositive { gt: usize },
    FalsePositive,
}

impl MatchFlag {
    pub fn is_tp(self) -> bool {
        matches!(self, MatchFlag::TruePositive { .. })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Prediction indices ordered by descending confidence; ties keep input order.
pub fn confidence_order(preds: &[PredRecord]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].confidence.total_cmp(&preds[a].confidence));
    order
}

/// Greedy one-to-one matching for one image and one class.
///
/// Predictions are visited by descending confidence and each takes the
/// still-unmatched ground truth with the highest IoU at or above
/// `threshold` (first such ground truth on IoU ties). Flags are returned in
/// input order.
pub fn match_detections(preds: &[PredRecord], gts: &[GtRecord], threshold: f64) -> Vec<MatchFlag> {
    let mut flags = vec![MatchFlag::FalsePositive; preds.len()];
    let mut taken = vec![false; gts.len()];
    for p in confidence_order(preds) {
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if taken[g] {
                continue;
            }
            let overlap = iou(&preds[p].bbox, &gt.bbox);
            if overlap >= threshold && best.is_none_or(|(_, b)| overlap > b) {
                best = Some((g, overlap));
            }
        }
        if let Some((g, _)) = best {
            taken[g] = true;
            flags[p] = MatchFlag::TruePositive { gt: g };
        }
    }
    flags
}

pub fn count_matches(flags: &[MatchFlag], num_gt: usize) -> EvalCounts {
    let tp = flags.iter().filter(|f| f.is_tp()).count();
    EvalCounts {
        true_positives: tp,
        false_positives: flags.len() - tp,
        false_negatives: num_gt - tp,
    }
}

/// Precision, recall and their harmonic mean; every zero denominator yields 0.
pub fn precision_recall_f1(counts: EvalCounts) -> (f64, f64, f64) {
    let tp = counts.true_positives as f64;
    let ratio = |den: usize| if den == 0 { 0.0 } else { tp / den as f64 };
    let precision = ratio(counts.true_positives + counts.false_positives);
    let recall = ratio(counts.true_positives + counts.false_negatives);
    (precision, recall, f1_score(precision, recall))
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall <= 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}
