use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::confusion::{confusion_matrix, ConfusionMatrix};
use super::curve::{average_precision, pr_curve, Interpolation, PrCurve, ScoredDetection};
use super::matching::{f1_score, match_detections, precision_recall_f1, EvalCounts};
use super::{EvalError, MatchConfig};
use crate::corpus::{ClassTable, GtRecord, PredRecord};

/// Ground truth keyed by image id. Every evaluated image must appear here,
/// even with an empty record list.
pub type GroundTruthSet = BTreeMap<String, Vec<GtRecord>>;
/// Predictions keyed by image id; absent images have no predictions.
pub type PredictionSet = BTreeMap<String, Vec<PredRecord>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassResult {
    pub class_id: usize,
    pub name: String,
    pub num_gt: usize,
    pub num_pred: usize,
    /// AP per threshold, aligned with `EvalSummary::iou_thresholds`.
    pub ap: Vec<f64>,
    pub ap50: f64,
    pub ap50_95: f64,
    /// Counts at IoU 0.50 and the operating confidence.
    pub counts: EvalCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCurve {
    pub class_id: usize,
    pub curve: PrCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub class_names: Vec<String>,
    pub iou_thresholds: Vec<f64>,
    pub interpolation: Interpolation,
    pub map50: f64,
    pub map50_95: f64,
    /// Always "macro": per-class values averaged over classes with ground truth.
    pub averaging: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Confidence at which `precision`/`recall`/`f1` are reported.
    pub operating_confidence: Option<f64>,
    pub per_class: Vec<ClassResult>,
    pub confusion_matrix: ConfusionMatrix,
    pub confusion_matrix_normalized: Vec<Vec<f64>>,
    /// PR curves at IoU 0.50 for external plotting.
    pub pr_curves: Vec<ClassCurve>,
}

impl EvalSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, EvalError> {
        serde_json::from_str(text).map_err(|e| EvalError::SummaryUnreadable(e.to_string()))
    }
}

fn check_inputs(gts: &GroundTruthSet, preds: &PredictionSet, n: usize) -> Result<(), EvalError> {
    if let Some(id) = preds.keys().find(|id| !gts.contains_key(*id)) {
        return Err(EvalError::UnknownImageId(id.clone()));
    }
    let gt_ids = gts.iter().flat_map(|(id, v)| v.iter().map(move |r| (id, r.class_id)));
    let pred_ids = preds.iter().flat_map(|(id, v)| v.iter().map(move |r| (id, r.class_id)));
    if let Some((id, class_id)) = gt_ids.chain(pred_ids).find(|(_, c)| *c >= n) {
        return Err(EvalError::ClassIdOutOfRange {
            image_id: id.clone(),
            class_id,
        });
    }
    Ok(())
}

struct ClassWork<'a> {
    /// Per image: (predictions of this class above the floor, GTs of this class).
    images: Vec<(Vec<PredRecord>, Vec<&'a GtRecord>)>,
    num_gt: usize,
}

fn gather<'a>(gts: &'a GroundTruthSet, preds: &PredictionSet, class_id: usize, floor: f64) -> ClassWork<'a> {
    let mut images = Vec::with_capacity(gts.len());
    let mut num_gt = 0;
    for (id, gt) in gts {
        let g: Vec<&GtRecord> = gt.iter().filter(|r| r.class_id == class_id).collect();
        let p: Vec<PredRecord> = preds
            .get(id)
            .map(|v| {
                v.iter()
                    .filter(|r| r.class_id == class_id && r.confidence >= floor)
                    .copied()
                    .collect()
            })
            .unwrap_or_default();
        num_gt += g.len();
        images.push((p, g));
    }
    ClassWork { images, num_gt }
}

fn scored_at(work: &ClassWork<'_>, threshold: f64) -> Vec<ScoredDetection> {
    let mut out = Vec::new();
    for (preds, gts) in &work.images {
        let gts: Vec<GtRecord> = gts.iter().map(|g| **g).collect();
        let flags = match_detections(preds, &gts, threshold);
        out.extend(preds.iter().zip(flags).map(|(p, f)| ScoredDetection {
            confidence: p.confidence,
            is_tp: f.is_tp(),
        }));
    }
    out
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Picks the confidence maximizing the F1 of macro precision and macro
/// recall over `classes`; the highest such confidence wins ties.
fn operating_point(per_class: &[(usize, Vec<ScoredDetection>)]) -> Option<(f64, Vec<EvalCounts>)> {
    let mut thresholds: Vec<f64> = per_class
        .iter()
        .flat_map(|(_, d)| d.iter().map(|s| s.confidence))
        .collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();

    let sorted: Vec<Vec<ScoredDetection>> = per_class
        .iter()
        .map(|(_, d)| {
            let mut d = d.clone();
            d.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
            d
        })
        .collect();
    let mut cursor = vec![0usize; per_class.len()];
    let mut tp = vec![0usize; per_class.len()];
    let mut fp = vec![0usize; per_class.len()];
    let mut best: Option<(f64, f64, Vec<EvalCounts>)> = None;

    for &tau in &thresholds {
        for c in 0..per_class.len() {
            while let Some(d) = sorted[c].get(cursor[c]).filter(|d| d.confidence >= tau) {
                if d.is_tp {
                    tp[c] += 1;
                } else {
                    fp[c] += 1;
                }
                cursor[c] += 1;
            }
        }
        let counts: Vec<EvalCounts> = per_class
            .iter()
            .enumerate()
            .map(|(c, (num_gt, _))| EvalCounts {
                true_positives: tp[c],
                false_positives: fp[c],
                false_negatives: num_gt - tp[c],
            })
            .collect();
        let prf: Vec<(f64, f64, f64)> = counts.iter().map(|&c| precision_recall_f1(c)).collect();
        let f1 = f1_score(mean(prf.iter().map(|x| x.0)), mean(prf.iter().map(|x| x.1)));
        if best.as_ref().is_none_or(|(b, _, _)| f1 > *b) {
            best = Some((f1, tau, counts));
        }
    }
    best.map(|(_, tau, counts)| (tau, counts))
}

/// Full metric suite for one split.
pub fn evaluate_split(
    gts: &GroundTruthSet,
    preds: &PredictionSet,
    class_table: &ClassTable,
    config: &MatchConfig,
) -> Result<EvalSummary, EvalError> {
    config.validate()?;
    let n = class_table.len();
    check_inputs(gts, preds, n)?;

    let idx50 = config.index_of_50();
    let per_class_work: Vec<_> = (0..n)
        .into_par_iter()
        .map(|c| {
            let work = gather(gts, preds, c, config.confidence_floor);
            let aps: Vec<f64> = config
                .iou_thresholds
                .iter()
                .map(|&t| average_precision(&pr_curve(&scored_at(&work, t), work.num_gt), config.interpolation))
                .collect();
            let scored50 = scored_at(&work, 0.5);
            let curve50 = pr_curve(&scored50, work.num_gt);
            let ap50 = match idx50 {
                Some(i) => aps[i],
                None => average_precision(&curve50, config.interpolation),
            };
            let num_pred = work.images.iter().map(|(p, _)| p.len()).sum();
            (c, work.num_gt, num_pred, aps, ap50, scored50, curve50)
        })
        .collect();

    let with_gt: Vec<_> = per_class_work.iter().filter(|w| w.1 > 0).collect();
    let map50 = mean(with_gt.iter().map(|w| w.4));
    let map50_95 = mean(with_gt.iter().flat_map(|w| w.3.iter().copied()));

    let op_input: Vec<(usize, Vec<ScoredDetection>)> = with_gt.iter().map(|w| (w.1, w.5.clone())).collect();
    let op = operating_point(&op_input);
    let mut op_counts: BTreeMap<usize, EvalCounts> = BTreeMap::new();
    if let Some((_, counts)) = &op {
        for (w, c) in with_gt.iter().zip(counts) {
            op_counts.insert(w.0, *c);
        }
    }

    let per_class: Vec<ClassResult> = per_class_work
        .iter()
        .map(|(c, num_gt, num_pred, aps, ap50, _, _)| {
            let counts = op_counts.get(c).copied().unwrap_or(EvalCounts {
                false_negatives: *num_gt,
                ..EvalCounts::default()
            });
            let (precision, recall, f1) = precision_recall_f1(counts);
            ClassResult {
                class_id: *c,
                name: class_table.name(*c).unwrap_or_default().to_string(),
                num_gt: *num_gt,
                num_pred: *num_pred,
                ap: aps.clone(),
                ap50: *ap50,
                ap50_95: mean(aps.iter().copied()),
                counts,
                precision,
                recall,
                f1,
            }
        })
        .collect();

    let scored: Vec<&ClassResult> = per_class.iter().filter(|r| r.num_gt > 0).collect();
    let precision = mean(scored.iter().map(|r| r.precision));
    let recall = mean(scored.iter().map(|r| r.recall));

    let empty: Vec<PredRecord> = Vec::new();
    let cm = confusion_matrix(
        gts.iter()
            .map(|(id, g)| (preds.get(id).unwrap_or(&empty).as_slice(), g.as_slice())),
        n,
        config.cm_conf,
        config.cm_iou,
    );

    Ok(EvalSummary {
        class_names: class_table.names().to_vec(),
        iou_thresholds: config.iou_thresholds.clone(),
        interpolation: config.interpolation,
        map50,
        map50_95,
        averaging: "macro".into(),
        precision,
        recall,
        f1: f1_score(precision, recall),
        operating_confidence: op.map(|(tau, _)| tau),
        per_class,
        confusion_matrix_normalized: cm.row_normalized(),
        confusion_matrix: cm,
        pr_curves: per_class_work
            .into_iter()
            .map(|(c, _, _, _, _, _, curve)| ClassCurve { class_id: c, curve })
            .collect(),
    })
}
