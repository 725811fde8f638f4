//! Brute-force AP reference for small instances.
//!
//! Nothing here calls into the engine's matching, curve or AP code. For
//! every distinct confidence cut the oracle re-runs matching on just the
//! surviving predictions, evaluates precision and recall directly, and
//! integrates the precision envelope literally over the recall levels.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{evaluate_split, EvalError, GroundTruthSet, Interpolation, MatchConfig, PredictionSet};
use crate::corpus::{ClassTable, GtRecord, NormBox, PredRecord};

pub const MAX_ORACLE_PREDICTIONS: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicroImage {
    pub image_id: String,
    pub gts: Vec<GtRecord>,
    pub preds: Vec<PredRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicroInstance {
    pub num_classes: usize,
    pub images: Vec<MicroImage>,
}

impl MicroInstance {
    pub fn prediction_count(&self) -> usize {
        self.images.iter().map(|i| i.preds.len()).sum()
    }

    pub fn class_table(&self) -> ClassTable {
        ClassTable::new((0..self.num_classes).map(|c| format!("class{c}"))).expect("non-empty")
    }

    pub fn ground_truth(&self) -> GroundTruthSet {
        self.images
            .iter()
            .map(|i| (i.image_id.clone(), i.gts.clone()))
            .collect()
    }

    pub fn predictions(&self) -> PredictionSet {
        self.images
            .iter()
            .filter(|i| !i.preds.is_empty())
            .map(|i| (i.image_id.clone(), i.preds.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// `ap[class][threshold]`; `None` for classes without ground truth.
    pub ap: Vec<Vec<Option<f64>>>,
    pub ap50: Vec<Option<f64>>,
    pub map50: f64,
    pub map50_95: f64,
}

fn overlap(a: &NormBox, b: &NormBox) -> f64 {
    let left = (a.cx - a.w * 0.5).max(b.cx - b.w * 0.5);
    let right = (a.cx + a.w * 0.5).min(b.cx + b.w * 0.5);
    let top = (a.cy - a.h * 0.5).max(b.cy - b.h * 0.5);
    let bottom = (a.cy + a.h * 0.5).min(b.cy + b.h * 0.5);
    if right <= left || bottom <= top {
        return 0.0;
    }
    let inter = (right - left) * (bottom - top);
    inter / (a.w * a.h + b.w * b.h - inter)
}

/// True-positive count for one image at cut `tau`.
fn true_positives_at(image: &MicroImage, class_id: usize, tau: f64, iou_thr: f64) -> (usize, usize) {
    let mut pending: Vec<usize> = (0..image.preds.len())
        .filter(|&i| image.preds[i].class_id == class_id && image.preds[i].confidence >= tau)
        .collect();
    let gts: Vec<&GtRecord> = image.gts.iter().filter(|g| g.class_id == class_id).collect();
    let kept = pending.len();
    let mut claimed = vec![false; gts.len()];
    let mut tp = 0;
    while !pending.is_empty() {
        // highest confidence, lowest input index among equals
        let mut pick = 0;
        for k in 1..pending.len() {
            let (a, b) = (&image.preds[pending[k]], &image.preds[pending[pick]]);
            if a.confidence > b.confidence || (a.confidence == b.confidence && pending[k] < pending[pick]) {
                pick = k;
            }
        }
        let p = pending.remove(pick);
        let mut chosen: Option<usize> = None;
        let mut chosen_iou = -1.0;
        for (g, gt) in gts.iter().enumerate() {
            let o = overlap(&image.preds[p].bbox, &gt.bbox);
            if !claimed[g] && o >= iou_thr && o > chosen_iou {
                chosen = Some(g);
                chosen_iou = o;
            }
        }
        if let Some(g) = chosen {
            claimed[g] = true;
            tp += 1;
        }
    }
    (tp, kept)
}

fn class_ap(inst: &MicroInstance, class_id: usize, iou_thr: f64, floor: f64) -> Option<f64> {
    let num_gt: usize = inst
        .images
        .iter()
        .map(|i| i.gts.iter().filter(|g| g.class_id == class_id).count())
        .sum();
    if num_gt == 0 {
        return None;
    }
    let mut cuts: Vec<f64> = inst
        .images
        .iter()
        .flat_map(|i| i.preds.iter())
        .filter(|p| p.class_id == class_id && p.confidence >= floor)
        .map(|p| p.confidence)
        .collect();
    cuts.sort_by(|a, b| b.total_cmp(a));
    cuts.dedup();

    // (recall, precision) at every cut
    let mut ops: Vec<(f64, f64)> = Vec::new();
    for &tau in &cuts {
        let (mut tp, mut kept) = (0, 0);
        for image in &inst.images {
            let (t, k) = true_positives_at(image, class_id, tau, iou_thr);
            tp += t;
            kept += k;
        }
        ops.push((tp as f64 / num_gt as f64, tp as f64 / kept as f64));
    }

    let mut levels: Vec<f64> = ops.iter().map(|o| o.0).collect();
    levels.push(0.0);
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut area = 0.0;
    for w in levels.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let envelope = ops.iter().filter(|o| o.0 >= hi).map(|o| o.1).fold(0.0, f64::max);
        area += (hi - lo) * envelope;
    }
    Some(area)
}

/// Per-class AP at each threshold plus mAP@0.50 and the threshold-averaged mAP.
pub fn brute_force_ap_oracle(
    inst: &MicroInstance,
    thresholds: &[f64],
    confidence_floor: f64,
) -> Result<OracleResult, EvalError> {
    let n = inst.prediction_count();
    if n > MAX_ORACLE_PREDICTIONS {
        return Err(EvalError::InstanceTooLarge(n));
    }
    let ap: Vec<Vec<Option<f64>>> = (0..inst.num_classes)
        .map(|c| {
            thresholds
                .iter()
                .map(|&t| class_ap(inst, c, t, confidence_floor))
                .collect()
        })
        .collect();
    let ap50: Vec<Option<f64>> = (0..inst.num_classes)
        .map(|c| class_ap(inst, c, 0.5, confidence_floor))
        .collect();

    let present: Vec<f64> = ap50.iter().flatten().copied().collect();
    let map50 = if present.is_empty() {
        0.0
    } else {
        present.iter().sum::<f64>() / present.len() as f64
    };
    let grid: Vec<f64> = ap.iter().flatten().flatten().copied().collect();
    let map50_95 = if grid.is_empty() {
        0.0
    } else {
        grid.iter().sum::<f64>() / grid.len() as f64
    };
    Ok(OracleResult {
        ap,
        ap50,
        map50,
        map50_95,
    })
}

fn jitter(rng: &mut impl Rng, b: &NormBox, scale: f64) -> NormBox {
    let w = (b.w * rng.gen_range(1.0 - scale..=1.0 + scale)).clamp(0.02, 0.5);
    let h = (b.h * rng.gen_range(1.0 - scale..=1.0 + scale)).clamp(0.02, 0.5);
    let cx = (b.cx + rng.gen_range(-scale..=scale) * b.w).clamp(w / 2.0, 1.0 - w / 2.0);
    let cy = (b.cy + rng.gen_range(-scale..=scale) * b.h).clamp(h / 2.0, 1.0 - h / 2.0);
    NormBox { cx, cy, w, h }
}

fn random_box(rng: &mut impl Rng) -> NormBox {
    let w = rng.gen_range(0.05..0.4);
    let h = rng.gen_range(0.05..0.4);
    NormBox {
        cx: rng.gen_range(w / 2.0..=1.0 - w / 2.0),
        cy: rng.gen_range(h / 2.0..=1.0 - h / 2.0),
        w,
        h,
    }
}

/// Random instance with at most 5 images, 3 classes and 6 boxes of each kind
/// per image. Confidences come from a coarse grid half the time so ties occur.
pub fn random_micro_instance(rng: &mut impl Rng) -> MicroInstance {
    let num_classes = rng.gen_range(1..=3);
    let num_images = rng.gen_range(1..=5);
    let coarse = rng.gen_bool(0.5);
    let mut images = Vec::with_capacity(num_images);
    for i in 0..num_images {
        let gts: Vec<GtRecord> = (0..rng.gen_range(0..=6))
            .map(|_| GtRecord {
                class_id: rng.gen_range(0..num_classes),
                bbox: random_box(rng),
            })
            .collect();
        let mut preds = Vec::new();
        for _ in 0..rng.gen_range(0..=6) {
            let confidence = if coarse {
                rng.gen_range(1..=9) as f64 / 10.0
            } else {
                rng.gen_range(0.01..=1.0)
            };
            let (class_id, bbox) = match gts.choose(rng) {
                Some(g) if rng.gen_bool(0.75) => {
                    let class_id = if rng.gen_bool(0.85) {
                        g.class_id
                    } else {
                        rng.gen_range(0..num_classes)
                    };
                    let scale = rng.gen_range(0.0..0.35);
                    (class_id, jitter(rng, &g.bbox, scale))
                }
                _ => (rng.gen_range(0..num_classes), random_box(rng)),
            };
            preds.push(PredRecord {
                class_id,
                bbox,
                confidence,
            });
        }
        images.push(MicroImage {
            image_id: format!("img{i:02}"),
            gts,
            preds,
        });
    }
    MicroInstance { num_classes, images }
}

/// Outcome of comparing the engine against the oracle on random instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSuiteReport {
    pub instances: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub max_abs_diff: f64,
    pub ap_mismatches: usize,
    pub map_mismatches: usize,
    pub monotonicity_violations: usize,
    /// Index of the first failing instance, if any.
    pub first_failure: Option<usize>,
}

impl OracleSuiteReport {
    pub fn passed(&self) -> bool {
        self.ap_mismatches == 0 && self.map_mismatches == 0 && self.monotonicity_violations == 0
    }
}

/// Compares `evaluate_split` in all-points mode with the oracle on
/// `instances` random micro-corpora.
pub fn run_oracle_suite(instances: usize, seed: u64, tolerance: f64) -> Result<OracleSuiteReport, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = MatchConfig {
        interpolation: Interpolation::AllPoints,
        ..MatchConfig::default()
    };
    let mut report = OracleSuiteReport {
        instances,
        seed,
        tolerance,
        max_abs_diff: 0.0,
        ap_mismatches: 0,
        map_mismatches: 0,
        monotonicity_violations: 0,
        first_failure: None,
    };
    for k in 0..instances {
        let inst = random_micro_instance(&mut rng);
        let engine = evaluate_split(&inst.ground_truth(), &inst.predictions(), &inst.class_table(), &config)?;
        let oracle = brute_force_ap_oracle(&inst, &config.iou_thresholds, config.confidence_floor)?;
        let mut failed = false;

        for (class, row) in oracle.ap.iter().enumerate() {
            let got = &engine.per_class[class];
            for (t, expected) in row.iter().enumerate() {
                let diff = match expected {
                    Some(e) => (got.ap[t] - e).abs(),
                    // classes without ground truth are excluded; engine reports 0
                    None => got.ap[t].abs(),
                };
                report.max_abs_diff = report.max_abs_diff.max(diff);
                if diff > tolerance {
                    report.ap_mismatches += 1;
                    failed = true;
                }
            }
        }
        for (expected, got) in [(oracle.map50, engine.map50), (oracle.map50_95, engine.map50_95)] {
            let diff = (expected - got).abs();
            report.max_abs_diff = report.max_abs_diff.max(diff);
            if diff > tolerance {
                report.map_mismatches += 1;
                failed = true;
            }
        }
        if engine.map50_95 > engine.map50 + tolerance {
            report.monotonicity_violations += 1;
            failed = true;
        }
        if failed && report.first_failure.is_none() {
            report.first_failure = Some(k);
        }
    }
    Ok(report)
}
