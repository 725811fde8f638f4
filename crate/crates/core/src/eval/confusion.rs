use serde::{Deserialize, Serialize};

use super::matching::iou;
use crate::corpus::{GtRecord, PredRecord};

/// `(N+1) x (N+1)` counts indexed `[predicted][true]`; index `N` is background.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub num_classes: usize,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(num_classes: usize) -> Self {
        Self {
            num_classes,
            counts: vec![vec![0; num_classes + 1]; num_classes + 1],
        }
    }

    pub fn background(&self) -> usize {
        self.num_classes
    }

    pub fn get(&self, predicted: usize, truth: usize) -> u64 {
        self.counts[predicted][truth]
    }

    pub fn column_sum(&self, truth: usize) -> u64 {
        self.counts.iter().map(|row| row[truth]).sum()
    }

    /// Each row scaled to sum to 1; all-zero rows stay zero.
    pub fn row_normalized(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let total: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
                    .collect()
            })
            .collect()
    }

    /// Adds one image's predictions and ground truth.
    ///
    /// Predictions under `conf` are dropped. Remaining prediction/GT pairs
    /// with IoU at least `iou_thr` are matched class-agnostically, largest
    /// IoU first, each side used once.
    pub fn add_image(&mut self, preds: &[PredRecord], gts: &[GtRecord], conf: f64, iou_thr: f64) {
        let kept: Vec<&PredRecord> = preds.iter().filter(|p| p.confidence >= conf).collect();
        let mut pairs = Vec::new();
        for (pi, p) in kept.iter().enumerate() {
            for (gi, g) in gts.iter().enumerate() {
                let overlap = iou(&p.bbox, &g.bbox);
                if overlap >= iou_thr && overlap > 0.0 {
                    pairs.push((overlap, pi, gi));
                }
            }
        }
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut pred_used = vec![false; kept.len()];
        let mut gt_used = vec![false; gts.len()];
        for (_, pi, gi) in pairs {
            if pred_used[pi] || gt_used[gi] {
                continue;
            }
            pred_used[pi] = true;
            gt_used[gi] = true;
            self.counts[kept[pi].class_id][gts[gi].class_id] += 1;
        }
        let bg = self.background();
        for (p, used) in kept.iter().zip(&pred_used) {
            if !used {
                self.counts[p.class_id][bg] += 1;
            }
        }
        for (g, used) in gts.iter().zip(&gt_used) {
            if !used {
                self.counts[bg][g.class_id] += 1;
            }
        }
    }
}

/// Confusion matrix over a set of images given as `(predictions, ground truth)` pairs.
pub fn confusion_matrix<'a>(
    images: impl IntoIterator<Item = (&'a [PredRecord], &'a [GtRecord])>,
    num_classes: usize,
    cm_conf: f64,
    cm_iou: f64,
) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix::new(num_classes);
    for (preds, gts) in images {
        cm.add_image(preds, gts, cm_conf, cm_iou);
    }
    cm
}
