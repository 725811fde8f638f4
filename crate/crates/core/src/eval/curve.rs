use serde::{Deserialize, Serialize};

/// How the precision envelope is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    /// Mean of the envelope sampled at recall 0.00, 0.01, ..., 1.00.
    #[default]
    #[serde(rename = "101-point")]
    Point101,
    /// Exact area under the envelope.
    AllPoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredDetection {
    pub confidence: f64,
    pub is_tp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
    /// Operating threshold: detections with at least this confidence count.
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
    pub num_gt: usize,
}

/// Sweeps detections by descending confidence. One point is emitted per
/// distinct confidence, since tied detections cannot be separated by a
/// threshold.
pub fn pr_curve(detections: &[ScoredDetection], num_gt: usize) -> PrCurve {
    if num_gt == 0 {
        return PrCurve::default();
    }
    let mut sorted = detections.to_vec();
    sorted.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    for (i, d) in sorted.iter().enumerate() {
        if d.is_tp {
            tp += 1;
        } else {
            fp += 1;
        }
        let group_ends = sorted.get(i + 1).is_none_or(|n| n.confidence != d.confidence);
        if group_ends {
            points.push(PrPoint {
                recall: tp as f64 / num_gt as f64,
                precision: tp as f64 / (tp + fp) as f64,
                confidence: d.confidence,
            });
        }
    }
    PrCurve { points, num_gt }
}

/// Monotone (non-increasing) precision envelope, aligned with `points`.
fn envelope(points: &[PrPoint]) -> Vec<f64> {
    let mut env: Vec<f64> = points.iter().map(|p| p.precision).collect();
    for i in (0..env.len().saturating_sub(1)).rev() {
        env[i] = env[i].max(env[i + 1]);
    }
    env
}

pub fn average_precision(curve: &PrCurve, interpolation: Interpolation) -> f64 {
    if curve.points.is_empty() {
        return 0.0;
    }
    let env = envelope(&curve.points);
    match interpolation {
        Interpolation::AllPoints => {
            let mut prev_recall = 0.0;
            let mut area = 0.0;
            for (p, e) in curve.points.iter().zip(&env) {
                area += (p.recall - prev_recall) * e;
                prev_recall = p.recall;
            }
            area
        }
        Interpolation::Point101 => {
            // recall is non-decreasing, so the first point at or past r carries the envelope
            let mut idx = 0;
            let mut total = 0.0;
            for step in 0..=100 {
                let r = step as f64 / 100.0;
                while idx < curve.points.len() && curve.points[idx].recall < r {
                    idx += 1;
                }
                if idx < curve.points.len() {
                    total += env[idx];
                }
            }
            total / 101.0
        }
    }
}
