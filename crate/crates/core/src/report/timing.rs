use serde::{Deserialize, Serialize};

use super::ReportError;

/// Per-image stage durations in milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingRecord {
    pub image_id: String,
    pub preprocess_ms: f64,
    pub inference_ms: f64,
    pub postprocess_ms: f64,
}

impl TimingRecord {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("preprocess_ms", self.preprocess_ms),
            ("inference_ms", self.inference_ms),
            ("postprocess_ms", self.postprocess_ms),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("{name} must be a nonnegative number, got {v}"));
            }
        }
        Ok(())
    }
}

/// Parses line-delimited JSON timing records. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_timing_jsonl(text: &str) -> Result<Vec<TimingRecord>, ReportError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let record: TimingRecord = serde_json::from_str(line).map_err(|e| ReportError::TimingUnreadable {
            line: i + 1,
            message: e.to_string(),
        })?;
        record
            .validate()
            .map_err(|message| ReportError::TimingUnreadable { line: i + 1, message })?;
        out.push(record);
    }
    Ok(out)
}

pub fn format_timing_jsonl(records: &[TimingRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
        .collect()
}

/// Stage means; `total_ms` is their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub count: usize,
    pub preprocess_ms: f64,
    pub inference_ms: f64,
    pub postprocess_ms: f64,
    pub total_ms: f64,
}

impl TimingSummary {
    /// A summary from already-aggregated stage values.
    pub fn from_stages(preprocess_ms: f64, inference_ms: f64, postprocess_ms: f64) -> Self {
        Self {
            count: 1,
            preprocess_ms,
            inference_ms,
            postprocess_ms,
            total_ms: preprocess_ms + inference_ms + postprocess_ms,
        }
    }
}

pub fn aggregate_timing(records: &[TimingRecord]) -> Result<TimingSummary, ReportError> {
    if records.is_empty() {
        return Err(ReportError::EmptyInput("no timing records".into()));
    }
    let n = records.len() as f64;
    let mean = |f: fn(&TimingRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
    let pre = mean(|r| r.preprocess_ms);
    let inf = mean(|r| r.inference_ms);
    let post = mean(|r| r.postprocess_ms);
    Ok(TimingSummary {
        count: records.len(),
        ..TimingSummary::from_stages(pre, inf, post)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, a: f64, b: f64, c: f64) -> TimingRecord {
        TimingRecord {
            image_id: id.into(),
            preprocess_ms: a,
            inference_ms: b,
            postprocess_ms: c,
        }
    }

    #[test]
    fn table_rows_sum() {
        let s = aggregate_timing(&[rec("a", 0.3, 5.3, 3.0)]).unwrap();
        assert!((s.total_ms - 8.6).abs() < 0.05);
        let s = aggregate_timing(&[rec("a", 0.3, 5.3, 4.5)]).unwrap();
        assert!((s.total_ms - 10.1).abs() < 0.05);
    }

    #[test]
    fn means_over_records() {
        let s = aggregate_timing(&[rec("a", 1.0, 4.0, 2.0), rec("b", 3.0, 6.0, 4.0)]).unwrap();
        assert_eq!(
            (s.preprocess_ms, s.inference_ms, s.postprocess_ms, s.total_ms),
            (2.0, 5.0, 3.0, 10.0)
        );
        assert_eq!(s.count, 2);
        assert!(matches!(aggregate_timing(&[]), Err(ReportError::EmptyInput(_))));
    }

    #[test]
    fn jsonl_ingest() {
        let text = "# adapter conf=0.001\n{\"image_id\":\"a\",\"preprocess_ms\":0.3,\"inference_ms\":5.3,\"postprocess_ms\":3.0}\n\n";
        let recs = parse_timing_jsonl(text).unwrap();
        assert_eq!(recs, vec![rec("a", 0.3, 5.3, 3.0)]);
        assert_eq!(parse_timing_jsonl(&format_timing_jsonl(&recs)).unwrap(), recs);

        let neg = "{\"image_id\":\"a\",\"preprocess_ms\":-1,\"inference_ms\":5.3,\"postprocess_ms\":3.0}";
        assert!(matches!(
            parse_timing_jsonl(neg),
            Err(ReportError::TimingUnreadable { line: 1, .. })
        ));
        assert!(parse_timing_jsonl("{\"image_id\":\"a\"}").is_err());
    }
}
