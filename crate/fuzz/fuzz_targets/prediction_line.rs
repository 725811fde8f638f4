#![no_main]

use libfuzzer_sys::fuzz_target;
use visdet_core::corpus::{format_predictions, parse_prediction_line, ParseOptions};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let opts = ParseOptions::new(7);
    if let Ok(rec) = parse_prediction_line(text, 1, &opts) {
        assert!((0.0..=1.0).contains(&rec.confidence));
        let written = format_predictions(&[rec]);
        if let Ok(back) = parse_prediction_line(written.trim_end(), 1, &opts) {
            assert_eq!(back.class_id, rec.class_id);
            assert!((back.confidence - rec.confidence).abs() <= 1e-6);
        }
    }
});
