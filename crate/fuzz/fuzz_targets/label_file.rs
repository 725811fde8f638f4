#![no_main]

use libfuzzer_sys::fuzz_target;
use visdet_core::corpus::{parse_annotation_text, parse_prediction_text, ParseOptions};

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let opts = ParseOptions::new(3);
    let lines = parse_annotation_text(&text, &opts);
    for err in lines.iter().filter_map(|r| r.as_ref().err()) {
        // every line-level error points at a real line
        let line = err.line().expect("line-level error");
        assert!(line >= 1 && line <= text.lines().count());
    }
    let _ = parse_prediction_text(&text, &opts);
});
