#![no_main]

use libfuzzer_sys::fuzz_target;
use visdet_core::corpus::{format_annotations, parse_annotation_line, ParseOptions};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let opts = ParseOptions::new(7);
    if let Ok(rec) = parse_annotation_line(text, 1, &opts) {
        let written = format_annotations(&[rec]);
        // sizes below half a millionth print as zero and are rejected
        if let Ok(back) = parse_annotation_line(written.trim_end(), 1, &opts) {
            assert_eq!(back.class_id, rec.class_id);
            assert!((back.bbox.cx - rec.bbox.cx).abs() <= 2e-6);
            assert!((back.bbox.cy - rec.bbox.cy).abs() <= 2e-6);
            assert!((back.bbox.w - rec.bbox.w).abs() <= 2e-6);
            assert!((back.bbox.h - rec.bbox.h).abs() <= 2e-6);
        } else {
            assert!(rec.bbox.w < 1e-6 || rec.bbox.h < 1e-6);
        }
    }
});
