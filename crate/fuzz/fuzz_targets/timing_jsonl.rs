#![no_main]

use libfuzzer_sys::fuzz_target;
use visdet_core::report::{aggregate_timing, format_timing_jsonl, parse_timing_jsonl};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(records) = parse_timing_jsonl(text) {
        assert_eq!(parse_timing_jsonl(&format_timing_jsonl(&records)).unwrap(), records);
        if let Ok(summary) = aggregate_timing(&records) {
            assert_eq!(summary.count, records.len());
        }
    }
});
