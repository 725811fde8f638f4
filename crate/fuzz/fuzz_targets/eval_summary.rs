#![no_main]

use libfuzzer_sys::fuzz_target;
use visdet_core::eval::EvalSummary;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(summary) = EvalSummary::from_json(text) {
        let _ = summary.to_json();
    }
});
