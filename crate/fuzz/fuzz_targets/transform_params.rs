#![no_main]

use libfuzzer_sys::fuzz_target;
use visdet_core::spectral::TransformParams;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(params) = TransformParams::from_toml_str(text) {
        params.night.validate().unwrap();
        params.obscura.validate().unwrap();
    }
});
