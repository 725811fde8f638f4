#![no_main]

use libfuzzer_sys::fuzz_target;
use visdet_core::spectral::{format_lut_asset, parse_lut_asset};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(asset) = parse_lut_asset(text) {
        let back = parse_lut_asset(&format_lut_asset("fuzz", &asset.provenance, &asset.lut)).unwrap();
        assert_eq!(back.lut, asset.lut);
        assert_eq!(back.sha256, asset.sha256);
    }
});
