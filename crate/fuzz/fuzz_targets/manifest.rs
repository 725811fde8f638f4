#![no_main]

use libfuzzer_sys::fuzz_target;
use visdet_core::corpus::ManifestDoc;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = ManifestDoc::from_toml_str(text) {
        let again = ManifestDoc::from_toml_str(&doc.to_toml_string()).expect("written manifest parses");
        assert_eq!(again, doc);
    }
});
