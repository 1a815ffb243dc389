#![no_main]

use libfuzzer_sys::fuzz_target;

use crr_core::probability::Alphabet;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let binary = Alphabet::binary("S");
        let ternary = Alphabet::new(
            "S",
            vec!["0".into(), "1".into(), "2".into()],
        )
        .expect("fixed alphabet is valid");
        let _ = crr_core::json::parse_distortion_json(text, &binary);
        let _ = crr_core::json::parse_distortion_json(text, &ternary);
    }
});
