#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = crr_core::json::parse_mass_str(text);
        if let Ok(value) = serde_json::from_str::<serde_json::Value>(text) {
            let _ = crr_core::json::parse_mass_value(&value);
        }
    }
});
