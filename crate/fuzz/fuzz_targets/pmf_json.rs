#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // parsing untrusted documents must never panic; errors are fine
        let _ = crr_core::json::parse_pmf_json(text);
    }
});
