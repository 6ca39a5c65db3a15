#![no_main]

use libfuzzer_sys::fuzz_target;
use sl2cont::config::{parse_spectrum, spectrum_to_json};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spec) = parse_spectrum(text) {
            assert_eq!(parse_spectrum(&spectrum_to_json(&spec)).unwrap(), spec);
        }
    }
});
