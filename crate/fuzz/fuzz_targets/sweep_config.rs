#![no_main]

use libfuzzer_sys::fuzz_target;
use sl2cont::config::parse_config;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = parse_config(text) {
            let _ = cfg.epsilons();
            let _ = cfg.parameters();
        }
    }
});
