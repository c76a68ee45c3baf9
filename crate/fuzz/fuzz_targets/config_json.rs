#![no_main]

use libfuzzer_sys::fuzz_target;
use strichartz::io::parse_config_json;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(config) = parse_config_json(text) {
            assert!(config.validate().is_ok());
        }
    }
});
