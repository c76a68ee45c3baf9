#![no_main]

use libfuzzer_sys::fuzz_target;
use strichartz::io::{datum_to_json, parse_datum_json};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(state) = parse_datum_json(text) {
            let again = parse_datum_json(&datum_to_json(&state)).expect("serialized datum parses");
            assert_eq!(again, state);
        }
    }
});
