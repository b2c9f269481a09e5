#![no_main]

use libfuzzer_sys::fuzz_target;
use semispectral::io::{parse_povm, povm_to_json, to_json_string};

fuzz_target!(|bytes: &[u8]| {
    let Ok(text) = std::str::from_utf8(bytes) else {
        return;
    };
    if let Ok(f) = parse_povm(text) {
        // Anything accepted must serialize and parse back.
        let again = to_json_string(&povm_to_json(&f)).expect("serializable");
        parse_povm(&again).expect("re-parse of own output");
    }
});
