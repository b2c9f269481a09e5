#![no_main]

use libfuzzer_sys::fuzz_target;
use semispectral::io::parse_triplet;

fuzz_target!(|bytes: &[u8]| {
    if let Ok(text) = std::str::from_utf8(bytes) {
        let _ = parse_triplet(text);
    }
});
