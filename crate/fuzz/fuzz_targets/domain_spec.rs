#![no_main]

use libfuzzer_sys::fuzz_target;
use semispectral::kernels::TailPolicy;
use semispectral::suite::{parse_domain, Property};

fuzz_target!(|bytes: &[u8]| {
    if let Ok(text) = std::str::from_utf8(bytes) {
        let _ = parse_domain(text);
        let _ = text.parse::<Property>();
        let _ = text.parse::<TailPolicy>();
    }
});
