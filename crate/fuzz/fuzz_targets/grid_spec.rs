#![no_main]

use libfuzzer_sys::fuzz_target;
use semispectral::io::parse_grid_spec;

fuzz_target!(|bytes: &[u8]| {
    if let Ok(text) = std::str::from_utf8(bytes) {
        if let Ok(g) = parse_grid_spec(text) {
            assert!(g.edges().windows(2).all(|w| w[0] < w[1]));
        }
    }
});
