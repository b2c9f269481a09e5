#![no_main]

use libfuzzer_sys::fuzz_target;
use semispectral::reconstruction::Label;

fuzz_target!(|bytes: &[u8]| {
    let Ok(text) = std::str::from_utf8(bytes) else {
        return;
    };
    // Keep big-integer parsing cheap.
    if text.len() > 4096 {
        return;
    }
    if let Ok(l) = text.parse::<Label>() {
        assert_eq!(l.to_string().parse::<Label>().expect("display output parses"), l);
    }
});
