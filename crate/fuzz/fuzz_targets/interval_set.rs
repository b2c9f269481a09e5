#![no_main]

use libfuzzer_sys::fuzz_target;
use semispectral::kernels::IntervalSet;

fuzz_target!(|bytes: &[u8]| {
    let Ok(text) = std::str::from_utf8(bytes) else {
        return;
    };
    if let Ok(s) = text.parse::<IntervalSet>() {
        let back: IntervalSet = s.to_string().parse().expect("display output parses");
        assert_eq!(back, s);
    }
});
