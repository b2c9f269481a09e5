#![no_main]

use libfuzzer_sys::fuzz_target;
use semispectral::analysis::dini_check;
use semispectral::io::{dini_to_csv, parse_dini_csv};

fuzz_target!(|bytes: &[u8]| {
    let Ok(text) = std::str::from_utf8(bytes) else {
        return;
    };
    if let Ok(t) = parse_dini_csv(text) {
        let _ = dini_check(&t.rows, t.points.as_deref(), 1e-9);
        if let Some(points) = &t.points {
            let again = parse_dini_csv(&dini_to_csv(points, &t.rows)).expect("re-parse of own output");
            assert_eq!(again.rows, t.rows);
        }
    }
});
