#![no_main]

use libfuzzer_sys::fuzz_target;
use semispectral::io::parse_reports;

fuzz_target!(|bytes: &[u8]| {
    if let Ok(text) = std::str::from_utf8(bytes) {
        if let Ok(reports) = parse_reports(text) {
            for r in &reports {
                let _ = r.to_csv();
            }
        }
    }
});
