#![no_main]

use divlab::parse::parse_real;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(x) = parse_real(s) {
            assert!(x.is_finite());
        }
    }
});
