#![no_main]

use divlab::parse::parse_count;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(n) = parse_count(s) {
            // plain decimal output must parse back to the same value
            assert_eq!(parse_count(&n.to_string()).ok(), Some(n));
        }
    }
});
