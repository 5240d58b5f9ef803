#![no_main]

use divlab::parse::parse_geom;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(grid) = parse_geom(s) {
            assert!(!grid.is_empty());
            assert!(grid.iter().all(|y| y.is_finite() && *y > 0.0));
        }
    }
});
