#![no_main]

use divlab::order_stats::{q_exact, Boundary};
use divlab::parse::parse_thresholds;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(c) = parse_thresholds(s) else { return };
    assert!(c.windows(2).all(|w| w[0] <= w[1]));
    if c.len() <= 64 {
        if let Ok(b) = Boundary::from_thresholds(c) {
            let q = q_exact(&b).unwrap();
            assert!((0.0..=1.0).contains(&q));
        }
    }
});
