//! The fuzz targets' invariants, driven by proptest so they run on stable.

use divlab::order_stats::{q_exact, Boundary};
use divlab::parse::{parse_count, parse_geom, parse_rational, parse_real, parse_thresholds};
use proptest::prelude::*;

const NUMBER: &str = "[+-]?[0-9]{0,6}(\\.[0-9]{0,4})?([eE][+-]?[0-9]{1,4})?";

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn count_roundtrip(s in NUMBER) {
        if let Ok(n) = parse_count(&s) {
            prop_assert_eq!(parse_count(&n.to_string()), Ok(n));
        }
    }

    #[test]
    fn count_matches_u64_for_plain_integers(n: u64) {
        prop_assert_eq!(parse_count(&n.to_string()), Ok(n));
    }

    #[test]
    fn real_is_finite(s in NUMBER) {
        if let Ok(x) = parse_real(&s) {
            prop_assert!(x.is_finite());
        }
    }

    #[test]
    fn rational_roundtrip(s in "[+-]?[0-9]{1,5}(\\.[0-9]{0,3})?(e-?[0-9]{1,2})?(/[0-9]{1,4})?") {
        if let Ok(q) = parse_rational(&s) {
            prop_assert_eq!(parse_rational(&q.to_string()), Ok(q));
        }
    }

    #[test]
    fn geom_points_finite_and_monotone(lo in NUMBER, hi in NUMBER, steps in 0u64..50) {
        if let Ok(g) = parse_geom(&format!("{lo}:{hi}:{steps}")) {
            prop_assert_eq!(g.len() as u64, steps);
            prop_assert!(g.iter().all(|y| y.is_finite() && *y > 0.0));
            prop_assert!(g.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn thresholds_feed_exact_probability(xs in proptest::collection::vec(NUMBER, 1..12)) {
        if let Ok(c) = parse_thresholds(&xs.join(",")) {
            prop_assert!(c.windows(2).all(|w| w[0] <= w[1]));
            let q = q_exact(&Boundary::from_thresholds(c).unwrap()).unwrap();
            prop_assert!((0.0..=1.0).contains(&q));
        }
    }

    #[test]
    fn arbitrary_text_never_panics(s in "\\PC{0,24}") {
        let _ = parse_count(&s);
        let _ = parse_real(&s);
        let _ = parse_rational(&s);
        let _ = parse_geom(&s);
        let _ = parse_thresholds(&s);
    }
}

#[test]
fn geom_extreme_range() {
    let g = parse_geom("1e-300:1e300:7").unwrap();
    assert_eq!(g[0], 1e-300);
    assert_eq!(g[6], 1e300);
    assert!(g.iter().all(|y| y.is_finite()));
    assert!((g[3] - 1.0).abs() < 1e-9);
}
