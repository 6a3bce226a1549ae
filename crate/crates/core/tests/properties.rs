mod support;

use proptest::prelude::*;
use support::props::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn preimages_round_trip(fam in family(), w in point()) {
        support::props::preimages_round_trip(fam, w)?;
    }

    #[test]
    fn chart_consistency_under_inversion(fam in family(), z in point()) {
        support::props::chart_consistency_under_inversion(fam, z)?;
    }

    #[test]
    fn multiplier_chain_rule(fam in family(), seed in any::<u64>(), n in 1usize..12) {
        support::props::multiplier_chain_rule(fam, seed, n)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn exclusion_is_monotone(seed in any::<u64>(), r in 0.05f64..0.5, t in -2.0f64..2.0) {
        support::props::exclusion_is_monotone(seed, r, t)?;
    }

    #[test]
    fn pressure_curve_is_convex(fam in family(), seed in any::<u64>(), step in 0.1f64..0.5) {
        support::props::pressure_curve_is_convex(fam, seed, step)?;
    }

    #[test]
    fn alpha_times_spectrum_is_concave(fam in family(), seed in any::<u64>()) {
        support::props::alpha_times_spectrum_is_concave(fam, seed)?;
    }

    #[test]
    fn restriction_identity_atomwise(seed in any::<u64>(), r in 0.02f64..0.3, k in 0.1f64..0.9, t in -2.0f64..1.0) {
        support::props::restriction_identity_atomwise(seed, r, k, t)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn fixed_seeds_are_deterministic(seed in any::<u64>(), fam in family()) {
        support::props::fixed_seeds_are_deterministic(seed, fam)?;
    }
}
