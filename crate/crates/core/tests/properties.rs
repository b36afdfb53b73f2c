//! Property tests over the stage-game model and strategy expansion.

use ipgg::markov;
use ipgg::{GameSpec, ReducedStrategy, StateIndex};
use proptest::prelude::*;

fn arb_spec() -> impl Strategy<Value = GameSpec> {
    (2usize..=5).prop_flat_map(|n| {
        (Just(n), 1.001..(n as f64)).prop_map(|(n, r)| GameSpec::new(n, r).unwrap())
    })
}

fn arb_reduced(n: usize) -> impl Strategy<Value = ReducedStrategy> {
    (
        proptest::collection::vec(0.0f64..=1.0, n),
        proptest::collection::vec(0.0f64..=1.0, n),
    )
        .prop_map(|(pc, pd)| ReducedStrategy::new(pc, pd).unwrap())
}

fn arb_spec_and_profile() -> impl Strategy<Value = (GameSpec, Vec<ReducedStrategy>)> {
    (2usize..=5).prop_flat_map(|n| {
        (
            (Just(n), 1.001..(n as f64)).prop_map(|(n, r)| GameSpec::new(n, r).unwrap()),
            proptest::collection::vec(arb_reduced(n), n),
        )
    })
}

proptest! {
    #[test]
    fn state_indexing_round_trips(spec in arb_spec(), raw in 0usize..1024) {
        let state = StateIndex(raw % spec.state_count());
        let actions = spec.state_actions(state);
        prop_assert_eq!(spec.state_index(&actions).unwrap(), state);
    }

    #[test]
    fn expansion_ignores_opponent_identity((spec, profile) in arb_spec_and_profile()) {
        // Permuting which opponents cooperate (same count) never changes the
        // expanded probability.
        let n = spec.n_players();
        let reduced = &profile[0];
        for player in 1..=n {
            let full = reduced.expand(&spec, player).unwrap();
            for i in 0..spec.state_count() {
                for j in 0..spec.state_count() {
                    let s = StateIndex(i);
                    let t = StateIndex(j);
                    let same_own = spec.player_cooperates(s, player)
                        == spec.player_cooperates(t, player);
                    let same_count = spec.opponent_cooperators(s, player).unwrap()
                        == spec.opponent_cooperators(t, player).unwrap();
                    if same_own && same_count {
                        prop_assert_eq!(full.get(s), full.get(t));
                    }
                }
            }
        }
    }

    #[test]
    fn transition_rows_are_distributions((spec, profile) in arb_spec_and_profile()) {
        let full: Vec<_> = profile
            .iter()
            .enumerate()
            .map(|(x, s)| s.expand(&spec, x + 1).unwrap())
            .collect();
        let m = markov::transition_matrix(&spec, &full).unwrap();
        for i in 0..m.size() {
            let sum: f64 = m.row(i).iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(m.row(i).iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
    }

    #[test]
    fn group_payoff_conserved(spec in arb_spec()) {
        let n = spec.n_players();
        let payoffs: Vec<_> = (1..=n).map(|p| spec.payoff_vector(p).unwrap()).collect();
        for i in 0..spec.state_count() {
            let state = StateIndex(i);
            let coop = spec.total_cooperators(state) as f64;
            let total: f64 = payoffs.iter().map(|u| u.get(state)).sum();
            let expected = spec.factor() * coop + (n as f64 - coop);
            prop_assert!((total - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn pinning_strategies_monotone_by_regime(
        n in 3usize..=6,
        r_frac in 0.05f64..0.95,
        p_cc in 0.0f64..1.0,
        p_dd in 0.0f64..1.0,
    ) {
        // Below the critical factor entries increase with the cooperator
        // count, above it they decrease.
        use ipgg::pinning;
        for (factor, increasing) in [
            (1.0 + (n as f64 / (n as f64 - 1.0) - 1.0) * r_frac, true),
            (
                n as f64 / (n as f64 - 1.0)
                    + (n as f64 / (n as f64 - 2.0) - n as f64 / (n as f64 - 1.0)) * r_frac,
                false,
            ),
        ] {
            let spec = GameSpec::new(n, factor).unwrap();
            if let Ok(s) = pinning::pinning_strategy(&spec, p_cc, p_dd) {
                for w in s.pc().windows(2).chain(s.pd().windows(2)) {
                    if increasing {
                        prop_assert!(w[1] >= w[0] - 1e-9);
                    } else {
                        prop_assert!(w[1] <= w[0] + 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn extortion_entries_affine_with_common_slope(
        chi_frac in 0.0f64..=1.0,
        phi_frac in 0.01f64..=1.0,
    ) {
        use ipgg::extortion;
        let spec = GameSpec::new(3, 1.6).unwrap();
        let bounds = extortion::chi_bounds(&spec);
        let chi = bounds.lower + (bounds.upper.unwrap() - bounds.lower) * chi_frac;
        let phi = extortion::phi_max(&spec, chi).unwrap() * phi_frac;
        let s = extortion::extortion_strategy(&spec, chi, phi).unwrap();
        prop_assert_eq!(s.pd()[0], 0.0);
        let slope = s.pd()[1] - s.pd()[0];
        for w in s.pc().windows(2).chain(s.pd().windows(2)) {
            prop_assert!((w[1] - w[0] - slope).abs() < 1e-9);
        }
    }
}
