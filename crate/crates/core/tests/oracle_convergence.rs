//! Monte Carlo vs. analytic agreement: the empirical engine converges to
//! the stationary solve at the statistical rate.

use ipgg::sim::{self, OpponentGenerator};
use ipgg::{markov, pinning, GameSpec, ReducedStrategy, StateIndex};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn random_reduced(n: usize, rng: &mut ChaCha8Rng) -> ReducedStrategy {
    let pc = (0..n).map(|_| rng.random::<f64>()).collect();
    let pd = (0..n).map(|_| rng.random::<f64>()).collect();
    ReducedStrategy::new(pc, pd).unwrap()
}

#[test]
fn long_run_empirical_frequency_matches_stationary_solve() {
    // The pinned total of the reference point, reproduced by a 10^7-step
    // simulated match against unconditional cooperators.
    let spec = GameSpec::new(3, 1.6).unwrap();
    let focal = pinning::pinning_strategy(&spec, 0.08, 0.31).unwrap();
    let profile = vec![
        focal,
        ReducedStrategy::always_cooperate(3),
        ReducedStrategy::always_cooperate(3),
    ];
    let payoffs = sim::play_match(
        &spec,
        &profile,
        10_000_000,
        1000,
        20_260_808,
        StateIndex(spec.state_count() - 1),
    )
    .unwrap();
    let total = payoffs[1] + payoffs[2];
    assert!(
        (total - 2.302_439_024_390_243_9).abs() < 1e-3,
        "empirical opponent total {total}"
    );
}

#[test]
fn error_decays_at_the_square_root_rate() {
    // Mean absolute error against the analytic payoffs at three round
    // budgets; the log-log slope should sit near -1/2.
    let spec = GameSpec::new(3, 1.6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31_337);
    let profiles: Vec<Vec<ReducedStrategy>> = (0..20)
        .map(|_| (0..3).map(|_| random_reduced(3, &mut rng)).collect())
        .collect();

    let budgets = [10_000u64, 100_000, 1_000_000];
    let mut mean_errors = Vec::new();
    for &rounds in &budgets {
        let mut total_error = 0.0;
        let mut count = 0;
        for (k, profile) in profiles.iter().enumerate() {
            let full: Vec<_> = profile
                .iter()
                .enumerate()
                .map(|(x, s)| s.expand(&spec, x + 1).unwrap())
                .collect();
            let analytic = markov::expected_payoffs(&spec, &full).unwrap();
            let empirical = sim::play_match(
                &spec,
                profile,
                rounds,
                1000,
                977 + k as u64,
                StateIndex(spec.state_count() - 1),
            )
            .unwrap();
            for (e, a) in empirical.iter().zip(&analytic) {
                total_error += (e - a).abs();
                count += 1;
            }
        }
        mean_errors.push(total_error / count as f64);
    }

    let xs: Vec<f64> = budgets.iter().map(|&r| (r as f64).ln()).collect();
    let ys: Vec<f64> = mean_errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let slope: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum::<f64>()
        / xs.iter().map(|x| (x - mean_x).powi(2)).sum::<f64>();
    assert!(
        (-0.6..=-0.4).contains(&slope),
        "convergence slope {slope}, errors {mean_errors:?}"
    );
}

#[test]
fn simulated_sweep_tracks_analytic_sweep() {
    // Same seeds draw the same opponents, so per-trial differences are pure
    // Monte Carlo noise.
    let spec = GameSpec::new(3, 1.6).unwrap();
    let focal = pinning::pinning_strategy(&spec, 0.08, 0.31).unwrap();
    let gen = OpponentGenerator::UniformRandomReduced;
    let simulated = sim::sweep(&spec, &focal, &gen, 20, 200_000, 1000, 5).unwrap();
    let analytic = sim::analytic_sweep(&spec, &focal, &gen, 20, 5).unwrap();
    for (s, a) in simulated.points.iter().zip(&analytic.points) {
        assert_eq!(s.trial, a.trial);
        assert!(
            (s.mean_opponent_payoff - a.mean_opponent_payoff).abs() < 0.02,
            "trial {}: {} vs {}",
            s.trial,
            s.mean_opponent_payoff,
            a.mean_opponent_payoff
        );
    }
}
