//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (run with `--nocapture` to see them).
//!
//!   cargo test -p ipgg-cli --test acceptance -- --nocapture

use std::path::PathBuf;
use std::process::Command;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use ipgg::game::expand_profile;
use ipgg::sim::{self, OpponentGenerator};
use ipgg::{extortion, impossibility, markov, pinning, GameSpec, ReducedStrategy};

const PINNED_TOTAL: f64 = 2.302_439_024_390_243_9;

fn spec3() -> GameSpec {
    GameSpec::new(3, 1.6).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ipgg"))
}

fn temp_path(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ipgg-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn random_reduced(n: usize, rng: &mut ChaCha8Rng) -> ReducedStrategy {
    let pc = (0..n).map(|_| rng.random::<f64>()).collect();
    let pd = (0..n).map(|_| rng.random::<f64>()).collect();
    ReducedStrategy::new(pc, pd).unwrap()
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[test]
fn criterion_01_pinning_vector_reconstruction() {
    let spec = spec3();
    let strategy = pinning::pinning_strategy(&spec, 0.08, 0.31).unwrap();
    let full = strategy.expand(&spec, 1).unwrap();
    let reference = [0.08, 0.15, 0.15, 0.22, 0.17, 0.24, 0.24, 0.31];
    for (got, want) in full.probs().iter().zip(reference) {
        assert_eq!(round2(*got), want, "entry {got} rounds away from {want}");
    }
    let total = pinning::pinned_total(&spec, 0.08, 0.31).unwrap();
    assert!((total - PINNED_TOTAL).abs() <= 1e-9, "total {total}");

    // Same answer through the CLI.
    let out = bin()
        .args([
            "pin", "--n", "3", "--r", "1.6", "--pcc", "0.08", "--pdd", "0.31", "--format", "json",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let cli_full = value["full"].as_array().unwrap();
    for (got, want) in cli_full.iter().zip(reference) {
        assert_eq!(round2(got.as_f64().unwrap()), want);
    }
    assert!((value["pinned_total"].as_f64().unwrap() - PINNED_TOTAL).abs() <= 1e-9);
    println!("criterion 01 (reference pinning vector + pinned total): PASS");
}

#[test]
fn criterion_02_pinning_enforcement() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_260_202);
    for (n, factor) in [(3usize, 1.6), (4, 1.25)] {
        let spec = GameSpec::new(n, factor).unwrap();
        let region = pinning::feasible_region(&spec);
        let mut points = 0;
        while points < 100 {
            let p_cc = rng.random::<f64>();
            let p_dd = rng.random::<f64>();
            if !region.contains(p_cc, p_dd) {
                continue;
            }
            points += 1;
            let focal = pinning::pinning_strategy(&spec, p_cc, p_dd).unwrap();
            let target = pinning::pinned_total(&spec, p_cc, p_dd).unwrap();
            for _ in 0..10 {
                let mut profile = vec![focal.clone()];
                profile.extend((1..n).map(|_| random_reduced(n, &mut rng)));
                let full = expand_profile(&spec, &profile).unwrap();
                let m = markov::transition_matrix(&spec, &full).unwrap();
                assert!(m.regularity().is_regular, "profile must be regular");
                let payoffs = markov::expected_payoffs(&spec, &full).unwrap();
                let total: f64 = payoffs[1..].iter().sum();
                assert!(
                    (total - target).abs() < 1e-9,
                    "N={n} point ({p_cc}, {p_dd}): {total} vs {target}"
                );
            }
        }
    }
    println!("criterion 02 (pinning enforcement, 100 points x 10 profiles, N=3,4): PASS");
}

#[test]
fn criterion_03_monte_carlo_agreement() {
    let spec = spec3();
    let focal = pinning::pinning_strategy(&spec, 0.08, 0.31).unwrap();
    let dataset = sim::sweep(
        &spec,
        &focal,
        &OpponentGenerator::UniformRandomReduced,
        10_000,
        100_000,
        1000,
        20_260_303,
    )
    .unwrap();
    let target = PINNED_TOTAL / 2.0;
    let within = dataset
        .points
        .iter()
        .filter(|p| (p.mean_opponent_payoff - target).abs() <= 0.005)
        .count();
    let fraction = within as f64 / dataset.points.len() as f64;
    assert!(
        fraction >= 0.99,
        "only {within} of {} trials within 0.005 of {target}",
        dataset.points.len()
    );
    println!(
        "criterion 03 (monte carlo pinning, {:.2}% of trials within 0.005): PASS",
        fraction * 100.0
    );
}

#[test]
fn criterion_04_extortion_vector_and_fair_share() {
    let reference = [1.0, 0.9, 0.9, 0.8, 0.2, 0.1, 0.1, 0.0];
    let out = bin()
        .args([
            "extort", "--n", "3", "--r", "1.6", "--chi", "0.5", "--phi", "0.2", "--format", "json",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let full = value["full"].as_array().unwrap();
    assert_eq!(full.len(), 8);
    for (got, want) in full.iter().zip(reference) {
        assert!(
            (got.as_f64().unwrap() - want).abs() <= 1e-12,
            "{got} vs {want}"
        );
    }

    // chi(N-1) = 1: the extortioner exactly shares surplus with the mean
    // opponent, trial by trial.
    let spec = spec3();
    let focal = extortion::extortion_strategy(&spec, 0.5, 0.2).unwrap();
    let dataset = sim::analytic_sweep(
        &spec,
        &focal,
        &OpponentGenerator::UniformRandomReduced,
        200,
        20_260_404,
    )
    .unwrap();
    for p in &dataset.points {
        let focal_surplus = p.focal_payoff - 1.0;
        let mean_surplus = p.mean_opponent_payoff - 1.0;
        assert!(
            (focal_surplus - mean_surplus).abs() < 1e-9,
            "trial {}: {focal_surplus} vs {mean_surplus}",
            p.trial
        );
    }
    println!("criterion 04 (reference extortion vector + fair-share slope): PASS");
}

#[test]
fn criterion_05_chi_bounds() {
    let spec = spec3();
    let bounds = extortion::chi_bounds(&spec);
    assert_eq!(bounds.lower, 0.5);
    assert!((bounds.upper.unwrap() - 8.0).abs() <= 1e-12);

    // Valid exactly at the bound.
    let at_bound = extortion::extortion_strategy(&spec, 8.0, 0.05).unwrap();
    for &p in at_bound.pc().iter().chain(at_bound.pd()) {
        assert!((0.0..=1.0).contains(&p));
    }

    // Rejected just past it, naming the violated inequality.
    match extortion::extortion_strategy(&spec, 8.0 + 1e-6, 0.05) {
        Err(ipgg::Error::InfeasibleExtortion { constraint, .. }) => {
            assert!(constraint.contains("upper bound"), "{constraint}");
            assert!(constraint.contains("8.000000"), "{constraint}");
        }
        other => panic!("expected InfeasibleExtortion, got {other:?}"),
    }

    let out = bin()
        .args(["extort", "--n", "3", "--r", "1.6", "--chi", "9"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    println!("criterion 05 (chi bounds [0.5, 8], bound-edge behavior): PASS");
}

#[test]
fn criterion_06_bound_tables() {
    // Pinning factor cap: N/(N-2), monotone decreasing across 3..=64.
    let mut prev = f64::INFINITY;
    for n in 3..=64usize {
        let r_max = pinning::max_factor_for_pinning(n).unwrap();
        assert!((r_max - n as f64 / (n as f64 - 2.0)).abs() < 1e-12);
        assert!(r_max < prev, "cap must strictly decrease at N = {n}");
        prev = r_max;
    }

    // Effective extortion bound approaches r/(r-1).
    let limit = extortion::effective_ratio_limit(1.6).unwrap();
    assert!((limit - 8.0 / 3.0).abs() < 1e-12);
    let at_1000 = extortion::effective_ratio_bound(1000, 1.6)
        .unwrap()
        .unwrap();
    assert!(
        (at_1000 - limit).abs() < 0.01,
        "chi_max(N-1) at N=1000 is {at_1000}, limit {limit}"
    );
    println!("criterion 06 (factor cap and effective-ratio tables): PASS");
}

#[test]
fn criterion_07_region_grid_equivalence() {
    // Probability constraints vs. the analytic polygon on a 200 x 200 grid,
    // for 20 factors per player count spanning every regime.
    let grid = 200usize;
    for n in [3usize, 4, 5] {
        let nf = n as f64;
        let critical = nf / (nf - 1.0);
        let cap = nf / (nf - 2.0);
        let mut factors = Vec::new();
        for k in 1..=6 {
            factors.push(1.0 + (critical - 1.0) * k as f64 / 7.0);
        }
        factors.push(critical);
        let high_values = if cap < nf { 8 } else { 13 };
        for k in 1..=high_values {
            factors.push(critical + (cap - critical) * k as f64 / high_values as f64);
        }
        for k in 1..=(20 - factors.len()) {
            factors.push(cap + (nf - cap) * k as f64 / 6.0);
        }
        assert_eq!(factors.len(), 20);

        for &factor in &factors {
            let spec = GameSpec::new(n, factor).unwrap();
            let region = pinning::feasible_region(&spec);
            for i in 0..grid {
                for j in 0..grid {
                    let p_cc = i as f64 / (grid - 1) as f64;
                    let p_dd = j as f64 / (grid - 1) as f64;
                    if (p_cc - 1.0).abs() <= 1e-12 && p_dd.abs() <= 1e-12 {
                        continue;
                    }
                    let margin = match pinning::pinning_strategy(&spec, p_cc, p_dd) {
                        Ok(s) => s
                            .pc()
                            .iter()
                            .chain(s.pd())
                            .map(|&p| p.min(1.0 - p))
                            .fold(f64::INFINITY, f64::min),
                        Err(ipgg::Error::InfeasiblePinning { violation, .. }) => -violation,
                        Err(other) => panic!("unexpected error {other:?}"),
                    };
                    if margin.abs() <= 1e-9 {
                        continue;
                    }
                    assert_eq!(
                        margin > 0.0,
                        region.contains_closure(p_cc, p_dd),
                        "N={n} r={factor} point ({p_cc}, {p_dd}) margin {margin}"
                    );
                }
            }
        }
    }
    println!("criterion 07 (grid scan matches analytic region, N=3,4,5 x 20 factors): PASS");
}

#[test]
fn criterion_08_determinant_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_260_808);
    for n in [2usize, 3, 4] {
        let spec = GameSpec::new(n, 1.0 + 0.2 * n as f64).unwrap();
        for _ in 0..1000 {
            let profile = expand_profile(
                &spec,
                &(0..n)
                    .map(|_| random_reduced(n, &mut rng))
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            let m = markov::transition_matrix(&spec, &profile).unwrap();
            let v = m.stationary().unwrap();
            for player in 1..=n {
                let u = spec.payoff_vector(player).unwrap();
                let direct = v.dot(u.values());
                let via_det = markov::determinant_expectation(&spec, &profile, u.values()).unwrap();
                assert!(
                    (direct - via_det).abs() < 1e-9,
                    "N={n} player {player}: {direct} vs {via_det}"
                );
            }
        }
    }
    println!("criterion 08 (determinant ratio = eigen solve, 1000 profiles x N=2,3,4): PASS");
}

#[test]
fn criterion_09_impossibility() {
    // Own payoff cannot be pinned anywhere on the (N, r) grid.
    for n in 2..=16usize {
        for k in 0..50 {
            let r = 1.0 + (n as f64 - 1.0) * (k as f64 + 0.5) / 50.0;
            let spec = GameSpec::new(n, r).unwrap();
            assert!(!impossibility::self_pin_feasibility(&spec).feasible);
        }
    }

    // Two controllers cannot reach the single-opponent pinning target...
    let spec = spec3();
    let params = pinning::pinning_params(&spec, 0.08, 0.31).unwrap();
    let pair_alphas = [0.0, 0.0, params.mu(), params.xi()];
    let report =
        impossibility::collusion_feasibility(&spec, &pair_alphas, 1000, 20_260_909).unwrap();
    assert!(!report.consistent);
    assert!(report.residual > 1e-3, "residual {}", report.residual);

    // ...while the single-column positive control lands on the exact
    // pinning strategy.
    let single_alphas = [0.0, params.mu(), params.mu(), params.xi()];
    let control =
        impossibility::single_control_feasibility(&spec, &single_alphas, 8, 20_260_909).unwrap();
    assert!(control.consistent);
    assert!(control.residual < 1e-9, "residual {}", control.residual);
    println!(
        "criterion 09 (self-pin infeasible on 15x50 grid; collusion residual {:.3} > 1e-3; control {:.1e} < 1e-9): PASS",
        report.residual, control.residual
    );
}

#[test]
fn criterion_10_sweep_determinism() {
    let args = |path: &PathBuf| {
        vec![
            "sweep".to_string(),
            "--n".into(),
            "3".into(),
            "--r".into(),
            "1.6".into(),
            "--focal".into(),
            "pin:0.08,0.31".into(),
            "--opponents".into(),
            "uniform".into(),
            "--trials".into(),
            "300".into(),
            "--rounds".into(),
            "3000".into(),
            "--discard".into(),
            "100".into(),
            "--seed".into(),
            "99".into(),
            "--output".into(),
            path.display().to_string(),
        ]
    };
    let mut bodies = Vec::new();
    for (k, threads) in ["1", "8", "8"].iter().enumerate() {
        let path = temp_path(&format!("determinism-{k}.csv"));
        let out = bin()
            .args(args(&path))
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        bodies.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(
        bodies[0], bodies[1],
        "single- vs multi-threaded runs differ"
    );
    assert_eq!(bodies[1], bodies[2], "repeat runs differ");
    println!("criterion 10 (byte-identical sweep CSVs across runs and thread counts): PASS");
}
