//! The seven subcommands. Each resolves its parameters (flags over config
//! file over defaults), computes through the library, and emits CSV or JSON
//! through [`crate::output`].

use std::path::PathBuf;

use serde_json::{json, Value};

use ipgg::sim::{self, SweepDataset};
use ipgg::{extortion, impossibility, markov, pinning, GameSpec, ReducedStrategy};

use crate::config::{parse_n_range, pick, require, Resolved};
use crate::output::{emit, fmt_f64, meta, Csv};
use crate::strategy_spec;
use crate::{CommonArgs, Failure, EXIT_CHECK_FAILED};

const DEFAULT_DISCARD: u64 = 1000;

pub fn region(common: &CommonArgs) -> Result<(), Failure> {
    let resolved = Resolved::new(common)?;
    let spec = resolved.game_spec()?;
    let region = pinning::feasible_region(&spec);
    let bounds = pinning::pinning_bounds(&spec).ok();

    let mut csv = Csv::new(&["p_cc", "p_dd", "vertex_order"]);
    for (k, v) in region.vertices().iter().enumerate() {
        csv.row(&[fmt_f64(v[0]), fmt_f64(v[1]), k.to_string()]);
    }

    let note = (region.case() == pinning::RegionCase::CriticalR).then_some({
        "payoff bounds at the critical factor are continuity limits; \
         the attainable set is the open interval over the control-line slope"
    });
    // The CSV body holds only the vertex table, so the case tag, exclusions,
    // and bounds ride along in the metadata sidecar.
    let params = json!({
        "n": spec.n_players(),
        "r": spec.factor(),
        "case": region.case().label(),
        "excluded_points": region.excluded_points(),
        "pinned_total_bounds": bounds.map(|(lo, hi)| vec![lo, hi]),
        "note": note,
    });
    let json_value = json!({
        "case": region.case().label(),
        "vertices": region.vertices(),
        "excluded_points": region.excluded_points(),
        "pinned_total_bounds": bounds.map(|(lo, hi)| vec![lo, hi]),
        "note": note,
    });
    let meta = meta("region", &resolved, params, Some(&spec));
    emit(&resolved, csv.finish(), json_value, meta)
}

pub fn pin(common: &CommonArgs, pcc: Option<f64>, pdd: Option<f64>) -> Result<(), Failure> {
    let resolved = Resolved::new(common)?;
    let spec = resolved.game_spec()?;
    let p_cc = require(pick(pcc, resolved.file.pcc), "pcc")?;
    let p_dd = require(pick(pdd, resolved.file.pdd), "pdd")?;

    let params = pinning::pinning_params(&spec, p_cc, p_dd)?;
    let strategy = pinning::pinning_strategy(&spec, p_cc, p_dd)?;
    let full = strategy.expand(&spec, 1)?;
    let total = pinning::pinned_total(&spec, p_cc, p_dd)?;

    let csv = strategy_csv(
        &strategy,
        &full,
        &[
            ("mu", params.mu()),
            ("xi", params.xi()),
            ("gamma", params.gamma()),
            ("pinned_total", total),
        ],
    );
    let cli_params = json!({ "n": spec.n_players(), "r": spec.factor(), "pcc": p_cc, "pdd": p_dd });
    let json_value = json!({
        "reduced": strategy,
        "full": full.probs(),
        "mu": params.mu(),
        "xi": params.xi(),
        "gamma": if params.gamma().is_finite() { Value::from(params.gamma()) } else { Value::Null },
        "pinned_total": total,
    });
    let meta = meta("pin", &resolved, cli_params, Some(&spec));
    emit(&resolved, csv, json_value, meta)
}

pub fn extort(common: &CommonArgs, chi: Option<f64>, phi: Option<f64>) -> Result<(), Failure> {
    let resolved = Resolved::new(common)?;
    let spec = resolved.game_spec()?;
    let chi = require(pick(chi, resolved.file.chi), "chi")?;
    let phi = match pick(phi, resolved.file.phi) {
        Some(phi) => phi,
        None => extortion::default_phi(&spec, chi)?,
    };

    let bounds = extortion::chi_bounds(&spec);
    let phi_max = extortion::phi_max(&spec, chi)?;
    let strategy = extortion::extortion_strategy(&spec, chi, phi)?;
    let full = strategy.expand(&spec, 1)?;
    let effective = chi * (spec.n_players() as f64 - 1.0);

    let csv = strategy_csv(
        &strategy,
        &full,
        &[
            ("chi", chi),
            ("phi", phi),
            ("phi_max", phi_max),
            ("effective_ratio", effective),
        ],
    );
    let cli_params = json!({ "n": spec.n_players(), "r": spec.factor(), "chi": chi, "phi": phi });
    let json_value = json!({
        "reduced": strategy,
        "full": full.probs(),
        "chi": chi,
        "phi": phi,
        "phi_max": phi_max,
        "chi_bounds": { "lower": bounds.lower, "upper": bounds.upper },
        "effective_ratio": effective,
    });
    let meta = meta("extort", &resolved, cli_params, Some(&spec));
    emit(&resolved, csv, json_value, meta)
}

fn strategy_csv(
    strategy: &ReducedStrategy,
    full: &ipgg::FullStrategy,
    scalars: &[(&str, f64)],
) -> String {
    let mut csv = Csv::new(&["field", "index", "value"]);
    for (n, &p) in strategy.pc().iter().enumerate() {
        csv.row(&["pc".into(), n.to_string(), fmt_f64(p)]);
    }
    for (n, &p) in strategy.pd().iter().enumerate() {
        csv.row(&["pd".into(), n.to_string(), fmt_f64(p)]);
    }
    for (i, &p) in full.probs().iter().enumerate() {
        csv.row(&["full".into(), i.to_string(), fmt_f64(p)]);
    }
    for (name, value) in scalars {
        csv.row(&[(*name).into(), String::new(), fmt_f64(*value)]);
    }
    csv.finish()
}

pub fn payoff(common: &CommonArgs, profile: Option<PathBuf>, verify: bool) -> Result<(), Failure> {
    let resolved = Resolved::new(common)?;
    let spec = resolved.game_spec()?;
    let path = require(pick(profile, resolved.file.profile.clone()), "profile")?;
    let verify = verify || resolved.file.verify.unwrap_or(false);

    let reduced = strategy_spec::parse_profile(&spec, &path)?;
    let full = ipgg::game::expand_profile(&spec, &reduced)?;
    let payoffs = markov::expected_payoffs(&spec, &full)?;

    let verification = if verify {
        let mut max_diff = 0.0f64;
        for (x, &e) in payoffs.iter().enumerate() {
            let u = spec.payoff_vector(x + 1)?;
            let via_det = markov::determinant_expectation(&spec, &full, u.values())?;
            max_diff = max_diff.max((via_det - e).abs());
        }
        Some(max_diff)
    } else {
        None
    };

    let mut csv = Csv::new(&["player", "expected_payoff"]);
    for (x, &e) in payoffs.iter().enumerate() {
        csv.row(&[(x + 1).to_string(), fmt_f64(e)]);
    }
    let cli_params = json!({
        "n": spec.n_players(),
        "r": spec.factor(),
        "profile": path.display().to_string(),
        "verify": verify,
    });
    let json_value = json!({
        "expected_payoffs": payoffs,
        "determinant_cross_check_max_diff": verification,
    });
    let meta = meta("payoff", &resolved, cli_params, Some(&spec));
    emit(&resolved, csv.finish(), json_value, meta)
}

#[allow(clippy::too_many_arguments)]
pub fn sweep(
    common: &CommonArgs,
    focal: Option<String>,
    opponents: Option<String>,
    trials: Option<u64>,
    rounds: Option<u64>,
    discard: Option<u64>,
    analytic: bool,
) -> Result<(), Failure> {
    let resolved = Resolved::new(common)?;
    let spec = resolved.game_spec()?;
    let focal_text = require(pick(focal, resolved.file.focal.clone()), "focal")?;
    let opponent_text =
        pick(opponents, resolved.file.opponents.clone()).unwrap_or_else(|| "uniform".into());
    let trials = require(pick(trials, resolved.file.trials), "trials")?;
    let seed = resolved.require_seed()?;
    let analytic = analytic || resolved.file.analytic.unwrap_or(false);

    let focal = strategy_spec::parse_focal(&spec, &focal_text)?;
    let generator = strategy_spec::parse_generator(&opponent_text)?;

    let dataset = if analytic {
        sim::analytic_sweep(&spec, &focal, &generator, trials, seed)?
    } else {
        let rounds = require(pick(rounds, resolved.file.rounds), "rounds")?;
        let discard = pick(discard, resolved.file.discard).unwrap_or(DEFAULT_DISCARD);
        sim::sweep(&spec, &focal, &generator, trials, rounds, discard, seed)?
    };

    let cli_params = json!({
        "n": spec.n_players(),
        "r": spec.factor(),
        "focal": focal_text,
        "opponents": opponent_text,
        "trials": trials,
        "rounds": if analytic { Value::Null } else { Value::from(dataset.meta.rounds) },
        "discard": if analytic { Value::Null } else { Value::from(dataset.meta.discard) },
        "analytic": analytic,
    });
    let meta = meta("sweep", &resolved, cli_params, Some(&spec));
    emit(
        &resolved,
        sweep_csv(&dataset),
        serde_json::to_value(&dataset).expect("dataset serializes"),
        meta,
    )
}

fn sweep_csv(dataset: &SweepDataset) -> String {
    let mut csv = Csv::new(&["trial", "focal_payoff", "mean_opponent_payoff"]);
    for p in &dataset.points {
        csv.row(&[
            p.trial.to_string(),
            fmt_f64(p.focal_payoff),
            fmt_f64(p.mean_opponent_payoff),
        ]);
    }
    csv.finish()
}

pub fn bounds(
    common: &CommonArgs,
    mode: Option<String>,
    n_range: Option<String>,
) -> Result<(), Failure> {
    let resolved = Resolved::new(common)?;
    let mode = require(pick(mode, resolved.file.mode.clone()), "mode")?;
    let range_text = require(pick(n_range, resolved.file.n_range.clone()), "n-range")?;
    let (lo, hi) = parse_n_range(&range_text)?;

    match mode.as_str() {
        "pin" => {
            let mut csv = Csv::new(&["n_players", "r_max"]);
            let mut rows = Vec::new();
            for n in lo..=hi {
                let r_max = pinning::max_factor_for_pinning(n)?;
                csv.row(&[n.to_string(), fmt_f64(r_max)]);
                rows.push(json!({ "n_players": n, "r_max": r_max }));
            }
            let params = json!({ "mode": "pin", "n_range": range_text });
            let json_value = json!({ "rows": rows });
            let meta = meta("bounds", &resolved, params, None);
            emit(&resolved, csv.finish(), json_value, meta)
        }
        "extort" => {
            let r = require(resolved.factor(), "r")?;
            let limit = extortion::effective_ratio_limit(r)?;
            let mut csv = Csv::new(&["n_players", "factor", "chi_max_effective"]);
            let mut rows = Vec::new();
            for n in lo..=hi {
                let bound = extortion::effective_ratio_bound(n, r)?;
                csv.row(&[
                    n.to_string(),
                    fmt_f64(r),
                    bound.map_or_else(|| "inf".into(), fmt_f64),
                ]);
                rows.push(json!({ "n_players": n, "factor": r, "chi_max_effective": bound }));
            }
            let params = json!({ "mode": "extort", "n_range": range_text, "r": r });
            let json_value = json!({ "rows": rows, "large_group_limit": limit });
            let meta = meta("bounds", &resolved, params, None);
            emit(&resolved, csv.finish(), json_value, meta)
        }
        other => Err(Failure::invalid(format!(
            "unknown bounds mode {other:?}; expected pin or extort"
        ))),
    }
}

pub fn check(common: &CommonArgs, samples: Option<usize>) -> Result<(), Failure> {
    let resolved = Resolved::new(common)?;
    let spec = resolved.game_spec()?;
    let seed = resolved.seed.unwrap_or(0);
    let samples = pick(samples, resolved.file.samples).unwrap_or(1000);

    let mut checks: Vec<(String, bool, String)> = Vec::new();

    // A player cannot pin their own payoff.
    let self_pin = impossibility::self_pin_feasibility(&spec);
    checks.push((
        "self_pin_infeasible".into(),
        !self_pin.feasible,
        self_pin.witness.clone(),
    ));

    // Two players cannot enforce a relation through their joint column,
    // while the single-player construction (positive control) succeeds.
    let region = pinning::feasible_region(&spec);
    if region.is_empty() {
        checks.push((
            "collusion_infeasible".into(),
            true,
            "skipped: no pinning strategies exist at this spec".into(),
        ));
        checks.push((
            "single_control_consistent".into(),
            true,
            "skipped: no pinning strategies exist at this spec".into(),
        ));
    } else {
        let centroid = centroid(region.vertices());
        let params = pinning::pinning_params(&spec, centroid[0], centroid[1])?;
        let n = spec.n_players();

        let mut pair_alphas = vec![0.0; n + 1];
        pair_alphas[n - 1] = params.mu();
        pair_alphas[n] = params.xi();
        let pair = impossibility::collusion_feasibility(&spec, &pair_alphas, samples, seed)?;
        checks.push((
            "collusion_infeasible".into(),
            !pair.consistent && pair.residual > 1e-3,
            format!(
                "residual {:.6e} over {} starts (cross-ratio residual {:.6e})",
                pair.residual, pair.starts, pair.cross_ratio_residual
            ),
        ));

        let mut single_alphas = vec![params.mu(); n + 1];
        single_alphas[0] = 0.0;
        single_alphas[n] = params.xi();
        let single = impossibility::single_control_feasibility(&spec, &single_alphas, 8, seed)?;
        checks.push((
            "single_control_consistent".into(),
            single.consistent,
            format!("residual {:.6e}", single.residual),
        ));
    }

    // Determinant route agrees with the stationary solve.
    let max_diff = determinant_agreement(&spec, seed)?;
    checks.push((
        "determinant_matches_stationary".into(),
        max_diff < 1e-9,
        format!("max |det - solve| = {max_diff:.6e} over 50 random profiles"),
    ));

    let all_passed = checks.iter().all(|(_, passed, _)| *passed);
    let mut csv = Csv::new(&["check", "passed", "detail"]);
    for (name, passed, detail) in &checks {
        csv.row(&[name.clone(), passed.to_string(), detail.clone()]);
    }
    let rows: Vec<Value> = checks
        .iter()
        .map(|(name, passed, detail)| json!({ "check": name, "passed": passed, "detail": detail }))
        .collect();
    let params = json!({ "n": spec.n_players(), "r": spec.factor(), "samples": samples });
    let json_value = json!({ "checks": rows, "all_passed": all_passed });
    let meta = meta("check", &resolved, params, Some(&spec));
    emit(&resolved, csv.finish(), json_value, meta)?;

    if all_passed {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_CHECK_FAILED,
            message: "one or more verification checks failed".into(),
        })
    }
}

fn centroid(vertices: &[[f64; 2]]) -> [f64; 2] {
    let n = vertices.len() as f64;
    let mut c = [0.0, 0.0];
    for v in vertices {
        c[0] += v[0] / n;
        c[1] += v[1] / n;
    }
    c
}

fn determinant_agreement(spec: &GameSpec, seed: u64) -> Result<f64, Failure> {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.n_players();
    let mut max_diff = 0.0f64;
    for _ in 0..50 {
        let full = (1..=n)
            .map(|player| {
                let pc = (0..n).map(|_| rng.random::<f64>()).collect();
                let pd = (0..n).map(|_| rng.random::<f64>()).collect();
                Ok(ReducedStrategy::new(pc, pd)?.expand(spec, player)?)
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        let payoffs = markov::expected_payoffs(spec, &full)?;
        for (x, &e) in payoffs.iter().enumerate() {
            let u = spec.payoff_vector(x + 1)?;
            let via_det = markov::determinant_expectation(spec, &full, u.values())?;
            max_diff = max_diff.max((via_det - e).abs());
        }
    }
    Ok(max_diff)
}
