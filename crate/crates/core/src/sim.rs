//! Deterministic Monte Carlo engine: plays iterated stage games, estimates
//! empirical payoffs, and produces the scatter datasets that pair a focal
//! strategy against randomly drawn opponents.
//!
//! Reproducibility contract: every result is a pure function of the inputs
//! and the seed. Trials draw from independent ChaCha streams keyed by trial
//! index, so parallel execution and execution order never change a dataset.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{expand_profile, GameSpec, ReducedStrategy, StateIndex};
use crate::markov;

/// How opponent strategies are drawn for each trial.
#[derive(Debug, Clone, PartialEq)]
pub enum OpponentGenerator {
    /// Every reduced entry independently uniform on [0, 1].
    UniformRandomReduced,
    AlwaysCooperate,
    AlwaysDefect,
    WinStayLoseShift,
    /// Fixed cooperation probability regardless of history.
    Constant(f64),
}

impl OpponentGenerator {
    pub fn sample(&self, n_players: usize, rng: &mut ChaCha8Rng) -> Result<ReducedStrategy> {
        match self {
            OpponentGenerator::UniformRandomReduced => {
                let pc = (0..n_players).map(|_| rng.random::<f64>()).collect();
                let pd = (0..n_players).map(|_| rng.random::<f64>()).collect();
                ReducedStrategy::new(pc, pd)
            }
            OpponentGenerator::AlwaysCooperate => Ok(ReducedStrategy::always_cooperate(n_players)),
            OpponentGenerator::AlwaysDefect => Ok(ReducedStrategy::always_defect(n_players)),
            OpponentGenerator::WinStayLoseShift => {
                Ok(ReducedStrategy::win_stay_lose_shift(n_players))
            }
            OpponentGenerator::Constant(p) => ReducedStrategy::constant(n_players, *p),
        }
    }

    pub fn label(&self) -> String {
        match self {
            OpponentGenerator::UniformRandomReduced => "uniform".into(),
            OpponentGenerator::AlwaysCooperate => "always-c".into(),
            OpponentGenerator::AlwaysDefect => "always-d".into(),
            OpponentGenerator::WinStayLoseShift => "wsls".into(),
            OpponentGenerator::Constant(p) => format!("constant:{p}"),
        }
    }
}

/// One trial's outcome: the focal player's payoff against the mean payoff
/// of the opponents it faced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub trial: u64,
    pub focal_payoff: f64,
    pub mean_opponent_payoff: f64,
}

/// Everything needed to reproduce a dataset bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMeta {
    pub n_players: usize,
    pub factor: f64,
    pub endowment: f64,
    pub focal: ReducedStrategy,
    pub opponents: String,
    pub trials: u64,
    /// Zero for analytic datasets.
    pub rounds: u64,
    pub discard: u64,
    pub seed: u64,
    /// Opponent draws rejected for producing chains without a unique
    /// stationary distribution (analytic datasets only).
    pub resamples: u64,
    pub source: SweepSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepSource {
    Simulated,
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepDataset {
    pub points: Vec<SweepPoint>,
    pub meta: SweepMeta,
}

/// Plays one iterated match and returns per-player payoffs averaged over
/// the rounds after the burn-in `discard`.
pub fn play_match(
    spec: &GameSpec,
    strategies: &[ReducedStrategy],
    rounds: u64,
    discard: u64,
    seed: u64,
    initial_state: StateIndex,
) -> Result<Vec<f64>> {
    if rounds == 0 || discard >= rounds {
        return Err(Error::InvalidArgument(format!(
            "need rounds > discard >= 0, got rounds = {rounds}, discard = {discard}"
        )));
    }
    if initial_state.get() >= spec.state_count() {
        return Err(Error::InvalidArgument(format!(
            "initial state {} out of range for {} states",
            initial_state.get(),
            spec.state_count()
        )));
    }
    let n = spec.n_players();
    let full = expand_profile(spec, strategies)?;
    let payoffs: Vec<_> = (1..=n)
        .map(|x| spec.payoff_vector(x).expect("player in range"))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = initial_state.get();
    let mut sums = vec![0.0f64; n];
    for round in 0..rounds {
        let mut next = 0usize;
        for strategy in &full {
            let cooperates = rng.random::<f64>() < strategy.probs()[state];
            next = (next << 1) | usize::from(!cooperates);
        }
        state = next;
        if round >= discard {
            for (sum, u) in sums.iter_mut().zip(&payoffs) {
                *sum += u.get(StateIndex(state));
            }
        }
    }
    let samples = (rounds - discard) as f64;
    Ok(sums.into_iter().map(|s| s / samples).collect())
}

/// Simulated scatter dataset: `trials` independent matches of the focal
/// strategy against freshly drawn opponents. Matches start from the all-
/// defect state.
pub fn sweep(
    spec: &GameSpec,
    focal: &ReducedStrategy,
    generator: &OpponentGenerator,
    trials: u64,
    rounds: u64,
    discard: u64,
    seed: u64,
) -> Result<SweepDataset> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    if rounds == 0 || discard >= rounds {
        return Err(Error::InvalidArgument(format!(
            "need rounds > discard >= 0, got rounds = {rounds}, discard = {discard}"
        )));
    }
    let n = spec.n_players();
    let all_defect = StateIndex(spec.state_count() - 1);
    let points = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<SweepPoint> {
            let mut rng = trial_rng(seed, trial);
            let mut profile = Vec::with_capacity(n);
            profile.push(focal.clone());
            for _ in 1..n {
                profile.push(generator.sample(n, &mut rng)?);
            }
            let match_seed = rng.random::<u64>();
            let payoffs = play_match(spec, &profile, rounds, discard, match_seed, all_defect)?;
            Ok(point_from_payoffs(trial, &payoffs))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SweepDataset {
        points,
        meta: SweepMeta {
            n_players: n,
            factor: spec.factor(),
            endowment: spec.endowment(),
            focal: focal.clone(),
            opponents: generator.label(),
            trials,
            rounds,
            discard,
            seed,
            resamples: 0,
            source: SweepSource::Simulated,
        },
    })
}

/// Noise-free twin of [`sweep`]: identical opponent draws, but payoffs come
/// from the stationary solve. Opponent profiles without a unique stationary
/// distribution are redrawn (and counted); a generator that can never
/// produce one fails after a bounded number of attempts.
pub fn analytic_sweep(
    spec: &GameSpec,
    focal: &ReducedStrategy,
    generator: &OpponentGenerator,
    trials: u64,
    seed: u64,
) -> Result<SweepDataset> {
    let n = spec.n_players();
    let focal_full = focal.expand(spec, 1)?;
    const MAX_ATTEMPTS: u64 = 1000;

    let results = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<(SweepPoint, u64)> {
            let mut rng = trial_rng(seed, trial);
            let mut resamples = 0u64;
            loop {
                let mut profile = Vec::with_capacity(n);
                profile.push(focal_full.clone());
                for player in 2..=n {
                    profile.push(generator.sample(n, &mut rng)?.expand(spec, player)?);
                }
                match markov::expected_payoffs(spec, &profile) {
                    Ok(payoffs) => {
                        return Ok((point_from_payoffs(trial, &payoffs), resamples));
                    }
                    Err(Error::NonErgodicChain { .. }) => {
                        resamples += 1;
                        if resamples >= MAX_ATTEMPTS {
                            return Err(Error::NonErgodicChain { closed_classes: 0 });
                        }
                    }
                    Err(other) => return Err(other),
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let resamples = results.iter().map(|(_, r)| r).sum();
    Ok(SweepDataset {
        points: results.into_iter().map(|(p, _)| p).collect(),
        meta: SweepMeta {
            n_players: n,
            factor: spec.factor(),
            endowment: spec.endowment(),
            focal: focal.clone(),
            opponents: generator.label(),
            trials,
            rounds: 0,
            discard: 0,
            seed,
            resamples,
            source: SweepSource::Analytic,
        },
    })
}

fn point_from_payoffs(trial: u64, payoffs: &[f64]) -> SweepPoint {
    let opponents = payoffs.len() - 1;
    SweepPoint {
        trial,
        focal_payoff: payoffs[0],
        mean_opponent_payoff: payoffs[1..].iter().sum::<f64>() / opponents as f64,
    }
}

/// Independent stream per trial under one master seed.
fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial + 1);
    rng
}
