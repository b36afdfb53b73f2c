//! Synthesize a pinning strategy, verify the enforced payoff relation
//! analytically, then reproduce it by simulation.
//!
//!   cargo run -p ipgg --example pin_and_verify

use ipgg::game::expand_profile;
use ipgg::sim::{self, OpponentGenerator};
use ipgg::{markov, pinning, GameSpec, ReducedStrategy};

fn main() -> ipgg::Result<()> {
    let spec = GameSpec::new(3, 1.6)?;
    let focal = pinning::pinning_strategy(&spec, 0.08, 0.31)?;
    let pinned = pinning::pinned_total(&spec, 0.08, 0.31)?;
    println!("pinning strategy pc = {:?}", focal.pc());
    println!("pinning strategy pd = {:?}", focal.pd());
    println!("pinned opponent total = {pinned:.6}");

    // Whatever the opponents play, their payoffs sum to the pinned total.
    let opponents = [
        ReducedStrategy::constant(3, 0.9)?,
        ReducedStrategy::win_stay_lose_shift(3),
    ];
    let profile = expand_profile(
        &spec,
        &[focal.clone(), opponents[0].clone(), opponents[1].clone()],
    )?;
    let payoffs = markov::expected_payoffs(&spec, &profile)?;
    println!(
        "analytic payoffs = {payoffs:?} (opponents sum to {:.6})",
        payoffs[1] + payoffs[2]
    );

    // The same number comes out of a seeded Monte Carlo sweep against
    // freshly randomized opponents.
    let dataset = sim::sweep(
        &spec,
        &focal,
        &OpponentGenerator::UniformRandomReduced,
        200,
        100_000,
        1000,
        7,
    )?;
    let mean_opp = dataset
        .points
        .iter()
        .map(|p| p.mean_opponent_payoff)
        .sum::<f64>()
        / dataset.points.len() as f64;
    println!(
        "simulated mean opponent payoff over {} trials = {:.6} (target {:.6})",
        dataset.points.len(),
        mean_opp,
        pinned / 2.0
    );
    Ok(())
}
