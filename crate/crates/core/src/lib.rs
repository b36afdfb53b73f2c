//! Zero-determinant strategies in the iterated N-player public goods game.
//!
//! A memory-one player can force a linear relation on the group's long-run
//! payoffs by making the transition-structure column it controls equal a
//! linear combination of payoff vectors. This crate builds the stage game
//! and its Markov chain, synthesizes the two specializations of that trick
//! (pinning the opponents' total payoff, and extorting a fixed surplus
//! ratio), derives their exact feasibility regions and bounds, checks the
//! corresponding impossibility results, and verifies everything empirically
//! with a deterministic Monte Carlo engine.

pub mod error;
pub mod extortion;
pub mod game;
pub mod impossibility;
mod linalg;
pub mod markov;
pub mod pinning;
pub mod sim;

pub use error::{Error, Result};
pub use game::{FullStrategy, GameSpec, PayoffVector, ReducedStrategy, StateIndex};
