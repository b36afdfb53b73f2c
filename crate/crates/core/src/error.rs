//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("player count must be between {min} and {max}, got {got}")]
    InvalidPlayerCount { got: usize, min: usize, max: usize },

    #[error("multiplication factor must satisfy 1 < r <= N = {n_players}, got r = {factor}")]
    InvalidFactor { factor: f64, n_players: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The strategy point where every conditional probability degenerates to
    /// repeat-own-move (`p_cc = 1`, `p_dd = 0`); the induced chain splits into
    /// closed classes and no payoff relation can be enforced.
    #[error("singular strategy: {0}")]
    SingularStrategy(String),

    #[error("degenerate multiplication factor: {0}")]
    DegenerateFactor(String),

    #[error("infeasible pinning point: {constraint}")]
    InfeasiblePinning { constraint: String, violation: f64 },

    #[error("infeasible extortion parameters: {constraint}")]
    InfeasibleExtortion { constraint: String, violation: f64 },

    /// The chain has several closed communicating classes, so the stationary
    /// distribution (and hence any long-run payoff) depends on the initial
    /// state and must not be interpreted as unique.
    #[error(
        "non-ergodic chain: {closed_classes} closed communicating classes; \
         long-run payoffs depend on the initial distribution"
    )]
    NonErgodicChain { closed_classes: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}
