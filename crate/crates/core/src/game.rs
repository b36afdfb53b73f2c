//! Stage-game model for the N-player public goods game: state indexing,
//! payoff vectors, and memory-one strategy representations.
//!
//! States are indexed lexicographically with player 1 owning the most
//! significant bit and cooperation encoded as 0, so for N = 3 the order is
//! CCC, CCD, CDC, CDD, DCC, DCD, DDC, DDD.

use serde::Serialize;

use crate::error::{Error, Result};

/// Entries this close to the [0, 1] boundary are clamped onto it; anything
/// farther out is rejected instead of silently repaired.
pub const PROB_TOL: f64 = 1e-12;

/// The N-player stage game: `n_players` contribute (or not) a unit endowment
/// to a pot multiplied by `factor` and split evenly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GameSpec {
    n_players: usize,
    factor: f64,
    endowment: f64,
}

impl GameSpec {
    pub const MIN_PLAYERS: usize = 2;
    /// Dense-matrix cap; the closed forms cover every larger N.
    pub const MAX_PLAYERS: usize = 16;

    pub fn new(n_players: usize, factor: f64) -> Result<Self> {
        if !(Self::MIN_PLAYERS..=Self::MAX_PLAYERS).contains(&n_players) {
            return Err(Error::InvalidPlayerCount {
                got: n_players,
                min: Self::MIN_PLAYERS,
                max: Self::MAX_PLAYERS,
            });
        }
        if !factor.is_finite() || factor <= 1.0 || factor > n_players as f64 {
            return Err(Error::InvalidFactor { factor, n_players });
        }
        Ok(Self {
            n_players,
            factor,
            endowment: 1.0,
        })
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    /// Unit endowment kept by a defector; fixed at 1.
    pub fn endowment(&self) -> f64 {
        self.endowment
    }

    pub fn state_count(&self) -> usize {
        1 << self.n_players
    }

    /// The factor `N / (N - 1)` separating the monotonicity regimes.
    pub fn critical_factor(&self) -> f64 {
        let n = self.n_players as f64;
        n / (n - 1.0)
    }

    /// Smallest and largest per-player payoff over all states:
    /// `r/N` (lone cooperator) and `1 + r(N-1)/N` (lone defector).
    pub fn payoff_range(&self) -> (f64, f64) {
        let n = self.n_players as f64;
        (self.factor / n, 1.0 + self.factor * (n - 1.0) / n)
    }

    /// Encodes an action profile (`true` = cooperate) as a state index.
    pub fn state_index(&self, actions: &[bool]) -> Result<StateIndex> {
        if actions.len() != self.n_players {
            return Err(Error::InvalidArgument(format!(
                "expected {} actions, got {}",
                self.n_players,
                actions.len()
            )));
        }
        let mut index = 0usize;
        for &cooperates in actions {
            index = (index << 1) | usize::from(!cooperates);
        }
        Ok(StateIndex(index))
    }

    /// Inverse of [`state_index`](Self::state_index).
    pub fn state_actions(&self, state: StateIndex) -> Vec<bool> {
        (1..=self.n_players)
            .map(|player| self.player_cooperates(state, player))
            .collect()
    }

    /// Whether `player` (1-based) cooperated in `state`.
    pub fn player_cooperates(&self, state: StateIndex, player: usize) -> bool {
        debug_assert!((1..=self.n_players).contains(&player));
        state.0 & (1 << (self.n_players - player)) == 0
    }

    /// Number of cooperators among `player`'s opponents in `state`.
    pub fn opponent_cooperators(&self, state: StateIndex, player: usize) -> Result<usize> {
        self.check_player(player)?;
        let own_bit = 1usize << (self.n_players - player);
        let defect_mask = state.0 & !own_bit;
        Ok(self.n_players - 1 - defect_mask.count_ones() as usize)
    }

    /// Total cooperators (the player included) in `state`.
    pub fn total_cooperators(&self, state: StateIndex) -> usize {
        self.n_players - (state.0 & (self.state_count() - 1)).count_ones() as usize
    }

    /// Per-state payoffs for one player: `r(n + h)/N + (1 - h)` where `n`
    /// counts cooperating opponents and `h` is the player's own action bit.
    pub fn payoff_vector(&self, player: usize) -> Result<PayoffVector> {
        self.check_player(player)?;
        let n = self.n_players as f64;
        let values = (0..self.state_count())
            .map(|i| {
                let state = StateIndex(i);
                let h = f64::from(self.player_cooperates(state, player));
                let coop = self
                    .opponent_cooperators(state, player)
                    .expect("player checked") as f64;
                // Dividing the count first keeps the all-C payoff exactly r
                // and the all-D payoff exactly 1.
                self.factor * ((coop + h) / n) + (1.0 - h)
            })
            .collect();
        Ok(PayoffVector { values })
    }

    pub(crate) fn check_player(&self, player: usize) -> Result<()> {
        if (1..=self.n_players).contains(&player) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "player index {} out of range 1..={}",
                player, self.n_players
            )))
        }
    }
}

/// Index of one stage-game outcome in `[0, 2^N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct StateIndex(pub usize);

impl StateIndex {
    pub fn get(&self) -> usize {
        self.0
    }
}

/// The 2N independent conditional cooperation probabilities of a memory-one
/// strategy: `pc[n]` after own cooperation with `n` cooperating opponents,
/// `pd[n]` after own defection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedStrategy {
    pc: Vec<f64>,
    pd: Vec<f64>,
}

impl ReducedStrategy {
    pub fn new(pc: Vec<f64>, pd: Vec<f64>) -> Result<Self> {
        if pc.len() != pd.len() || pc.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "reduced strategy needs equal, nonempty pc/pd lists (got {} and {})",
                pc.len(),
                pd.len()
            )));
        }
        let clamp = |label: &str, v: Vec<f64>| -> Result<Vec<f64>> {
            v.into_iter()
                .enumerate()
                .map(|(n, p)| {
                    clamp_probability(p).ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "{label}[{n}] = {p} outside [0, 1] beyond tolerance {PROB_TOL:e}"
                        ))
                    })
                })
                .collect()
        };
        Ok(Self {
            pc: clamp("pc", pc)?,
            pd: clamp("pd", pd)?,
        })
    }

    /// Number of opponents the strategy is written for (N - 1 entries index).
    pub fn arity(&self) -> usize {
        self.pc.len()
    }

    pub fn pc(&self) -> &[f64] {
        &self.pc
    }

    pub fn pd(&self) -> &[f64] {
        &self.pd
    }

    pub fn always_cooperate(n_players: usize) -> Self {
        Self {
            pc: vec![1.0; n_players],
            pd: vec![1.0; n_players],
        }
    }

    pub fn always_defect(n_players: usize) -> Self {
        Self {
            pc: vec![0.0; n_players],
            pd: vec![0.0; n_players],
        }
    }

    /// Cooperate with the same probability regardless of the previous round.
    pub fn constant(n_players: usize, p: f64) -> Result<Self> {
        let p = clamp_probability(p).ok_or_else(|| {
            Error::InvalidArgument(format!("constant probability {p} outside [0, 1]"))
        })?;
        Ok(Self {
            pc: vec![p; n_players],
            pd: vec![p; n_players],
        })
    }

    /// Win-Stay-Lose-Shift: cooperate again only after unanimous cooperation,
    /// and switch back to cooperation unless defection met full cooperation.
    pub fn win_stay_lose_shift(n_players: usize) -> Self {
        let last = n_players - 1;
        let pc = (0..n_players).map(|n| f64::from(n == last)).collect();
        let pd = (0..n_players).map(|n| f64::from(n != last)).collect();
        Self { pc, pd }
    }

    /// Expands to the full 2^N-entry conditional-cooperation vector for
    /// `player`; each reduced entry appears `C(N-1, n)` times per own-action
    /// block.
    pub fn expand(&self, spec: &GameSpec, player: usize) -> Result<FullStrategy> {
        self.check_arity(spec)?;
        spec.check_player(player)?;
        let probs = (0..spec.state_count())
            .map(|i| {
                let state = StateIndex(i);
                let n = spec
                    .opponent_cooperators(state, player)
                    .expect("player checked");
                if spec.player_cooperates(state, player) {
                    self.pc[n]
                } else {
                    self.pd[n]
                }
            })
            .collect();
        Ok(FullStrategy { probs })
    }

    /// The column of the transition structure unilaterally controlled by
    /// `player`: the expanded strategy minus 1 wherever the player's own
    /// previous action was C.
    pub fn zd_column(&self, spec: &GameSpec, player: usize) -> Result<Vec<f64>> {
        Ok(self.expand(spec, player)?.zd_column(spec, player))
    }

    fn check_arity(&self, spec: &GameSpec) -> Result<()> {
        if self.arity() == spec.n_players() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "reduced strategy has {} entries per list, expected {}",
                self.arity(),
                spec.n_players()
            )))
        }
    }
}

/// A memory-one strategy as the full 2^N-entry vector of conditional
/// cooperation probabilities, indexed by previous state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullStrategy {
    probs: Vec<f64>,
}

impl FullStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let probs = probs
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                clamp_probability(p).ok_or_else(|| {
                    Error::InvalidArgument(format!("probs[{i}] = {p} outside [0, 1]"))
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, state: StateIndex) -> f64 {
        self.probs[state.0]
    }

    pub(crate) fn zd_column(&self, spec: &GameSpec, player: usize) -> Vec<f64> {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                if spec.player_cooperates(StateIndex(i), player) {
                    p - 1.0
                } else {
                    p
                }
            })
            .collect()
    }
}

/// Expands one reduced strategy per player into the full per-state vectors
/// the Markov machinery consumes; player `k` (1-based) gets `strategies[k-1]`.
pub fn expand_profile(
    spec: &GameSpec,
    strategies: &[ReducedStrategy],
) -> Result<Vec<FullStrategy>> {
    if strategies.len() != spec.n_players() {
        return Err(Error::InvalidArgument(format!(
            "expected {} strategies, got {}",
            spec.n_players(),
            strategies.len()
        )));
    }
    strategies
        .iter()
        .enumerate()
        .map(|(x, s)| s.expand(spec, x + 1))
        .collect()
}

/// One player's payoff at every state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayoffVector {
    values: Vec<f64>,
}

impl PayoffVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, state: StateIndex) -> f64 {
        self.values[state.0]
    }
}

pub(crate) fn clamp_probability(p: f64) -> Option<f64> {
    if p.is_nan() {
        None
    } else if (0.0..=1.0).contains(&p) {
        Some(p)
    } else if p > -PROB_TOL && p < 0.0 {
        Some(0.0)
    } else if p > 1.0 && p < 1.0 + PROB_TOL {
        Some(1.0)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec3() -> GameSpec {
        GameSpec::new(3, 1.6).unwrap()
    }

    fn fig5a_reduced() -> ReducedStrategy {
        ReducedStrategy::new(vec![0.22, 0.15, 0.08], vec![0.31, 0.24, 0.17]).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(GameSpec::new(1, 1.5).is_err());
        assert!(GameSpec::new(17, 1.5).is_err());
        assert!(GameSpec::new(3, 1.0).is_err());
        assert!(GameSpec::new(3, 0.9).is_err());
        assert!(GameSpec::new(3, 3.2).is_err());
        // r = N is the closed boundary of the PGG regime.
        assert!(GameSpec::new(3, 3.0).is_ok());
        assert!(GameSpec::new(2, 1.5).is_ok());
    }

    #[test]
    fn state_index_ordering() {
        let spec = spec3();
        assert_eq!(spec.state_index(&[true, true, true]).unwrap().get(), 0);
        assert_eq!(spec.state_index(&[true, false, false]).unwrap().get(), 3);
        assert_eq!(spec.state_index(&[false, false, false]).unwrap().get(), 7);
        assert!(spec.state_index(&[true, true]).is_err());
    }

    #[test]
    fn state_round_trip() {
        for n in 2..=5 {
            let spec = GameSpec::new(n, 1.2).unwrap();
            for i in 0..spec.state_count() {
                let actions = spec.state_actions(StateIndex(i));
                assert_eq!(spec.state_index(&actions).unwrap().get(), i);
            }
        }
    }

    #[test]
    fn opponent_cooperator_counts() {
        let spec = spec3();
        let cdd = spec.state_index(&[true, false, false]).unwrap();
        let dcc = spec.state_index(&[false, true, true]).unwrap();
        assert_eq!(spec.opponent_cooperators(cdd, 1).unwrap(), 0);
        assert_eq!(spec.opponent_cooperators(cdd, 2).unwrap(), 1);
        assert_eq!(spec.opponent_cooperators(dcc, 1).unwrap(), 2);
        assert!(spec.opponent_cooperators(cdd, 0).is_err());
        assert!(spec.opponent_cooperators(cdd, 4).is_err());
    }

    #[test]
    fn payoff_vector_values() {
        let spec = spec3();
        let u1 = spec.payoff_vector(1).unwrap();
        let dcc = spec.state_index(&[false, true, true]).unwrap();
        let ccc = StateIndex(0);
        let ddd = StateIndex(7);
        assert!((u1.get(dcc) - (2.0 * 1.6 / 3.0 + 1.0)).abs() < 1e-12);
        assert!((u1.get(ccc) - 1.6).abs() < 1e-12);
        assert_eq!(u1.get(ddd), 1.0);

        let (lo, hi) = spec.payoff_range();
        for &v in u1.values() {
            assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }

    #[test]
    fn payoff_conservation() {
        // Group payoff at every state is r * (cooperators) + (defectors).
        for n in 2..=5 {
            let spec = GameSpec::new(n, 1.0 + 0.3 * n as f64).unwrap();
            let payoffs: Vec<_> = (1..=n).map(|p| spec.payoff_vector(p).unwrap()).collect();
            for i in 0..spec.state_count() {
                let state = StateIndex(i);
                let coop = spec.total_cooperators(state) as f64;
                let total: f64 = payoffs.iter().map(|u| u.get(state)).sum();
                let expect = spec.factor() * coop + (n as f64 - coop);
                assert!(
                    (total - expect).abs() < 1e-9,
                    "state {i}: {total} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn free_rider_dominance() {
        // For a fixed opponent count, defecting beats cooperating by 1 - r/N.
        let spec = spec3();
        let u = spec.payoff_vector(1).unwrap();
        let gap = 1.0 - spec.factor() / spec.n_players() as f64;
        assert!(gap > 0.0);
        for n in 0..3 {
            let mut c_state = None;
            let mut d_state = None;
            for i in 0..spec.state_count() {
                let s = StateIndex(i);
                if spec.opponent_cooperators(s, 1).unwrap() == n {
                    if spec.player_cooperates(s, 1) {
                        c_state.get_or_insert(s);
                    } else {
                        d_state.get_or_insert(s);
                    }
                }
            }
            let diff = u.get(d_state.unwrap()) - u.get(c_state.unwrap());
            assert!((diff - gap).abs() < 1e-12);
        }
    }

    #[test]
    fn expand_matches_reference_pinning_vector() {
        let spec = spec3();
        let full = fig5a_reduced().expand(&spec, 1).unwrap();
        let expected = [0.08, 0.15, 0.15, 0.22, 0.17, 0.24, 0.24, 0.31];
        for (got, want) in full.probs().iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn expand_repeat_own_move_and_wsls() {
        let spec = spec3();
        let repeat = ReducedStrategy::new(vec![1.0; 3], vec![0.0; 3]).unwrap();
        assert_eq!(
            repeat.expand(&spec, 1).unwrap().probs(),
            &[1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]
        );
        let wsls = ReducedStrategy::win_stay_lose_shift(3);
        assert_eq!(
            wsls.expand(&spec, 1).unwrap().probs(),
            &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0]
        );
    }

    #[test]
    fn expand_multiplicities() {
        // Each reduced entry appears C(N-1, n) times per own-action block.
        let spec = GameSpec::new(4, 2.0).unwrap();
        let s = ReducedStrategy::new(vec![0.11, 0.22, 0.33, 0.44], vec![0.55, 0.66, 0.77, 0.88])
            .unwrap();
        let full = s.expand(&spec, 2).unwrap();
        let choose = [1.0, 3.0, 3.0, 1.0];
        for (n, &c) in choose.iter().enumerate() {
            let count_c = full
                .probs()
                .iter()
                .filter(|&&p| (p - s.pc()[n]).abs() < 1e-15)
                .count();
            let count_d = full
                .probs()
                .iter()
                .filter(|&&p| (p - s.pd()[n]).abs() < 1e-15)
                .count();
            assert_eq!(count_c as f64, c);
            assert_eq!(count_d as f64, c);
        }
    }

    #[test]
    fn zd_column_examples() {
        let spec = spec3();
        let col = fig5a_reduced().zd_column(&spec, 1).unwrap();
        let expected = [-0.92, -0.85, -0.85, -0.78, 0.17, 0.24, 0.24, 0.31];
        for (got, want) in col.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }

        let singular = ReducedStrategy::new(vec![1.0; 3], vec![0.0; 3]).unwrap();
        assert!(singular
            .zd_column(&spec, 1)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));

        // Player 2 controls the states where its own bit is C: 0, 1, 4, 5.
        let col2 = fig5a_reduced().zd_column(&spec, 2).unwrap();
        for (i, &v) in col2.iter().enumerate() {
            if [0, 1, 4, 5].contains(&i) {
                assert!(v < 0.0, "state {i} should be -1 + p, got {v}");
            } else {
                assert!(v >= 0.0);
            }
        }
    }

    #[test]
    fn probability_clamping() {
        let s = ReducedStrategy::new(vec![1.0 + 5e-13, 0.5, -5e-13], vec![0.1, 0.2, 0.3]).unwrap();
        assert_eq!(s.pc()[0], 1.0);
        assert_eq!(s.pc()[2], 0.0);
        assert!(ReducedStrategy::new(vec![1.0 + 1e-9, 0.5, 0.5], vec![0.1, 0.2, 0.3]).is_err());
        assert!(ReducedStrategy::new(vec![f64::NAN, 0.5, 0.5], vec![0.1, 0.2, 0.3]).is_err());
    }
}
