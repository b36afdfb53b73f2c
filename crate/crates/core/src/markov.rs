//! Markov-chain machinery for the iterated stage game: the joint transition
//! matrix, regularity diagnostics, stationary distributions, and long-run
//! expected payoffs computed two independent ways (stationary solve and the
//! determinant identity over unilaterally controlled columns).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{FullStrategy, GameSpec, StateIndex};
use crate::linalg;

/// Stationary distributions must reproduce themselves under the transition
/// matrix to this component-wise residual.
pub const STATIONARY_TOL: f64 = 1e-10;
/// Analytic cross-checks (determinant ratio vs. eigen solve) use this bound.
pub const CROSS_CHECK_TOL: f64 = 1e-9;
/// Row sums of a transition matrix may deviate from 1 by at most this much.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// The determinant cross-check is skipped above this player count; its cost
/// grows as 8^N.
pub const CROSS_CHECK_MAX_PLAYERS: usize = 10;

/// Row-stochastic one-step transition matrix over the 2^N stage-game states.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    /// Builds the joint chain: entry (i, j) multiplies, over players, the
    /// probability that the player takes its state-j action conditioned on
    /// state i.
    pub fn from_strategies(spec: &GameSpec, strategies: &[FullStrategy]) -> Result<Self> {
        check_profile(spec, strategies)?;
        let size = spec.state_count();
        let n = spec.n_players();
        let mut entries = vec![0.0; size * size];
        for i in 0..size {
            let probs: Vec<f64> = (0..n).map(|x| strategies[x].get(StateIndex(i))).collect();
            for j in 0..size {
                let mut m = 1.0;
                for (x, &q) in probs.iter().enumerate() {
                    let cooperates = spec.player_cooperates(StateIndex(j), x + 1);
                    m *= if cooperates { q } else { 1.0 - q };
                }
                entries[i * size + j] = m;
            }
        }
        Ok(Self { size, entries })
    }

    /// Wraps a raw matrix, rejecting rows that are not probability
    /// distributions within [`ROW_SUM_TOL`].
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        let mut entries = Vec::with_capacity(size * size);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != size {
                return Err(Error::InvalidArgument(format!(
                    "row {i} has {} entries, expected {size}",
                    row.len()
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL || row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidArgument(format!(
                    "row {i} is not a probability distribution (sum = {sum})"
                )));
            }
            entries.extend(row);
        }
        Ok(Self { size, entries })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, from: usize, to: usize) -> f64 {
        self.entries[from * self.size + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.entries[from * self.size..(from + 1) * self.size]
    }

    /// Reducibility and aperiodicity of the positive-entry support graph.
    pub fn regularity(&self) -> RegularityReport {
        let classes = self.communicating_classes();
        let closed = classes.closed_count();
        if classes.components.len() > 1 {
            return RegularityReport {
                is_regular: false,
                reason: RegularityReason::Reducible,
                closed_classes: closed,
            };
        }
        if self.period() > 1 {
            return RegularityReport {
                is_regular: false,
                reason: RegularityReason::Periodic,
                closed_classes: closed,
            };
        }
        RegularityReport {
            is_regular: true,
            reason: RegularityReason::Ok,
            closed_classes: closed,
        }
    }

    /// Unique stationary vector of the chain. Exists exactly when there is a
    /// single closed communicating class; eigenvalue 1 is then simple and the
    /// linear solve below is nonsingular. A regular chain additionally
    /// guarantees step-wise convergence, but uniqueness is all that long-run
    /// averages need.
    pub fn stationary(&self) -> Result<StationaryDistribution> {
        let classes = self.communicating_classes();
        let closed = classes.closed_count();
        if closed != 1 {
            return Err(Error::NonErgodicChain {
                closed_classes: closed,
            });
        }
        let n = self.size;
        // (M^T - I) v = 0 with the last row replaced by the normalization
        // constraint sum(v) = 1.
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[j * n + i] = self.entries[i * n + j];
            }
        }
        for i in 0..n {
            a[i * n + i] -= 1.0;
        }
        for j in 0..n {
            a[(n - 1) * n + j] = 1.0;
        }
        let mut b = vec![0.0; n];
        b[n - 1] = 1.0;
        let mut v = linalg::solve(a, b, n).ok_or_else(|| {
            Error::NumericalFailure("stationary solve hit a singular pivot".into())
        })?;
        for p in v.iter_mut() {
            if *p < 0.0 {
                if *p < -1e-9 {
                    return Err(Error::NumericalFailure(format!(
                        "stationary entry {p} is negative beyond tolerance"
                    )));
                }
                *p = 0.0;
            }
        }
        let dist = StationaryDistribution { probs: v };
        let residual = dist.residual(self);
        let sum: f64 = dist.probs.iter().sum();
        if residual > STATIONARY_TOL || (sum - 1.0).abs() > 1e-10 {
            return Err(Error::NumericalFailure(format!(
                "stationary residual {residual:e} or normalization error {:e} out of tolerance",
                (sum - 1.0).abs()
            )));
        }
        Ok(dist)
    }

    /// Strongly connected components of the support graph (Tarjan, iterative).
    fn communicating_classes(&self) -> Classes {
        let n = self.size;
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| self.entry(i, j) > 0.0).collect())
            .collect();

        let mut index = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut next_index = 0usize;
        let mut components: Vec<Vec<usize>> = Vec::new();
        let mut component_of = vec![usize::MAX; n];

        for start in 0..n {
            if index[start] != usize::MAX {
                continue;
            }
            // (node, next child position)
            let mut call_stack = vec![(start, 0usize)];
            while let Some(&mut (v, ref mut child)) = call_stack.last_mut() {
                if *child == 0 {
                    index[v] = next_index;
                    low[v] = next_index;
                    next_index += 1;
                    stack.push(v);
                    on_stack[v] = true;
                }
                if *child < adj[v].len() {
                    let w = adj[v][*child];
                    *child += 1;
                    if index[w] == usize::MAX {
                        call_stack.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    if low[v] == index[v] {
                        let mut component = Vec::new();
                        loop {
                            let w = stack.pop().expect("tarjan stack underflow");
                            on_stack[w] = false;
                            component_of[w] = components.len();
                            component.push(w);
                            if w == v {
                                break;
                            }
                        }
                        components.push(component);
                    }
                    call_stack.pop();
                    if let Some(&mut (parent, _)) = call_stack.last_mut() {
                        low[parent] = low[parent].min(low[v]);
                    }
                }
            }
        }

        let mut is_closed = vec![true; components.len()];
        for i in 0..n {
            for &j in &adj[i] {
                if component_of[i] != component_of[j] {
                    is_closed[component_of[i]] = false;
                }
            }
        }
        Classes {
            components,
            is_closed,
        }
    }

    /// Period of an irreducible support graph: gcd over edges of the level
    /// mismatch in a BFS layering.
    fn period(&self) -> usize {
        let n = self.size;
        let mut level = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        level[0] = 0;
        queue.push_back(0usize);
        let mut g = 0usize;
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if self.entry(i, j) <= 0.0 {
                    continue;
                }
                if level[j] == usize::MAX {
                    level[j] = level[i] + 1;
                    queue.push_back(j);
                } else {
                    let diff = (level[i] + 1).abs_diff(level[j]);
                    g = gcd(g, diff);
                    if g == 1 {
                        return 1;
                    }
                }
            }
        }
        g.max(1)
    }

    /// The single absorbing state when the unique closed class is a
    /// singleton.
    fn sole_absorbing_state(&self) -> Option<StateIndex> {
        let classes = self.communicating_classes();
        let mut absorbing = None;
        let mut closed = 0;
        for (c, component) in classes.components.iter().enumerate() {
            if classes.is_closed[c] {
                closed += 1;
                if component.len() == 1 {
                    absorbing = Some(StateIndex(component[0]));
                }
            }
        }
        if closed == 1 {
            absorbing
        } else {
            None
        }
    }
}

struct Classes {
    components: Vec<Vec<usize>>,
    is_closed: Vec<bool>,
}

impl Classes {
    fn closed_count(&self) -> usize {
        self.is_closed.iter().filter(|&&c| c).count()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularityReason {
    Ok,
    Reducible,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegularityReport {
    pub is_regular: bool,
    pub reason: RegularityReason,
    /// Number of closed communicating classes of the support graph.
    pub closed_classes: usize,
}

/// Probability vector fixed by the transition matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryDistribution {
    probs: Vec<f64>,
}

impl StationaryDistribution {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dot(&self, values: &[f64]) -> f64 {
        self.probs.iter().zip(values).map(|(v, u)| v * u).sum()
    }

    /// Max component of |v^T M - v^T|.
    pub fn residual(&self, m: &TransitionMatrix) -> f64 {
        let n = m.size();
        (0..n)
            .map(|j| {
                let vm: f64 = (0..n).map(|i| self.probs[i] * m.entry(i, j)).sum();
                (vm - self.probs[j]).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Convenience wrapper matching the module's operation vocabulary.
pub fn transition_matrix(spec: &GameSpec, strategies: &[FullStrategy]) -> Result<TransitionMatrix> {
    TransitionMatrix::from_strategies(spec, strategies)
}

/// State index where `player` is the only cooperator; after the column
/// operations this is the column the player controls unilaterally.
pub fn controlled_column(spec: &GameSpec, player: usize) -> Result<usize> {
    spec.check_player(player)?;
    let all_defect = spec.state_count() - 1;
    Ok(all_defect & !(1 << (spec.n_players() - player)))
}

/// Raw determinant of M - I after the elementary column operations: each
/// player's controlled column holds its unilateral strategy column and the
/// all-defect column holds `u`. Proportional to the stationary expectation
/// of `u`, with the same constant for every `u` under a fixed profile.
pub fn dot_via_determinant(spec: &GameSpec, strategies: &[FullStrategy], u: &[f64]) -> Result<f64> {
    let (matrix, size) = operated_matrix(spec, strategies, u)?;
    Ok(linalg::determinant(matrix, size))
}

/// Stationary expectation of `u` via the ratio of two determinants.
/// Log-scaled so the ratio survives the tiny raw determinants that larger
/// state spaces produce.
pub fn determinant_expectation(
    spec: &GameSpec,
    strategies: &[FullStrategy],
    u: &[f64],
) -> Result<f64> {
    let size = spec.state_count();
    let (with_u, _) = operated_matrix(spec, strategies, u)?;
    let (with_one, _) = operated_matrix(spec, strategies, &vec![1.0; size])?;
    let (sign_u, log_u) = linalg::sign_log_determinant(with_u, size);
    let (sign_one, log_one) = linalg::sign_log_determinant(with_one, size);
    if sign_one == 0.0 {
        return Err(Error::NonErgodicChain { closed_classes: 0 });
    }
    if sign_u == 0.0 {
        return Ok(0.0);
    }
    Ok(sign_u * sign_one * (log_u - log_one).exp())
}

fn operated_matrix(
    spec: &GameSpec,
    strategies: &[FullStrategy],
    u: &[f64],
) -> Result<(Vec<f64>, usize)> {
    check_profile(spec, strategies)?;
    let size = spec.state_count();
    if u.len() != size {
        return Err(Error::InvalidArgument(format!(
            "payoff-like vector has {} entries, expected {size}",
            u.len()
        )));
    }
    let m = TransitionMatrix::from_strategies(spec, strategies)?;
    let mut a = vec![0.0; size * size];
    for i in 0..size {
        for j in 0..size {
            a[i * size + j] = m.entry(i, j) - f64::from(i == j);
        }
    }
    for player in 1..=spec.n_players() {
        let col = controlled_column(spec, player)?;
        let zd = strategies[player - 1].zd_column(spec, player);
        for i in 0..size {
            a[i * size + col] = zd[i];
        }
    }
    let last = size - 1;
    for i in 0..size {
        a[i * size + last] = u[i];
    }
    Ok((a, size))
}

/// Long-run expected payoff of every player. Chains whose unique closed
/// class is a single absorbing state short-circuit to that state's payoffs;
/// chains with several closed classes are rejected because their long-run
/// payoffs depend on the initial distribution.
pub fn expected_payoffs(spec: &GameSpec, strategies: &[FullStrategy]) -> Result<Vec<f64>> {
    check_profile(spec, strategies)?;
    let m = TransitionMatrix::from_strategies(spec, strategies)?;
    let payoffs: Vec<_> = (1..=spec.n_players())
        .map(|x| spec.payoff_vector(x).expect("player in range"))
        .collect();

    let values: Vec<f64> = if let Some(state) = m.sole_absorbing_state() {
        payoffs.iter().map(|u| u.get(state)).collect()
    } else {
        let v = m.stationary()?;
        payoffs.iter().map(|u| v.dot(u.values())).collect()
    };

    #[cfg(debug_assertions)]
    if spec.n_players() <= CROSS_CHECK_MAX_PLAYERS {
        for (x, e) in (0..spec.n_players()).zip(&values) {
            if let Ok(via_det) = determinant_expectation(spec, strategies, payoffs[x].values()) {
                debug_assert!(
                    (via_det - e).abs() <= CROSS_CHECK_TOL * (1.0 + e.abs()),
                    "determinant expectation {via_det} disagrees with solve {e} for player {}",
                    x + 1
                );
            }
        }
    }

    Ok(values)
}

/// `sum_X alphas[X-1] * E^X + alphas[N]` for an `N+1`-entry coefficient list.
pub fn linear_combination(
    spec: &GameSpec,
    strategies: &[FullStrategy],
    alphas: &[f64],
) -> Result<f64> {
    if alphas.len() != spec.n_players() + 1 {
        return Err(Error::InvalidArgument(format!(
            "expected {} coefficients (one per player plus a constant), got {}",
            spec.n_players() + 1,
            alphas.len()
        )));
    }
    let payoffs = expected_payoffs(spec, strategies)?;
    Ok(payoffs.iter().zip(alphas).map(|(e, a)| a * e).sum::<f64>() + alphas[spec.n_players()])
}

fn check_profile(spec: &GameSpec, strategies: &[FullStrategy]) -> Result<()> {
    if strategies.len() != spec.n_players() {
        return Err(Error::InvalidArgument(format!(
            "expected {} strategies, got {}",
            spec.n_players(),
            strategies.len()
        )));
    }
    for (x, s) in strategies.iter().enumerate() {
        if s.len() != spec.state_count() {
            return Err(Error::InvalidArgument(format!(
                "strategy for player {} has {} entries, expected {}",
                x + 1,
                s.len(),
                spec.state_count()
            )));
        }
    }
    Ok(())
}
