//! Pinning strategies: the focal player fixes the total expected payoff of
//! all opponents at a value controlled only by the mutual-cooperation and
//! mutual-defection probabilities `(p_cc, p_dd)`. This module synthesizes
//! the strategy from that control pair, computes the pinned total, and
//! derives the exact feasible region and payoff bounds in every factor
//! regime.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{clamp_probability, GameSpec, ReducedStrategy, PROB_TOL};

/// Region membership and case detection tolerance.
const REGION_TOL: f64 = 1e-12;

/// The linear-relation coefficients enforced by a pinning point:
/// `mu * sum(opponent payoffs) + xi = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinningParams {
    mu: f64,
    xi: f64,
    p_cc: f64,
    p_dd: f64,
}

impl PinningParams {
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn p_cc(&self) -> f64 {
        self.p_cc
    }

    pub fn p_dd(&self) -> f64 {
        self.p_dd
    }

    /// Slope parameter of the control line: `(1 - p_cc) / p_dd`. Infinite
    /// when `p_dd = 0`.
    pub fn gamma(&self) -> f64 {
        (1.0 - self.p_cc) / self.p_dd
    }
}

/// `mu` and `xi` for a control pair, rejecting the singular repeat-own-move
/// point `(1, 0)`.
pub fn pinning_params(spec: &GameSpec, p_cc: f64, p_dd: f64) -> Result<PinningParams> {
    let (p_cc, p_dd) = check_control_pair(p_cc, p_dd)?;
    let n = spec.n_players() as f64;
    let r = spec.factor();
    if (r - 1.0).abs() <= REGION_TOL {
        return Err(Error::DegenerateFactor(
            "pinning parameters are undefined at r = 1".into(),
        ));
    }
    let mu = -(1.0 - p_cc + p_dd) / ((n - 1.0) * (r - 1.0));
    let xi = (1.0 - p_cc + r * p_dd) / (r - 1.0);
    Ok(PinningParams { mu, xi, p_cc, p_dd })
}

/// Synthesizes the full 2N-probability pinning strategy for a feasible
/// control pair. The pair itself round-trips exactly into `pc[N-1]` and
/// `pd[0]`.
pub fn pinning_strategy(spec: &GameSpec, p_cc: f64, p_dd: f64) -> Result<ReducedStrategy> {
    let params = pinning_params(spec, p_cc, p_dd)?;
    let (pc, pd) = raw_entries(spec, &params);

    let mut worst: Option<(&str, usize, f64, f64)> = None;
    for (label, list) in [("p_C", &pc), ("p_D", &pd)] {
        for (n, &p) in list.iter().enumerate() {
            let violation = if p < 0.0 { -p } else { (p - 1.0).max(0.0) };
            if violation > PROB_TOL && worst.is_none_or(|w| violation > w.3) {
                worst = Some((label, n, p, violation));
            }
        }
    }
    if let Some((label, n, p, violation)) = worst {
        return Err(Error::InfeasiblePinning {
            constraint: describe_violation(spec, label, n, p, p_cc, p_dd),
            violation,
        });
    }

    let mut pc: Vec<f64> = pc
        .into_iter()
        .map(|p| clamp_probability(p).unwrap())
        .collect();
    let mut pd: Vec<f64> = pd
        .into_iter()
        .map(|p| clamp_probability(p).unwrap())
        .collect();
    pc[spec.n_players() - 1] = params.p_cc;
    pd[0] = params.p_dd;
    ReducedStrategy::new(pc, pd)
}

/// Probability entries straight from the linear equations, unvalidated.
fn raw_entries(spec: &GameSpec, params: &PinningParams) -> (Vec<f64>, Vec<f64>) {
    let n = spec.n_players() as f64;
    let r = spec.factor();
    let (mu, xi) = (params.mu, params.xi);
    let pc = (0..spec.n_players())
        .map(|k| {
            let k = k as f64;
            1.0 + mu * (r * (k + 1.0) * (n - 1.0) + (n - 1.0 - k) * n) / n + xi
        })
        .collect();
    let pd = (0..spec.n_players())
        .map(|k| {
            let k = k as f64;
            mu * (r * k * (n - 1.0) + (n - 1.0 - k) * n) / n + xi
        })
        .collect();
    (pc, pd)
}

fn describe_violation(
    spec: &GameSpec,
    label: &str,
    index: usize,
    value: f64,
    p_cc: f64,
    p_dd: f64,
) -> String {
    let n = spec.n_players() as f64;
    let r = spec.factor();
    let a = r * n - n - r;
    let side = if value < 0.0 { "< 0" } else { "> 1" };
    let halfplane = match (label, value < 0.0) {
        ("p_C", true) => format!(
            "r*p_cc + (rN-N-r)*p_dd - r + rN - N >= 0 fails (lhs = {:.6})",
            r * p_cc + a * p_dd - r + r * n - n
        ),
        ("p_D", false) => format!(
            "(rN-N-r)*p_cc + r*p_dd - 2rN + r + 2N <= 0 fails (lhs = {:.6})",
            a * p_cc + r * p_dd - 2.0 * r * n + r + 2.0 * n
        ),
        ("p_C", false) => format!(
            "r*p_cc + (rN-N-r)*p_dd - r <= 0 fails (lhs = {:.6})",
            r * p_cc + a * p_dd - r
        ),
        _ => format!(
            "(rN-N-r)*p_cc + r*p_dd - rN + r + N >= 0 fails (lhs = {:.6})",
            a * p_cc + r * p_dd - r * n + r + n
        ),
    };
    format!("{label}({index}) = {value:.6} {side}; {halfplane}")
}

/// The pinned opponents' total expected payoff `-xi / mu`.
pub fn pinned_total(spec: &GameSpec, p_cc: f64, p_dd: f64) -> Result<f64> {
    let (p_cc, p_dd) = check_control_pair(p_cc, p_dd)?;
    let denom = 1.0 - p_cc + p_dd;
    if denom.abs() <= REGION_TOL {
        return Err(Error::SingularStrategy(format!(
            "pinned total undefined: 1 - p_cc + p_dd = {denom:e}"
        )));
    }
    let n = spec.n_players() as f64;
    let r = spec.factor();
    Ok((n - 1.0) + (r - 1.0) * (n - 1.0) * p_dd / denom)
}

/// Pinned total parameterized by the control-line slope `gamma`:
/// `(N-1) + (r-1)(N-1)/(1 + gamma)`.
pub fn pinned_total_gamma(spec: &GameSpec, gamma: f64) -> Result<f64> {
    if !gamma.is_finite() && gamma.is_sign_positive() {
        return Ok(spec.n_players() as f64 - 1.0);
    }
    if gamma <= -1.0 || gamma.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "gamma must exceed -1, got {gamma}"
        )));
    }
    let n = spec.n_players() as f64;
    let r = spec.factor();
    Ok((n - 1.0) + (r - 1.0) * (n - 1.0) / (1.0 + gamma))
}

/// Which factor regime the feasible region is in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionCase {
    /// `1 < r < N/(N-1)`: probabilities increase with the cooperator count.
    LowR,
    /// `r = N/(N-1)`: every control pair in the unit square works.
    CriticalR,
    /// `N/(N-1) < r <= N/(N-2)`: a shrinking quadrilateral.
    HighR,
    /// `r > N/(N-2)`: no pinning strategy exists.
    Empty,
}

impl RegionCase {
    pub fn label(&self) -> &'static str {
        match self {
            RegionCase::LowR => "low_r",
            RegionCase::CriticalR => "critical_r",
            RegionCase::HighR => "high_r",
            RegionCase::Empty => "empty",
        }
    }
}

/// Convex feasible set of control pairs, clipped to the unit square.
/// Vertices run counterclockwise starting from the lexicographically
/// smallest so emitted tables are stable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibleRegion {
    case: RegionCase,
    vertices: Vec<[f64; 2]>,
    excluded_points: Vec<[f64; 2]>,
    n_players: usize,
    factor: f64,
}

impl FeasibleRegion {
    pub fn case(&self) -> RegionCase {
        self.case
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn excluded_points(&self) -> &[[f64; 2]] {
        &self.excluded_points
    }

    pub fn is_empty(&self) -> bool {
        self.case == RegionCase::Empty
    }

    /// Closed-region membership, singular points removed.
    pub fn contains(&self, p_cc: f64, p_dd: f64) -> bool {
        self.contains_closure(p_cc, p_dd)
            && !self
                .excluded_points
                .iter()
                .any(|e| (e[0] - p_cc).abs() <= REGION_TOL && (e[1] - p_dd).abs() <= REGION_TOL)
    }

    /// Membership in the closed region (excluded points included), evaluated
    /// from the defining half-planes rather than the vertex list.
    pub fn contains_closure(&self, p_cc: f64, p_dd: f64) -> bool {
        let inside_square = (-REGION_TOL..=1.0 + REGION_TOL).contains(&p_cc)
            && (-REGION_TOL..=1.0 + REGION_TOL).contains(&p_dd);
        if !inside_square {
            return false;
        }
        let n = self.n_players as f64;
        let r = self.factor;
        let a = r * n - n - r;
        match self.case {
            RegionCase::Empty => false,
            RegionCase::CriticalR => true,
            RegionCase::LowR => {
                r * p_cc + a * p_dd - r + r * n - n >= -REGION_TOL
                    && a * p_cc + r * p_dd - 2.0 * r * n + r + 2.0 * n <= REGION_TOL
            }
            RegionCase::HighR => {
                r * p_cc + a * p_dd - r <= REGION_TOL
                    && a * p_cc + r * p_dd - r * n + r + n >= -REGION_TOL
            }
        }
    }
}

/// The exact feasible region of pinning control pairs for this game.
pub fn feasible_region(spec: &GameSpec) -> FeasibleRegion {
    let n = spec.n_players() as f64;
    let r = spec.factor();
    let a = r * n - n - r;
    let case = region_case(spec);

    let vertices = match case {
        RegionCase::Empty => Vec::new(),
        RegionCase::CriticalR => vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        RegionCase::LowR => {
            let square = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
            let clipped = clip(square, [r, a, -r + r * n - n]);
            clip(clipped, [-a, -r, 2.0 * r * n - r - 2.0 * n])
        }
        RegionCase::HighR => {
            let square = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
            let clipped = clip(square, [-r, -a, r]);
            clip(clipped, [a, r, -r * n + r + n])
        }
    };

    let vertices = canonical_order(vertices);
    let excluded_points = if case == RegionCase::Empty {
        Vec::new()
    } else {
        vec![[1.0, 0.0]]
    };
    FeasibleRegion {
        case,
        vertices,
        excluded_points,
        n_players: spec.n_players(),
        factor: r,
    }
}

fn region_case(spec: &GameSpec) -> RegionCase {
    let n = spec.n_players() as f64;
    let r = spec.factor();
    let critical = spec.critical_factor();
    if (r - critical).abs() <= REGION_TOL * n {
        RegionCase::CriticalR
    } else if r < critical {
        RegionCase::LowR
    } else if spec.n_players() == 2 || r <= n / (n - 2.0) {
        RegionCase::HighR
    } else {
        RegionCase::Empty
    }
}

/// Sutherland-Hodgman clip of a convex polygon by `a*x + b*y + c >= 0`.
fn clip(polygon: Vec<[f64; 2]>, [a, b, c]: [f64; 3]) -> Vec<[f64; 2]> {
    let f = |p: [f64; 2]| a * p[0] + b * p[1] + c;
    let mut out = Vec::with_capacity(polygon.len() + 2);
    for (k, &cur) in polygon.iter().enumerate() {
        let next = polygon[(k + 1) % polygon.len()];
        let (fc, fn_) = (f(cur), f(next));
        let cur_in = fc >= -REGION_TOL;
        let next_in = fn_ >= -REGION_TOL;
        if cur_in {
            out.push(cur);
        }
        if cur_in != next_in {
            let t = fc / (fc - fn_);
            out.push([
                cur[0] + t * (next[0] - cur[0]),
                cur[1] + t * (next[1] - cur[1]),
            ]);
        }
    }
    out
}

/// Dedups within 1e-9 and rotates so the lexicographically smallest vertex
/// leads; orientation (counterclockwise) is inherited from the unit square.
fn canonical_order(vertices: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    let mut dedup: Vec<[f64; 2]> = Vec::new();
    for v in vertices {
        if dedup
            .iter()
            .all(|u| (u[0] - v[0]).abs() > 1e-9 || (u[1] - v[1]).abs() > 1e-9)
        {
            dedup.push(v);
        }
    }
    if dedup.len() < 2 {
        return dedup;
    }
    let start = dedup
        .iter()
        .enumerate()
        .min_by(|(_, p), (_, q)| p.partial_cmp(q).expect("finite vertices"))
        .map(|(k, _)| k)
        .unwrap();
    dedup.rotate_left(start);
    dedup
}

/// Smallest and largest pinnable opponent totals. At the critical factor the
/// bounds are the continuity limits of the neighboring regimes; the exact
/// value there is an open interval over the control-line slope.
pub fn pinning_bounds(spec: &GameSpec) -> Result<(f64, f64)> {
    let n = spec.n_players() as f64;
    let r = spec.factor();
    match region_case(spec) {
        RegionCase::Empty => Err(Error::InfeasiblePinning {
            constraint: format!(
                "feasible region is empty: r = {r} exceeds N/(N-2) = {:.6}",
                n / (n - 2.0)
            ),
            violation: r - n / (n - 2.0),
        }),
        RegionCase::LowR | RegionCase::CriticalR => Ok((n - 1.0, r * (n - 1.0))),
        RegionCase::HighR => Ok((r * (n - 2.0 + 1.0 / n), (n - 1.0) + r * (1.0 - 1.0 / n))),
    }
}

/// Largest factor that still leaves a pinning strategy for `n_players`
/// (`N/(N-2)`); for two players every admissible factor works, so the bound
/// is the factor ceiling `N` itself.
pub fn max_factor_for_pinning(n_players: usize) -> Result<f64> {
    if n_players < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least two players, got {n_players}"
        )));
    }
    let n = n_players as f64;
    if n_players == 2 {
        Ok(n)
    } else {
        Ok(n / (n - 2.0))
    }
}

/// Largest group size in which a factor-`r` pinning strategy exists:
/// `floor(2r / (r-1))`.
pub fn max_players_for_pinning(factor: f64) -> Result<usize> {
    if factor.is_nan() || factor <= 1.0 {
        return Err(Error::DegenerateFactor(format!(
            "pinning bound requires r > 1, got {factor}"
        )));
    }
    let bound = 2.0 * factor / (factor - 1.0);
    Ok((bound + 1e-9).floor() as usize)
}

fn check_control_pair(p_cc: f64, p_dd: f64) -> Result<(f64, f64)> {
    let p_cc = clamp_probability(p_cc)
        .ok_or_else(|| Error::InvalidArgument(format!("p_cc = {p_cc} outside [0, 1]")))?;
    let p_dd = clamp_probability(p_dd)
        .ok_or_else(|| Error::InvalidArgument(format!("p_dd = {p_dd} outside [0, 1]")))?;
    if (p_cc - 1.0).abs() <= REGION_TOL && p_dd.abs() <= REGION_TOL {
        return Err(Error::SingularStrategy(
            "(p_cc, p_dd) = (1, 0) repeats the previous move forever; the chain \
             splits into closed classes"
                .into(),
        ));
    }
    Ok((p_cc, p_dd))
}
