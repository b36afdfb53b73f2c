//! Extortion strategies: the focal player's surplus over the free-rider
//! payoff is forced to be `chi` times the opponents' total surplus. The
//! admissible `chi` interval, the scale bound `phi_max`, and the large-group
//! behavior of the effective ratio `chi * (N - 1)` are all closed forms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{clamp_probability, GameSpec, ReducedStrategy, PROB_TOL};

const BOUND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtortionParams {
    pub chi: f64,
    pub phi: f64,
}

/// Admissible extortion ratios: `chi >= 1/(N-1)` always, with the upper
/// bound `r / (r(N-1) - N)` once the factor exceeds `N/(N-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiBounds {
    pub lower: f64,
    /// `None` when unbounded (`r <= N/(N-1)`).
    pub upper: Option<f64>,
}

impl ChiBounds {
    pub fn contains(&self, chi: f64) -> bool {
        chi >= self.lower - BOUND_TOL && self.upper.is_none_or(|u| chi <= u + BOUND_TOL)
    }

    fn violation(&self, chi: f64) -> Option<String> {
        if chi < self.lower - BOUND_TOL {
            return Some(format!(
                "chi = {chi} is below the lower bound 1/(N-1) = {:.6}",
                self.lower
            ));
        }
        if let Some(upper) = self.upper {
            if chi > upper + BOUND_TOL {
                return Some(format!(
                    "chi = {chi} exceeds the upper bound r/(r(N-1)-N) = {upper:.6}"
                ));
            }
        }
        None
    }
}

pub fn chi_bounds(spec: &GameSpec) -> ChiBounds {
    let n = spec.n_players() as f64;
    let r = spec.factor();
    let lower = 1.0 / (n - 1.0);
    let denom = r * (n - 1.0) - n;
    let upper = if denom > 0.0 { Some(r / denom) } else { None };
    ChiBounds { lower, upper }
}

/// Largest admissible scale for a given ratio: `N / (N - r + chi*r*(N-1))`.
/// Exactly 1 at the minimal ratio `chi = 1/(N-1)`.
pub fn phi_max(spec: &GameSpec, chi: f64) -> Result<f64> {
    let bounds = chi_bounds(spec);
    if let Some(constraint) = bounds.violation(chi) {
        return Err(Error::InfeasibleExtortion {
            constraint,
            violation: (chi - bounds.lower)
                .abs()
                .min(bounds.upper.map_or(f64::INFINITY, |u| (chi - u).abs())),
        });
    }
    let n = spec.n_players() as f64;
    let r = spec.factor();
    Ok(n / (n - r + chi * r * (n - 1.0)))
}

/// Half the maximum scale: a safe interior default when the caller does not
/// pick a `phi`.
pub fn default_phi(spec: &GameSpec, chi: f64) -> Result<f64> {
    Ok(phi_max(spec, chi)? / 2.0)
}

/// Synthesizes the chi-extortion strategy with scale `phi`; after mutual
/// defection the extortioner never cooperates (`pd[0] = 0`).
pub fn extortion_strategy(spec: &GameSpec, chi: f64, phi: f64) -> Result<ReducedStrategy> {
    let limit = phi_max(spec, chi)?;
    if phi.is_nan() || phi <= 0.0 {
        return Err(Error::InfeasibleExtortion {
            constraint: format!("phi must be positive, got {phi}"),
            violation: -phi,
        });
    }
    if phi > limit + BOUND_TOL {
        return Err(Error::InfeasibleExtortion {
            constraint: format!(
                "phi = {phi} exceeds phi_max = {limit:.6} at chi = {chi} \
                 (drives p_C(0) below 0)"
            ),
            violation: phi - limit,
        });
    }

    let (pc, pd) = raw_entries(spec, chi, phi);
    let mut worst: Option<(String, f64)> = None;
    for (label, list) in [("p_C", &pc), ("p_D", &pd)] {
        for (n, &p) in list.iter().enumerate() {
            let violation = if p < 0.0 { -p } else { (p - 1.0).max(0.0) };
            if violation > PROB_TOL && worst.as_ref().is_none_or(|w| violation > w.1) {
                worst = Some((
                    format!("{label}({n}) = {p:.9} outside [0, 1] at chi = {chi}, phi = {phi}"),
                    violation,
                ));
            }
        }
    }
    if let Some((constraint, violation)) = worst {
        return Err(Error::InfeasibleExtortion {
            constraint,
            violation,
        });
    }

    ReducedStrategy::new(
        pc.into_iter()
            .map(|p| clamp_probability(p).unwrap())
            .collect(),
        pd.into_iter()
            .map(|p| clamp_probability(p).unwrap())
            .collect(),
    )
}

fn raw_entries(spec: &GameSpec, chi: f64, phi: f64) -> (Vec<f64>, Vec<f64>) {
    let n = spec.n_players() as f64;
    let r = spec.factor();
    let pd: Vec<f64> = (0..spec.n_players())
        .map(|k| {
            let k = k as f64;
            phi * (r * k / n - chi * (r * k * (n - 1.0) - k * n) / n)
        })
        .collect();
    let offset = phi * ((r - n) / n - chi * r * (n - 1.0) / n);
    let pc = pd.iter().map(|p| 1.0 + p + offset).collect();
    (pc, pd)
}

/// Limit of the effective ratio bound `chi_max * (N-1)` as the group grows:
/// `r / (r - 1)`.
pub fn effective_ratio_limit(factor: f64) -> Result<f64> {
    if factor.is_nan() || factor <= 1.0 {
        return Err(Error::DegenerateFactor(format!(
            "effective ratio limit requires r > 1, got {factor}"
        )));
    }
    Ok(factor / (factor - 1.0))
}

/// Finite-group effective ratio bound `chi_max * (N-1) = r(N-1)/(r(N-1)-N)`;
/// `None` while the ratio is unbounded (`r <= N/(N-1)`).
pub fn effective_ratio_bound(n_players: usize, factor: f64) -> Result<Option<f64>> {
    if n_players < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least two players, got {n_players}"
        )));
    }
    if factor.is_nan() || factor <= 1.0 {
        return Err(Error::DegenerateFactor(format!(
            "effective ratio bound requires r > 1, got {factor}"
        )));
    }
    let n = n_players as f64;
    let denom = factor * (n - 1.0) - n;
    if denom > 0.0 {
        Ok(Some(factor * (n - 1.0) / denom))
    } else {
        Ok(None)
    }
}
