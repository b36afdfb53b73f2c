//! Compact strategy and generator descriptors used by `sweep`:
//! `pin:PCC,PDD`, `extort:CHI[,PHI]`, `wsls`, `always-c`, `always-d`,
//! `constant:P`, `file:PATH`.

use serde::Deserialize;

use ipgg::sim::OpponentGenerator;
use ipgg::{extortion, pinning, GameSpec, ReducedStrategy};

use crate::Failure;

#[derive(Deserialize)]
struct RawStrategy {
    pc: Vec<f64>,
    pd: Vec<f64>,
}

impl RawStrategy {
    fn build(self) -> Result<ReducedStrategy, Failure> {
        Ok(ReducedStrategy::new(self.pc, self.pd)?)
    }
}

pub fn parse_focal(spec: &GameSpec, text: &str) -> Result<ReducedStrategy, Failure> {
    let n = spec.n_players();
    match text.split_once(':') {
        None => match text {
            "wsls" => Ok(ReducedStrategy::win_stay_lose_shift(n)),
            "always-c" => Ok(ReducedStrategy::always_cooperate(n)),
            "always-d" => Ok(ReducedStrategy::always_defect(n)),
            other => Err(Failure::invalid(format!(
                "unknown focal strategy {other:?}"
            ))),
        },
        Some(("pin", rest)) => {
            let (pcc, pdd) = pair(rest, "pin:PCC,PDD")?;
            Ok(pinning::pinning_strategy(spec, pcc, pdd)?)
        }
        Some(("extort", rest)) => {
            let parts: Vec<&str> = rest.split(',').collect();
            let chi = parse_f64(parts[0], "chi")?;
            let phi = match parts.len() {
                1 => extortion::default_phi(spec, chi)?,
                2 => parse_f64(parts[1], "phi")?,
                _ => return Err(Failure::invalid("expected extort:CHI[,PHI]")),
            };
            Ok(extortion::extortion_strategy(spec, chi, phi)?)
        }
        Some(("constant", rest)) => {
            let p = parse_f64(rest, "constant probability")?;
            Ok(ReducedStrategy::constant(n, p)?)
        }
        Some(("file", path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::invalid(format!("cannot read {path}: {e}")))?;
            let raw: RawStrategy = serde_json::from_str(&text)
                .map_err(|e| Failure::invalid(format!("invalid strategy file {path}: {e}")))?;
            let strategy = raw.build()?;
            if strategy.arity() != n {
                return Err(Failure::invalid(format!(
                    "strategy file {path} has {} entries per list, expected {n}",
                    strategy.arity()
                )));
            }
            Ok(strategy)
        }
        Some((kind, _)) => Err(Failure::invalid(format!(
            "unknown focal strategy kind {kind:?}"
        ))),
    }
}

pub fn parse_generator(text: &str) -> Result<OpponentGenerator, Failure> {
    match text {
        "uniform" => return Ok(OpponentGenerator::UniformRandomReduced),
        "always-c" => return Ok(OpponentGenerator::AlwaysCooperate),
        "always-d" => return Ok(OpponentGenerator::AlwaysDefect),
        "wsls" => return Ok(OpponentGenerator::WinStayLoseShift),
        _ => {}
    }
    if let Some(("constant", rest)) = text.split_once(':') {
        let p = parse_f64(rest, "constant probability")?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Failure::invalid(format!(
                "constant probability {p} outside [0, 1]"
            )));
        }
        return Ok(OpponentGenerator::Constant(p));
    }
    Err(Failure::invalid(format!(
        "unknown opponent generator {text:?}"
    )))
}

/// Reads a profile file: a JSON array of N reduced strategies.
pub fn parse_profile(
    spec: &GameSpec,
    path: &std::path::Path,
) -> Result<Vec<ReducedStrategy>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))?;
    let raw: Vec<RawStrategy> = serde_json::from_str(&text)
        .map_err(|e| Failure::invalid(format!("invalid profile {}: {e}", path.display())))?;
    if raw.len() != spec.n_players() {
        return Err(Failure::invalid(format!(
            "profile {} has {} strategies, expected {}",
            path.display(),
            raw.len(),
            spec.n_players()
        )));
    }
    let strategies = raw
        .into_iter()
        .map(RawStrategy::build)
        .collect::<Result<Vec<_>, _>>()?;
    for s in &strategies {
        if s.arity() != spec.n_players() {
            return Err(Failure::invalid(format!(
                "profile strategy has {} entries per list, expected {}",
                s.arity(),
                spec.n_players()
            )));
        }
    }
    Ok(strategies)
}

fn pair(text: &str, usage: &str) -> Result<(f64, f64), Failure> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| Failure::invalid(format!("expected {usage}")))?;
    Ok((parse_f64(a, "first value")?, parse_f64(b, "second value")?))
}

fn parse_f64(text: &str, what: &str) -> Result<f64, Failure> {
    text.trim()
        .parse()
        .map_err(|_| Failure::invalid(format!("cannot parse {what} from {text:?}")))
}
