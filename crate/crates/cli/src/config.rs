//! Flag / config-file / default resolution. A `--config` JSON file mirrors
//! the command-line flags by long name; explicit flags win.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::{CommonArgs, Failure};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub r: Option<f64>,
    pub format: Option<String>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub pcc: Option<f64>,
    pub pdd: Option<f64>,
    pub chi: Option<f64>,
    pub phi: Option<f64>,
    pub profile: Option<PathBuf>,
    pub verify: Option<bool>,
    pub focal: Option<String>,
    pub opponents: Option<String>,
    pub trials: Option<u64>,
    pub rounds: Option<u64>,
    pub discard: Option<u64>,
    pub analytic: Option<bool>,
    pub mode: Option<String>,
    pub n_range: Option<String>,
    pub samples: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::invalid(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::invalid(format!("invalid config {}: {e}", path.display())))
    }
}

/// Resolved common options plus the parsed config for command-specific
/// fields.
pub struct Resolved {
    pub file: FileConfig,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    n: Option<usize>,
    r: Option<f64>,
}

impl Resolved {
    pub fn new(common: &CommonArgs) -> Result<Self, Failure> {
        let file = FileConfig::load(common.config.as_deref())?;
        let format = match common
            .format
            .clone()
            .or_else(|| file.format.clone())
            .unwrap_or_else(|| "csv".into())
            .as_str()
        {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            other => {
                return Err(Failure::invalid(format!(
                    "unknown format {other:?}; expected csv or json"
                )))
            }
        };
        Ok(Self {
            format,
            output: common.output.clone().or_else(|| file.output.clone()),
            seed: common.seed.or(file.seed),
            n: common.n.or(file.n),
            r: common.r.or(file.r),
            file,
        })
    }

    pub fn game_spec(&self) -> Result<ipgg::GameSpec, Failure> {
        let n = self.n.ok_or_else(|| Failure::invalid("--n is required"))?;
        let r = self.r.ok_or_else(|| Failure::invalid("--r is required"))?;
        Ok(ipgg::GameSpec::new(n, r)?)
    }

    pub fn factor(&self) -> Option<f64> {
        self.r
    }

    pub fn require_seed(&self) -> Result<u64, Failure> {
        self.seed
            .ok_or_else(|| Failure::invalid("--seed is required (no wall-clock seeding)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

pub fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

pub fn require<T>(value: Option<T>, name: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::invalid(format!("--{name} is required")))
}

/// Inclusive `A:B` group-size range.
pub fn parse_n_range(text: &str) -> Result<(usize, usize), Failure> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| Failure::invalid(format!("bad n-range {text:?}; expected A:B")))?;
    let lo: usize = a
        .parse()
        .map_err(|_| Failure::invalid(format!("bad n-range start {a:?}")))?;
    let hi: usize = b
        .parse()
        .map_err(|_| Failure::invalid(format!("bad n-range end {b:?}")))?;
    if lo < 2 || hi < lo || hi > 1_000_000 {
        return Err(Failure::invalid(format!(
            "n-range {lo}:{hi} must satisfy 2 <= A <= B <= 1000000"
        )));
    }
    Ok((lo, hi))
}
