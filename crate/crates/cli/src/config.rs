//! Run configuration, argument helpers and the report envelope.

use std::collections::BTreeMap;
use std::path::Path;

use bf_core::Coeff;
use bf_numeric::Tolerances;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const SCHEMA: &str = "bfcohom-report/1";

/// Largest dimension accepted by the symbolic commands.
pub const MAX_DIMENSION: u32 = 8;

/// Environment variable holding the worker thread count.
pub const THREADS_VAR: &str = "BFCOHOM_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Abstract,
    Gl2,
}

/// Everything that determines the output of a run.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    /// SHA-256 of each input file, keyed by path.
    pub inputs: BTreeMap<String, String>,
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn new(command: &str, tolerances: Tolerances) -> Self {
        RunConfig { command: command.into(), parameters: BTreeMap::new(), inputs: BTreeMap::new(), tolerances }
    }

    pub fn set(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.parameters.insert(key.into(), serde_json::to_value(v).expect("serializable parameter"));
        self
    }

    /// Read an input file and record its digest.
    pub fn read_input(&mut self, path: &Path) -> Result<String> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        self.inputs.insert(path.display().to_string(), format!("{:x}", Sha256::digest(text.as_bytes())));
        Ok(text)
    }

    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("serializable config");
        format!("{:x}", Sha256::digest(&bytes))
    }
}

/// Result of one command before it is wrapped into a report.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub passed: bool,
    pub summary: Vec<String>,
    pub results: Value,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunReport {
    pub schema: String,
    pub config: RunConfig,
    pub config_hash: String,
    pub threads: usize,
    pub passed: bool,
    pub summary: Vec<String>,
    pub results: Value,
}

impl RunReport {
    pub fn new(config: RunConfig, outcome: Outcome) -> Self {
        RunReport {
            schema: SCHEMA.into(),
            config_hash: config.hash(),
            config,
            threads: rayon::current_num_threads(),
            passed: outcome.passed,
            summary: outcome.summary,
            results: outcome.results,
        }
    }
}

/// `3..6` (inclusive), `4` or `3,5,7`.
pub fn parse_dimensions(s: &str) -> Result<Vec<u32>> {
    let bad = || CliError::Argument(format!("cannot read dimensions from `{s}`; use e.g. `4`, `3..6` or `3,5`"));
    let dims: Vec<u32> = if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    for &n in &dims {
        check_dimension(n)?;
    }
    Ok(dims)
}

pub fn check_dimension(n: u32) -> Result<()> {
    if !(3..=MAX_DIMENSION).contains(&n) {
        return Err(CliError::Argument(format!("dimension n = {n} outside the supported range 3..={MAX_DIMENSION}")));
    }
    Ok(())
}

/// A rational (`2`, `-1/2`) or a formal parameter (`kappa`, `-lambda1`).
pub fn parse_coeff(s: &str) -> Result<Coeff> {
    let t = s.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(r) => (true, r.trim()),
        None => (false, t),
    };
    let c = if let Ok(q) = body.parse::<bf_core::Q>() {
        Coeff::from_q(q)
    } else if !body.is_empty() && body.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) && body.chars().all(|c| c.is_ascii_alphanumeric()) {
        Coeff::param(body, 1)
    } else {
        return Err(CliError::Argument(format!("cannot read coefficient `{s}`")));
    };
    Ok(c.signed(neg))
}

pub fn parse_coeffs(s: &str) -> Result<Vec<Coeff>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_coeff).collect()
}

pub fn coeff_strings(cs: &[Coeff]) -> Vec<String> {
    cs.iter().map(ToString::to_string).collect()
}
