//! Run configuration: a flat `key = value` text format with sections.
//!
//! ```text
//! # lines starting with # or ; are comments
//! [fluid]
//! rho = 900.0
//! mu = 0.05
//!
//! [pressure]
//! constant = 0.0        # or: samples = pressure.csv
//!
//! [solver]
//! method = adams_moulton_2
//! step = 0.01
//! newton_tol = 1e-10
//! newton_max_iter = 25
//! max_steps = 10000000
//!
//! [convention]
//! mode = pseudoinverse
//!
//! [strategy]
//! mode = shared_pool:4
//!
//! [io]
//! input = lines.csv
//! output = solutions.csv
//! ```
//!
//! Unknown sections or keys are rejected with their line number; every key
//! mirrors a [`RunConfig`] field and missing keys keep their defaults.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::batch::ExecutionStrategy;
use crate::ode::{InverseMapMode, SolverConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: unknown section [{section}]")]
    UnknownSection { line: usize, section: String },
    #[error("line {line}: unknown key '{key}' in section [{section}]")]
    UnknownKey {
        line: usize,
        key: String,
        section: String,
    },
    #[error("line {line}: key '{key}' appears before any section header")]
    KeyOutsideSection { line: usize, key: String },
    #[error("line {line}: expected 'key = value', got '{text}'")]
    Malformed { line: usize, text: String },
    #[error("line {line}: invalid value for '{key}': {message}")]
    BadValue {
        line: usize,
        key: String,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Pressure specification: a constant value or a samples file (CSV `s,q`).
#[derive(Debug, Clone, PartialEq)]
pub enum PressureSpec {
    Constant(f64),
    Samples(PathBuf),
}

/// Validated run parameters for the solve and bench commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub fluid_rho: f64,
    pub fluid_mu: f64,
    pub pressure: PressureSpec,
    pub solver: SolverConfig,
    pub convention: InverseMapMode,
    pub strategy: ExecutionStrategy,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            fluid_rho: 1.0,
            fluid_mu: 1.0,
            pressure: PressureSpec::Constant(0.0),
            solver: SolverConfig::default(),
            convention: InverseMapMode::Pseudoinverse,
            strategy: ExecutionStrategy::Serial,
            input: None,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = RunConfig::default();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = match raw.find(['#', ';']) {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let trimmed = stripped.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(name) = trimmed.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::Malformed {
                        line,
                        text: trimmed.to_string(),
                    })?
                    .trim()
                    .to_string();
                if !["fluid", "pressure", "solver", "convention", "strategy", "io"]
                    .contains(&name.as_str())
                {
                    return Err(ConfigError::UnknownSection { line, section: name });
                }
                section = Some(name);
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| ConfigError::Malformed {
                line,
                text: trimmed.to_string(),
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            let section = section.as_deref().ok_or_else(|| ConfigError::KeyOutsideSection {
                line,
                key: key.clone(),
            })?;
            config.apply(section, &key, &value, line)?;
        }
        config.validate()?;
        Ok(config)
    }

    fn apply(&mut self, section: &str, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        let bad = |message: String| ConfigError::BadValue {
            line,
            key: key.to_string(),
            message,
        };
        let parse_f64 = |v: &str| v.parse::<f64>().map_err(|e| bad(e.to_string()));
        let parse_usize = |v: &str| v.parse::<usize>().map_err(|e| bad(e.to_string()));
        match (section, key) {
            ("fluid", "rho") => self.fluid_rho = parse_f64(value)?,
            ("fluid", "mu") => self.fluid_mu = parse_f64(value)?,
            ("pressure", "constant") => self.pressure = PressureSpec::Constant(parse_f64(value)?),
            ("pressure", "samples") => self.pressure = PressureSpec::Samples(PathBuf::from(value)),
            ("solver", "method") => self.solver.method = value.parse().map_err(bad)?,
            ("solver", "step") => self.solver.step = parse_f64(value)?,
            ("solver", "newton_tol") => self.solver.newton_tol = parse_f64(value)?,
            ("solver", "newton_max_iter") => self.solver.newton_max_iter = parse_usize(value)?,
            ("solver", "max_steps") => self.solver.max_steps = parse_usize(value)?,
            ("convention", "mode") => self.convention = value.parse().map_err(bad)?,
            ("strategy", "mode") => self.strategy = value.parse().map_err(bad)?,
            ("io", "input") => self.input = Some(PathBuf::from(value)),
            ("io", "output") => self.output = Some(PathBuf::from(value)),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                    section: section.to_string(),
                })
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.fluid_mu > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "fluid mu must be positive, got {}",
                self.fluid_mu
            )));
        }
        if !(self.fluid_rho >= 0.0) {
            return Err(ConfigError::Invalid(format!(
                "fluid rho must be nonnegative, got {}",
                self.fluid_rho
            )));
        }
        self.solver
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }
}
