//! Experiment configuration files: one TOML per run, strictly parsed.
//! No environment-variable configuration; identical config + seed must
//! reproduce byte-identical reports.

use crate::info::DivergenceSpec;
use crate::randomness::QuantizerSpec;
use crate::solver::{ConstraintMode, PerceptionBound, SolverConfig, StepRule};
use serde::Deserialize;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {err}")]
    Io { path: String, err: String },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config invalid: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    RdCurve,
    RdcpCurve,
    Oneshot,
    Pipeline,
    Overhead,
    Traversal,
    Randomness,
    FloatEntropy,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::RdCurve => "rd-curve",
            ExperimentKind::RdcpCurve => "rdcp-curve",
            ExperimentKind::Oneshot => "oneshot",
            ExperimentKind::Pipeline => "pipeline",
            ExperimentKind::Overhead => "overhead",
            ExperimentKind::Traversal => "traversal",
            ExperimentKind::Randomness => "randomness",
            ExperimentKind::FloatEntropy => "float-entropy",
        }
    }
}

/// A perception bound in config space: a number or the string "inf".
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum PBoundToml {
    Level(f64),
    Tag(PInfTag),
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub enum PInfTag {
    #[serde(rename = "inf")]
    Inf,
}

impl PBoundToml {
    pub fn to_bound(self) -> PerceptionBound {
        match self {
            PBoundToml::Level(v) => PerceptionBound::Level(v),
            PBoundToml::Tag(_) => PerceptionBound::Unconstrained,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfigToml {
    pub tolerance_bits: Option<f64>,
    pub max_iterations: Option<usize>,
    pub step_rule: Option<String>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "kind")]
pub enum QuantizerToml {
    Binary32,
    Uniform { delta: f64 },
    Grid { delta: f64, lo: f64, hi: f64 },
}

impl QuantizerToml {
    pub fn to_spec(self) -> QuantizerSpec {
        match self {
            QuantizerToml::Binary32 => QuantizerSpec::Binary32Like,
            QuantizerToml::Uniform { delta } => QuantizerSpec::Uniform { delta },
            QuantizerToml::Grid { delta, lo, hi } => QuantizerSpec::UniformGrid { delta, lo, hi },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub source: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub distortion: Option<String>,
    pub divergence: Option<String>,
    pub constraint_mode: Option<String>,
    pub d_grid: Option<Vec<f64>>,
    pub p_grid: Option<Vec<PBoundToml>>,
    pub trials: Option<u64>,
    pub m_budget: Option<usize>,
    pub alphas: Option<Vec<f64>>,
    pub instances: Option<usize>,
    pub samples: Option<u64>,
    pub kernel: Option<String>,
    pub kernel_d: Option<f64>,
    pub quantizer: Option<QuantizerToml>,
    pub solver: Option<SolverConfigToml>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<(Self, Vec<u8>), ConfigError> {
        let bytes = std::fs::read(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            err: e.to_string(),
        })?;
        let text = String::from_utf8_lossy(&bytes);
        Ok((Self::parse(&text)?, bytes))
    }

    pub fn solver_config(&self) -> Result<SolverConfig, ConfigError> {
        let mut cfg = SolverConfig::default();
        if let Some(s) = &self.solver {
            if let Some(t) = s.tolerance_bits {
                if !(t > 0.0) {
                    return Err(ConfigError::Invalid(format!("tolerance_bits {t} must be > 0")));
                }
                cfg.tolerance_bits = t;
            }
            if let Some(m) = s.max_iterations {
                cfg.max_iterations = m;
            }
            if let Some(rule) = &s.step_rule {
                cfg.step_rule = match rule.as_str() {
                    "line-search" => StepRule::LineSearch,
                    "classic" => StepRule::Classic,
                    other => {
                        return Err(ConfigError::Invalid(format!("unknown step rule `{other}`")))
                    }
                };
            }
        }
        Ok(cfg)
    }

    pub fn divergence_spec(&self) -> Result<DivergenceSpec, ConfigError> {
        let name = self
            .divergence
            .as_deref()
            .ok_or_else(|| ConfigError::Invalid("missing `divergence` (tv|kl|w2)".into()))?;
        DivergenceSpec::parse(name)
            .ok_or_else(|| ConfigError::Invalid(format!("unknown divergence `{name}`")))
    }

    pub fn constraint_mode(&self) -> Result<ConstraintMode, ConfigError> {
        match self.constraint_mode.as_deref() {
            None | Some("per-y") => Ok(ConstraintMode::PerY),
            Some("y-averaged") => Ok(ConstraintMode::YAveraged),
            Some(other) => Err(ConfigError::Invalid(format!("unknown constraint mode `{other}`"))),
        }
    }

    pub fn require_seed(&self) -> Result<u64, ConfigError> {
        self.seed.ok_or_else(|| {
            ConfigError::Invalid("stochastic experiments require an explicit `seed`".into())
        })
    }

    pub fn require_source(&self) -> Result<&std::path::Path, ConfigError> {
        self.source
            .as_deref()
            .ok_or_else(|| ConfigError::Invalid("missing `source` path".into()))
    }

    pub fn require_d_grid(&self) -> Result<&[f64], ConfigError> {
        match self.d_grid.as_deref() {
            Some(g) if !g.is_empty() => Ok(g),
            Some(_) => Err(ConfigError::Invalid("`d_grid` is empty".into())),
            None => Err(ConfigError::Invalid("missing `d_grid`".into())),
        }
    }
}
