//! Experiment configuration: a versioned JSON document that fully
//! determines every output byte of a run (except timestamps).
//!
//! Unknown keys are rejected, and a parsed configuration re-serializes to
//! an equivalent document (lossless round-trip).

use crate::error::HarnessError;
use clipopt_core::moreau::{MoreauConfig, DEFAULT_MAX_INNER, DEFAULT_TOL_PROX};
use clipopt_core::problems::{
    gen_abs_regression, gen_phase_retrieval, make_quartic, AbsRegressionSpec, PhaseRetrievalSpec,
    ProblemInstance, QuarticSpec,
};
use clipopt_core::schedule::ScheduleSet;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Sgd,
    ClippedSgd,
    Shb,
    ClippedShb,
}

impl Algorithm {
    pub fn clipped(self) -> bool {
        matches!(self, Self::ClippedSgd | Self::ClippedShb)
    }

    pub fn momentum(self) -> bool {
        matches!(self, Self::Shb | Self::ClippedShb)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemConfig {
    Quartic {
        epsilon: f64,
        noise: f64,
    },
    PhaseRetrieval {
        m: usize,
        n: usize,
        kappa: f64,
        p_fail: f64,
        #[serde(default = "default_corruption_variance")]
        corruption_variance: f64,
    },
    AbsRegression {
        m: usize,
        n: usize,
        kappa: f64,
        noise: f64,
    },
}

fn default_corruption_variance() -> f64 {
    25.0
}

impl ProblemConfig {
    /// Builds the instance from the given data seed.
    pub fn build(&self, seed: u64) -> Result<ProblemInstance, HarnessError> {
        match *self {
            Self::Quartic { epsilon, noise } => {
                Ok(make_quartic(QuarticSpec::new(epsilon, noise))?)
            }
            Self::PhaseRetrieval { m, n, kappa, p_fail, corruption_variance } => {
                Ok(gen_phase_retrieval(
                    PhaseRetrievalSpec { m, n, kappa, p_fail, corruption_variance },
                    seed,
                )?)
            }
            Self::AbsRegression { m, n, kappa, noise } => {
                Ok(gen_abs_regression(AbsRegressionSpec { m, n, kappa, noise }, seed)?)
            }
        }
    }
}

/// Run length: a fixed iteration count, or passes over the data (one
/// epoch = `sample_count` oracle draws).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Budget {
    Epochs(u64),
    Iterations(u64),
}

/// Moreau-envelope settings for the diagnostic channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoreauSettings {
    /// Envelope parameter; defaults to `1/(2 rho)` of the instance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default = "default_tol_prox")]
    pub tol_prox: f64,
    #[serde(default = "default_max_inner")]
    pub max_inner: u64,
}

fn default_tol_prox() -> f64 {
    DEFAULT_TOL_PROX
}

fn default_max_inner() -> u64 {
    DEFAULT_MAX_INNER
}

impl MoreauSettings {
    pub fn resolve(&self, inst: &ProblemInstance) -> Result<MoreauConfig, HarnessError> {
        let rho = inst.rho().ok_or_else(|| {
            HarnessError::config("instance has no certified weak-convexity modulus")
        })?;
        let cfg = match self.lambda {
            Some(lambda) => MoreauConfig::new(lambda, rho)?,
            None => MoreauConfig::half_inverse_rho(rho)?,
        };
        Ok(cfg.with_tolerance(self.tol_prox, self.max_inner))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub problem: ProblemConfig,
    pub algorithm: Algorithm,
    pub schedules: ScheduleSet,
    pub trials: u32,
    pub budget: Budget,
    pub seed: u64,
    /// Initial-stepsize grid for sweep mode.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alpha0_grid: Vec<f64>,
    /// Accuracy targets for the epoch-to-eps statistic.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eps_list: Vec<f64>,
    /// Iteration stride of the Lyapunov/envelope diagnostics.
    #[serde(default = "default_diag_stride")]
    pub diagnostic_stride: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moreau: Option<MoreauSettings>,
    /// Share problem data across trials (lower variance in comparisons);
    /// with `false`, every trial regenerates its instance.
    #[serde(default = "default_true")]
    pub shared_data: bool,
    /// Record every `trace_stride`-th iteration (epoch boundaries, the
    /// final iterate, and divergence records are always kept).
    #[serde(default = "default_one")]
    pub trace_stride: u64,
    /// Override the random initial iterate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
}

fn default_diag_stride() -> u64 {
    10
}

fn default_true() -> bool {
    true
}

fn default_one() -> u64 {
    1
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.version != CONFIG_VERSION {
            return Err(HarnessError::config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if self.trials == 0 {
            return Err(HarnessError::config("trials must be >= 1"));
        }
        match self.budget {
            Budget::Epochs(0) | Budget::Iterations(0) => {
                return Err(HarnessError::config("budget must be >= 1"));
            }
            _ => {}
        }
        self.schedules.validate()?;
        if self.algorithm.clipped() && self.schedules.clip.is_none() {
            return Err(HarnessError::config("clipped algorithm requires a clip schedule"));
        }
        if !self.algorithm.clipped() && self.schedules.clip.is_some() {
            return Err(HarnessError::config("unclipped algorithm must not set a clip schedule"));
        }
        if self.algorithm.momentum() && self.schedules.momentum.is_none() {
            return Err(HarnessError::config("heavy-ball algorithm requires a momentum schedule"));
        }
        if !self.algorithm.momentum() && self.schedules.momentum.is_some() {
            return Err(HarnessError::config("sgd algorithm must not set a momentum schedule"));
        }
        if self.alpha0_grid.iter().any(|a| !(*a > 0.0)) {
            return Err(HarnessError::config("alpha0 grid values must be positive"));
        }
        if self.eps_list.iter().any(|e| !(*e > 0.0)) {
            return Err(HarnessError::config("eps values must be positive"));
        }
        if self.diagnostic_stride == 0 || self.trace_stride == 0 {
            return Err(HarnessError::config("strides must be >= 1"));
        }
        if let Some(x0) = &self.x0 {
            if x0.iter().any(|v| !v.is_finite()) {
                return Err(HarnessError::config("x0 override must be finite"));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| HarnessError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io_at(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    /// Copy of this config with a different initial stepsize (sweep mode).
    pub fn with_alpha0(&self, alpha0: f64) -> Self {
        use clipopt_core::schedule::StepSchedule;
        let mut cfg = self.clone();
        cfg.schedules.step = match cfg.schedules.step {
            StepSchedule::Polynomial { tau, .. } => StepSchedule::Polynomial { alpha0, tau },
            StepSchedule::Constant { .. } => StepSchedule::Constant { alpha0 },
        };
        cfg
    }
}
