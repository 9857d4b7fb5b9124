//! Parameter schedules: stepsize, clip threshold, momentum, batch size.
//!
//! Each schedule is a pure function of the iteration counter `k`, so two
//! runs with the same configuration evaluate identical parameter sequences.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("initial stepsize must be positive, got {0}")]
    NonPositiveStepsize(f64),
    #[error("decay exponent must lie in [0, 1], got {0}")]
    BadDecayExponent(f64),
    #[error("clip threshold scale must be positive, got {0}")]
    NonPositiveClip(f64),
    #[error("momentum ratio must be positive, got {0}")]
    NonPositiveMomentumRatio(f64),
    #[error("momentum parameter must lie in (0, 1], got {0}")]
    MomentumOutOfRange(f64),
    #[error("nu * alpha0 = {0} exceeds 1 and clamping is disabled")]
    MomentumExceedsOne(f64),
    #[error("fixed batch size must be >= 1")]
    EmptyBatch,
}

/// Stepsize sequence `alpha_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StepSchedule {
    /// `alpha_k = alpha0 * (k+1)^(-tau)`.
    Polynomial { alpha0: f64, tau: f64 },
    /// `alpha_k = alpha0`.
    Constant { alpha0: f64 },
}

impl StepSchedule {
    pub fn polynomial(alpha0: f64, tau: f64) -> Result<Self, ScheduleError> {
        if alpha0 <= 0.0 || !alpha0.is_finite() {
            return Err(ScheduleError::NonPositiveStepsize(alpha0));
        }
        if !(0.0..=1.0).contains(&tau) {
            return Err(ScheduleError::BadDecayExponent(tau));
        }
        Ok(Self::Polynomial { alpha0, tau })
    }

    pub fn constant(alpha0: f64) -> Result<Self, ScheduleError> {
        if alpha0 <= 0.0 || !alpha0.is_finite() {
            return Err(ScheduleError::NonPositiveStepsize(alpha0));
        }
        Ok(Self::Constant { alpha0 })
    }

    pub fn alpha(&self, k: u64) -> f64 {
        match *self {
            Self::Polynomial { alpha0, tau } => alpha0 * ((k + 1) as f64).powf(-tau),
            Self::Constant { alpha0 } => alpha0,
        }
    }

    pub fn alpha0(&self) -> f64 {
        match *self {
            Self::Polynomial { alpha0, .. } | Self::Constant { alpha0 } => alpha0,
        }
    }
}

/// Clip-threshold sequence `gamma_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ClipSchedule {
    /// `gamma_k = gamma`.
    Constant { gamma: f64 },
    /// `gamma_k = gamma / sqrt(alpha_k)`, coupled to the step schedule.
    Coupled { gamma: f64 },
}

impl ClipSchedule {
    pub fn constant(gamma: f64) -> Result<Self, ScheduleError> {
        if gamma <= 0.0 || !gamma.is_finite() {
            return Err(ScheduleError::NonPositiveClip(gamma));
        }
        Ok(Self::Constant { gamma })
    }

    pub fn coupled(gamma: f64) -> Result<Self, ScheduleError> {
        if gamma <= 0.0 || !gamma.is_finite() {
            return Err(ScheduleError::NonPositiveClip(gamma));
        }
        Ok(Self::Coupled { gamma })
    }

    pub fn gamma_at(&self, alpha_k: f64) -> f64 {
        match *self {
            Self::Constant { gamma } => gamma,
            Self::Coupled { gamma } => gamma / alpha_k.sqrt(),
        }
    }

    /// The threshold scale `gamma` (the constant in `gamma_k <= gamma/sqrt(alpha_k)`).
    pub fn gamma_scale(&self) -> f64 {
        match *self {
            Self::Constant { gamma } | Self::Coupled { gamma } => gamma,
        }
    }
}

/// Momentum sequence `beta_k` for the stochastic heavy ball method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MomentumSchedule {
    /// `beta_k = nu * alpha_k`, the single-time-scale coupling. With
    /// `clamp` set, values above 1 are clamped to 1; otherwise
    /// construction fails when `nu * alpha0 > 1`.
    Proportional {
        nu: f64,
        #[serde(default)]
        clamp: bool,
    },
    /// `beta_k = beta` for all k, as used by the experiment presets
    /// (e.g. 1 - beta in {0.9, 0.99}).
    Constant { beta: f64 },
}

impl MomentumSchedule {
    pub fn proportional(nu: f64, clamp: bool, step: &StepSchedule) -> Result<Self, ScheduleError> {
        if nu <= 0.0 || !nu.is_finite() {
            return Err(ScheduleError::NonPositiveMomentumRatio(nu));
        }
        let beta0 = nu * step.alpha0();
        if beta0 > 1.0 && !clamp {
            return Err(ScheduleError::MomentumExceedsOne(beta0));
        }
        Ok(Self::Proportional { nu, clamp })
    }

    pub fn constant(beta: f64) -> Result<Self, ScheduleError> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(ScheduleError::MomentumOutOfRange(beta));
        }
        Ok(Self::Constant { beta })
    }

    pub fn beta_at(&self, alpha_k: f64) -> f64 {
        match *self {
            Self::Proportional { nu, clamp } => {
                let beta = nu * alpha_k;
                if clamp {
                    beta.min(1.0)
                } else {
                    beta
                }
            }
            Self::Constant { beta } => beta,
        }
    }
}

/// Mini-batch size sequence `m_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BatchSchedule {
    /// `m_k = 1`.
    Unit,
    /// `m_k = m0`.
    Fixed { m0: u64 },
    /// `m_k = ceil(1/alpha_k)`. The ceiling guarantees `m_k >= 1` and
    /// `m_k >= 1/alpha_k`, preserving the summability condition
    /// `sum alpha_k / m_k < inf` behind the almost-sure convergence of
    /// mini-batched clipped SGD.
    InverseStep,
}

impl BatchSchedule {
    pub fn fixed(m0: u64) -> Result<Self, ScheduleError> {
        if m0 == 0 {
            return Err(ScheduleError::EmptyBatch);
        }
        Ok(Self::Fixed { m0 })
    }

    pub fn batch_at(&self, alpha_k: f64) -> u64 {
        match *self {
            Self::Unit => 1,
            Self::Fixed { m0 } => m0,
            Self::InverseStep => (1.0 / alpha_k).ceil().max(1.0) as u64,
        }
    }
}

impl Default for BatchSchedule {
    fn default() -> Self {
        Self::Unit
    }
}

/// The four schedules evaluated together at an iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleValues {
    pub alpha: f64,
    /// Absent when clipping is disabled (vanilla methods); represented as
    /// an absent threshold rather than an infinite float to keep the step
    /// arithmetic NaN-free.
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub batch: u64,
}

/// A bundle of schedules for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSet {
    pub step: StepSchedule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip: Option<ClipSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum: Option<MomentumSchedule>,
    #[serde(default)]
    pub batch: BatchSchedule,
}

impl ScheduleSet {
    /// Re-validates invariants that construction through deserialization
    /// may have bypassed.
    pub fn validate(&self) -> Result<(), ScheduleError> {
        let alpha0 = self.step.alpha0();
        if alpha0 <= 0.0 || !alpha0.is_finite() {
            return Err(ScheduleError::NonPositiveStepsize(alpha0));
        }
        if let StepSchedule::Polynomial { tau, .. } = self.step {
            if !(0.0..=1.0).contains(&tau) {
                return Err(ScheduleError::BadDecayExponent(tau));
            }
        }
        if let Some(c) = &self.clip {
            if c.gamma_scale() <= 0.0 {
                return Err(ScheduleError::NonPositiveClip(c.gamma_scale()));
            }
        }
        match self.momentum {
            Some(MomentumSchedule::Proportional { nu, clamp }) => {
                if nu <= 0.0 {
                    return Err(ScheduleError::NonPositiveMomentumRatio(nu));
                }
                if nu * alpha0 > 1.0 && !clamp {
                    return Err(ScheduleError::MomentumExceedsOne(nu * alpha0));
                }
            }
            Some(MomentumSchedule::Constant { beta }) => {
                if !(beta > 0.0 && beta <= 1.0) {
                    return Err(ScheduleError::MomentumOutOfRange(beta));
                }
            }
            None => {}
        }
        if let BatchSchedule::Fixed { m0 } = self.batch {
            if m0 == 0 {
                return Err(ScheduleError::EmptyBatch);
            }
        }
        Ok(())
    }

    /// Evaluates all four schedule values at iteration `k`.
    pub fn values(&self, k: u64) -> ScheduleValues {
        let alpha = self.step.alpha(k);
        ScheduleValues {
            alpha,
            gamma: self.clip.as_ref().map(|c| c.gamma_at(alpha)),
            beta: self.momentum.as_ref().map(|m| m.beta_at(alpha)),
            batch: self.batch.batch_at(alpha),
        }
    }
}
