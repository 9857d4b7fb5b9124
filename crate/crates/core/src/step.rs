//! Single-step update rules for (clipped) SGD and the clipped stochastic
//! heavy ball method.
//!
//! Clipped SGD:
//! ```text
//! d_k     = clip_{gamma_k}(g_k)
//! x_{k+1} = x_k - alpha_k d_k
//! ```
//!
//! Clipped SHB evaluates the fresh subgradient at the *new* iterate:
//! ```text
//! x_{k+1} = x_k - alpha_k d_k
//! d_{k+1} = clip_gamma((1 - beta_k) d_k + beta_k g_{k+1})
//! ```
//! initialized from `d_0 = clip_gamma(g_0)`.
//!
//! Steps are pure functions of (state, inputs). A non-finite subgradient
//! produces a state whose [`IterState::diverged`] flag is set instead of a
//! panic; the caller halts the run and records the outcome.

use crate::clip::{clip_in_place, is_diverged};
use crate::linalg::all_finite;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StepError {
    #[error("dimension mismatch: state has {state}, input has {input}")]
    DimensionMismatch { state: usize, input: usize },
    #[error("momentum parameter must lie in (0, 1], got {0}")]
    MomentumOutOfRange(f64),
}

/// Live state of a trajectory: current iterate, current search direction,
/// and the iteration counter.
#[derive(Debug, Clone, PartialEq)]
pub struct IterState {
    pub x: Vec<f64>,
    pub d: Vec<f64>,
    pub k: u64,
}

impl IterState {
    /// Fresh state at `x0` with a zero search direction.
    pub fn new(x0: Vec<f64>) -> Self {
        let d = vec![0.0; x0.len()];
        Self { x: x0, d, k: 0 }
    }

    pub fn dimension(&self) -> usize {
        self.x.len()
    }

    /// True when any coordinate of the iterate or direction is non-finite
    /// or exceeds the divergence cutoff.
    pub fn diverged(&self) -> bool {
        is_diverged(&self.x) || is_diverged(&self.d)
    }
}

fn check_dim(state: &IterState, input: &[f64]) -> Result<(), StepError> {
    if state.x.len() != input.len() {
        return Err(StepError::DimensionMismatch { state: state.x.len(), input: input.len() });
    }
    Ok(())
}

/// One (clipped) SGD step. `g` is the mini-batch averaged stochastic
/// subgradient at `state.x`; with `gamma = None` the step is vanilla SGD.
///
/// A non-finite `g` bypasses clipping and propagates into a state that
/// reports [`IterState::diverged`].
pub fn sgd_step(
    state: &IterState,
    g: &[f64],
    alpha: f64,
    gamma: Option<f64>,
) -> Result<IterState, StepError> {
    check_dim(state, g)?;
    let mut d = g.to_vec();
    if let Some(gamma) = gamma {
        if all_finite(&d) {
            clip_in_place(&mut d, gamma).expect("finite input and positive threshold");
        }
    }
    let mut x = state.x.clone();
    crate::linalg::axpy(-alpha, &d, &mut x);
    Ok(IterState { x, d, k: state.k + 1 })
}

/// Initializes the heavy-ball direction `d_0 = clip(g_0)` (or `g_0` when
/// clipping is disabled) at the starting point held by `state`.
pub fn shb_init(state: &IterState, g0: &[f64], gamma: Option<f64>) -> Result<IterState, StepError> {
    check_dim(state, g0)?;
    let mut d = g0.to_vec();
    if let Some(gamma) = gamma {
        if all_finite(&d) {
            clip_in_place(&mut d, gamma).expect("finite input and positive threshold");
        }
    }
    Ok(IterState { x: state.x.clone(), d, k: state.k })
}

/// One stochastic heavy ball step. `g_next` must be the stochastic
/// subgradient evaluated at the *new* iterate `x - alpha * d` (the caller
/// performs the oracle call between the position and direction updates).
/// With `gamma = None` the direction update is left unclipped.
pub fn shb_step(
    state: &IterState,
    g_next: &[f64],
    alpha: f64,
    beta: f64,
    gamma: Option<f64>,
) -> Result<IterState, StepError> {
    check_dim(state, g_next)?;
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(StepError::MomentumOutOfRange(beta));
    }
    let mut x = state.x.clone();
    crate::linalg::axpy(-alpha, &state.d, &mut x);
    let mut d: Vec<f64> =
        state.d.iter().zip(g_next).map(|(di, gi)| (1.0 - beta) * di + beta * gi).collect();
    if let Some(gamma) = gamma {
        if all_finite(&d) {
            clip_in_place(&mut d, gamma).expect("finite input and positive threshold");
        }
    }
    Ok(IterState { x, d, k: state.k + 1 })
}
