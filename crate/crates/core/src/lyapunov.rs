//! Lyapunov diagnostics for the clipped heavy-ball analysis.
//!
//! `W_k` views the search direction as an estimate of the envelope
//! gradient; `V_k` adds the envelope value and direction energy so that
//! the full function decreases in conditional expectation up to
//! `C alpha_{k-1}^2`:
//!
//! ```text
//! W_k = (1/2nu) ||d_k - grad f_l(x_k)||^2 - (1/2nu) ||grad f_l(x_k)||^2 + f(x_k)
//! V_k = f_l(x_k) + W_k + f(x_k)/(l nu) + ((1-b_k)/(2 l nu^2) + a_k/(l nu)) ||d_k||^2
//! ```
//!
//! Both are diagnostics: the experiment harness samples them along
//! trajectories at a configurable stride (prox solves dominate the cost)
//! and tests the descent inequality statistically.

use crate::linalg::norm2_sq;
use crate::moreau::{moreau_grad, MoreauConfig, MoreauError, ProxResult};
use crate::problems::ProblemInstance;
use crate::step::IterState;

/// A diagnostic value together with the prox solve that produced it; the
/// inner-solver accuracy flag travels with the value.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovValue {
    pub value: f64,
    pub envelope_grad_norm_sq: f64,
    pub prox: ProxResult,
}

/// `W_k` at the given state.
pub fn lyapunov_w(
    inst: &ProblemInstance,
    cfg: &MoreauConfig,
    state: &IterState,
    nu: f64,
) -> Result<LyapunovValue, MoreauError> {
    let mg = moreau_grad(inst, cfg, &state.x)?;
    let diff_sq: f64 =
        state.d.iter().zip(&mg.grad).map(|(di, gi)| (di - gi) * (di - gi)).sum();
    let grad_sq = norm2_sq(&mg.grad);
    let value = (diff_sq - grad_sq) / (2.0 * nu) + inst.objective(&state.x);
    Ok(LyapunovValue { value, envelope_grad_norm_sq: grad_sq, prox: mg.prox })
}

/// `V_k` at the given state; `alpha_k` and `beta_k` are the schedule
/// values at the state's iteration counter.
pub fn lyapunov_v(
    inst: &ProblemInstance,
    cfg: &MoreauConfig,
    state: &IterState,
    nu: f64,
    alpha_k: f64,
    beta_k: f64,
) -> Result<LyapunovValue, MoreauError> {
    let mg = moreau_grad(inst, cfg, &state.x)?;
    let f_x = inst.objective(&state.x);
    let diff_sq: f64 =
        state.d.iter().zip(&mg.grad).map(|(di, gi)| (di - gi) * (di - gi)).sum();
    let grad_sq = norm2_sq(&mg.grad);
    let w = (diff_sq - grad_sq) / (2.0 * nu) + f_x;
    let lam = cfg.lambda;
    let energy_coeff = (1.0 - beta_k) / (2.0 * lam * nu * nu) + alpha_k / (lam * nu);
    let value = mg.envelope + w + f_x / (lam * nu) + energy_coeff * norm2_sq(&state.d);
    Ok(LyapunovValue { value, envelope_grad_norm_sq: grad_sq, prox: mg.prox })
}
