//! Proximal points and Moreau-envelope gradients.
//!
//! For a rho-weakly convex `f` and `1/lambda >= 2 rho`, the envelope
//! `f_lambda(x) = inf_y { f(y) + ||x-y||^2 / (2 lambda) }` is smooth and
//! its gradient `(x - prox(x)) / lambda` measures near-stationarity: a
//! small envelope gradient puts `x` near a point `prox(x)` that is nearly
//! stationary for `f`.
//!
//! The prox subproblem `F(y) = f(y) + ||x-y||^2/(2 lambda)` is
//! `(1/lambda - rho)`-strongly convex, so it has a unique minimizer and a
//! computable optimality certificate: for any subgradient `F'(y)`,
//! `||y - prox(x)|| <= ||F'(y)|| / (1/lambda - rho)` (monotonicity of the
//! strongly convex subdifferential against `0 in dF(prox)`).
//!
//! The inner solver runs deterministic subgradient descent with the
//! stepsize `2/((1/lambda - rho)(t+2))` and weighted averaging, projected
//! onto the localization ball `||y - x|| <= sqrt(2 lambda (f(x) - inf f))`
//! that must contain the prox point (compare subproblem values at `y = x`).
//! The projection keeps steep objectives from overshooting; iteration
//! stops once the certificate above drops below `tol_prox`, and hitting
//! the iteration cap returns the best-certified point with the accuracy
//! flag cleared to false.

use crate::linalg::{all_finite, dist_sq, norm2};
use crate::problems::ProblemInstance;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MoreauError {
    #[error("need 1/lambda >= 2 rho, got lambda = {lambda}, rho = {rho}")]
    EnvelopeParameter { lambda: f64, rho: f64 },
    #[error("envelope parameter must be positive and finite, got {0}")]
    BadLambda(f64),
    #[error("prox queried at a non-finite point")]
    NonFinitePoint,
}

/// Configuration of the envelope parameter and the inner solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoreauConfig {
    pub lambda: f64,
    /// Weak-convexity modulus of the target objective.
    pub rho: f64,
    /// Certified distance tolerance of the inner solve.
    pub tol_prox: f64,
    /// Inner iteration cap.
    pub max_inner: u64,
}

pub const DEFAULT_TOL_PROX: f64 = 1e-6;
pub const DEFAULT_MAX_INNER: u64 = 100_000;

impl MoreauConfig {
    /// Checks the envelope precondition `1/lambda >= 2 rho` at construction.
    pub fn new(lambda: f64, rho: f64) -> Result<Self, MoreauError> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(MoreauError::BadLambda(lambda));
        }
        if 1.0 / lambda < 2.0 * rho || rho < 0.0 {
            return Err(MoreauError::EnvelopeParameter { lambda, rho });
        }
        Ok(Self { lambda, rho, tol_prox: DEFAULT_TOL_PROX, max_inner: DEFAULT_MAX_INNER })
    }

    /// The `lambda = 1/(2 rho)` default used by the complexity bound.
    pub fn half_inverse_rho(rho: f64) -> Result<Self, MoreauError> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(MoreauError::EnvelopeParameter { lambda: f64::NAN, rho });
        }
        Self::new(1.0 / (2.0 * rho), rho)
    }

    /// Strong-convexity modulus of the prox subproblem.
    pub fn subproblem_modulus(&self) -> f64 {
        1.0 / self.lambda - self.rho
    }

    pub fn with_tolerance(mut self, tol_prox: f64, max_inner: u64) -> Self {
        self.tol_prox = tol_prox;
        self.max_inner = max_inner;
        self
    }
}

/// Outcome of an inner prox solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxResult {
    pub point: Vec<f64>,
    /// Certified bound on `||point - prox(x)||`.
    pub certificate: f64,
    /// Whether the certificate reached `tol_prox` before the cap.
    pub converged: bool,
    pub inner_iters: u64,
}

/// Solves `argmin_y f(y) + ||x-y||^2/(2 lambda)` given a full-subgradient
/// oracle for `f` and a lower bound on `f` (used only to localize the
/// solution; all objectives in the suite are non-negative).
pub fn prox_solve<F>(
    mut subgrad: F,
    f_at_x: f64,
    f_lower_bound: f64,
    cfg: &MoreauConfig,
    x: &[f64],
) -> Result<ProxResult, MoreauError>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if !all_finite(x) || !f_at_x.is_finite() {
        return Err(MoreauError::NonFinitePoint);
    }
    let n = x.len();
    let modulus = cfg.subproblem_modulus();
    debug_assert!(modulus > 0.0);
    // F(prox) <= F(x) = f(x) localizes the prox point.
    let radius = (2.0 * cfg.lambda * (f_at_x - f_lower_bound).max(0.0)).sqrt();

    let mut y = x.to_vec();
    let mut avg = x.to_vec();
    let mut grad = vec![0.0; n];
    let mut fgrad = vec![0.0; n];
    let mut best_point = x.to_vec();
    let mut best_cert = f64::INFINITY;

    // evaluates F'(p) into fgrad and returns the certificate at p
    let certify = |p: &[f64], subgrad: &mut F, fgrad: &mut [f64]| -> f64 {
        subgrad(p, fgrad);
        for j in 0..n {
            fgrad[j] += (p[j] - x[j]) / cfg.lambda;
        }
        norm2(fgrad) / modulus
    };

    const AVG_CHECK_STRIDE: u64 = 16;
    let mut iters = 0;
    for t in 0..cfg.max_inner {
        iters = t + 1;
        let cert = certify(&y, &mut subgrad, &mut grad);
        if cert < best_cert {
            best_cert = cert;
            best_point.copy_from_slice(&y);
            if best_cert <= cfg.tol_prox {
                break;
            }
        }
        // subgradient step, then project back into the localization ball
        let eta = 2.0 / (modulus * (t + 2) as f64);
        for j in 0..n {
            y[j] -= eta * grad[j];
        }
        let offset = dist_sq(&y, x).sqrt();
        if offset > radius {
            let scale = radius / offset;
            for j in 0..n {
                y[j] = x[j] + scale * (y[j] - x[j]);
            }
        }
        // running weighted average with weights t+1
        let w = 2.0 / ((t + 3) as f64);
        for j in 0..n {
            avg[j] += w * (y[j] - avg[j]);
        }
        if (t + 1) % AVG_CHECK_STRIDE == 0 {
            let cert = certify(&avg, &mut subgrad, &mut fgrad);
            if cert < best_cert {
                best_cert = cert;
                best_point.copy_from_slice(&avg);
                if best_cert <= cfg.tol_prox {
                    break;
                }
            }
        }
    }
    Ok(ProxResult {
        point: best_point,
        certificate: best_cert,
        converged: best_cert <= cfg.tol_prox,
        inner_iters: iters,
    })
}

/// Proximal point of the instance objective at `x`.
pub fn prox_point(
    inst: &ProblemInstance,
    cfg: &MoreauConfig,
    x: &[f64],
) -> Result<ProxResult, MoreauError> {
    let f_at_x = inst.objective(x);
    prox_solve(|y, out| inst.full_subgrad(y, out), f_at_x, 0.0, cfg, x)
}

/// Envelope gradient estimate together with its prox solve.
#[derive(Debug, Clone, PartialEq)]
pub struct MoreauGrad {
    pub grad: Vec<f64>,
    /// Envelope value `f(prox) + ||x - prox||^2 / (2 lambda)`.
    pub envelope: f64,
    pub prox: ProxResult,
}

/// `grad f_lambda(x) = (x - prox(x)) / lambda`; the gradient error is
/// bounded by `certificate / lambda`.
pub fn moreau_grad(
    inst: &ProblemInstance,
    cfg: &MoreauConfig,
    x: &[f64],
) -> Result<MoreauGrad, MoreauError> {
    let prox = prox_point(inst, cfg, x)?;
    let grad: Vec<f64> =
        x.iter().zip(&prox.point).map(|(xi, yi)| (xi - yi) / cfg.lambda).collect();
    let envelope =
        inst.objective(&prox.point) + dist_sq(x, &prox.point) / (2.0 * cfg.lambda);
    Ok(MoreauGrad { grad, envelope, prox })
}
