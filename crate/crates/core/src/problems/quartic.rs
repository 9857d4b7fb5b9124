//! The noisy quartic `f(x) = x^4/4 + eps x^2/2` on the real line.
//!
//! The deterministic objective has a unique minimizer at 0 with `f* = 0`
//! and quadratic-growth constant `mu = eps/2`. The stochastic oracle adds
//! Gaussian noise to the exact derivative: `g(x) = f'(x) + xi`,
//! `xi ~ N(0, noise^2)`. Gaussian noise is unbounded, which is exactly the
//! regime where bounded-noise analyses of clipping break down, making this
//! the stress-test instance for the stability and rate bounds.

use super::{ConstantsRecord, Optimum, OptimumInfo, PolyGrowth, ProblemError, ProblemInstance};
use crate::rng::RngStream;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticSpec {
    /// Regularization `eps > 0`; ensures the unique minimizer 0.
    pub epsilon: f64,
    /// Additive gradient-noise scale `sigma_n >= 0`.
    pub noise: f64,
}

impl QuarticSpec {
    pub fn new(epsilon: f64, noise: f64) -> Self {
        Self { epsilon, noise }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuarticProblem {
    pub spec: QuarticSpec,
    pub optimum: OptimumInfo,
    pub constants: ConstantsRecord,
}

/// Sixth central moment of `N(0, s^2)` is `15 s^6`; the polynomial-growth
/// certificate needs its fourth root.
fn sigma_growth(noise: f64) -> f64 {
    (15.0 * noise.powi(6)).powf(0.25)
}

pub fn make_quartic(spec: QuarticSpec) -> Result<ProblemInstance, ProblemError> {
    if !(spec.epsilon > 0.0) || !spec.epsilon.is_finite() {
        return Err(ProblemError::BadRegularization(spec.epsilon));
    }
    if !(spec.noise >= 0.0) || !spec.noise.is_finite() {
        return Err(ProblemError::BadNoise(spec.noise));
    }
    let eps = spec.epsilon;
    // Deterministic part satisfies the p = 4 growth certificate with
    // l0 = l1 = 2(1 + eps); the additive-noise variance enters through
    // c_noise = 2 noise^2 so the recorded constants certify the noisy
    // oracle as well.
    let c_noise = 2.0 * spec.noise * spec.noise;
    let growth = 2.0 * (1.0 + eps) + c_noise;
    let constants = ConstantsRecord {
        mu: Some(eps / 2.0),
        sigma: Some(spec.noise),
        poly: Some(PolyGrowth { l0: growth, l1: growth, p: 4.0, sigma_growth: sigma_growth(spec.noise) }),
        lipschitz: None,
        rho: Some(0.0),
    };
    Ok(ProblemInstance::Quartic(QuarticProblem {
        spec,
        optimum: OptimumInfo { minimizer: Optimum::Origin, fstar: 0.0 },
        constants,
    }))
}

impl QuarticProblem {
    pub fn objective(&self, x: &[f64]) -> f64 {
        let x = x[0];
        0.25 * x.powi(4) + 0.5 * self.spec.epsilon * x * x
    }

    /// Exact derivative `x^3 + eps x`.
    pub fn full_subgrad(&self, x: &[f64], out: &mut [f64]) {
        let x = x[0];
        out[0] = x.powi(3) + self.spec.epsilon * x;
    }

    pub(super) fn batch_subgrad(
        &self,
        x: &[f64],
        batch: u64,
        rng: &mut RngStream,
        out: &mut [f64],
    ) {
        // Each sample consumes one noise draw even when noise = 0, so the
        // stream layout does not depend on the noise scale.
        let mut acc = 0.0;
        for _ in 0..batch {
            acc += rng.normal();
        }
        let x = x[0];
        out[0] = x.powi(3) + self.spec.epsilon * x + self.spec.noise * acc / batch as f64;
    }

    /// `E|g(x)|^2 = (x^3 + eps x)^2 + noise^2` maximized over `|x| <= r`.
    pub fn second_moment_on_ball(&self, r: f64) -> f64 {
        let det = r.powi(3) + self.spec.epsilon * r;
        (det * det + self.spec.noise * self.spec.noise).sqrt()
    }
}
