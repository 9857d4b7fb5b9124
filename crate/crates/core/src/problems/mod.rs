//! Stochastic problem suite: noisy quartic, robust phase retrieval, and
//! absolute linear regression.
//!
//! Every instance bundles an objective evaluator, a stochastic subgradient
//! oracle, known-optimum metadata, and a record of the growth constants it
//! certifiably satisfies. Instances are immutable after construction and
//! deterministic in `(spec, seed)`; oracles draw from an explicit
//! [`RngStream`](crate::rng::RngStream) owned by the caller, so concurrent
//! trials use disjoint streams.

mod abs_regression;
mod export;
mod matrix;
mod phase_retrieval;
mod quartic;

pub use abs_regression::{gen_abs_regression, AbsRegressionProblem, AbsRegressionSpec};
pub use export::write_instance_csv;
pub use matrix::{gen_conditioned_matrix, ConditionedMatrix};
pub use phase_retrieval::{gen_phase_retrieval, PhaseRetrievalProblem, PhaseRetrievalSpec};
pub use quartic::{make_quartic, QuarticProblem, QuarticSpec};

use crate::linalg::{all_finite, norm2};
use crate::rng::RngStream;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("need m >= n >= 1, got m = {m}, n = {n}")]
    BadShape { m: usize, n: usize },
    #[error("condition parameter must be >= 1, got {0}")]
    BadCondition(f64),
    #[error("corruption probability must lie in [0, 1], got {0}")]
    BadFailProbability(f64),
    #[error("regularization must be positive, got {0}")]
    BadRegularization(f64),
    #[error("noise scale must be non-negative, got {0}")]
    BadNoise(f64),
}

/// Signal that an oracle was queried at a non-finite point.
#[derive(Debug, Error, PartialEq)]
#[error("oracle queried at a non-finite point")]
pub struct DivergedInput;

/// Polynomial-growth certificate: `E||f'(x,S)||^2 <= l0 + l1 * dist^(2(p-1))`
/// together with the `2(p-1)`-th central-moment scale `sigma_growth`
/// (the certificate requires the moment to be at most `sigma_growth^p`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyGrowth {
    pub l0: f64,
    pub l1: f64,
    pub p: f64,
    pub sigma_growth: f64,
}

/// Which growth/regularity constants an instance certifiably satisfies.
/// `None` means the corresponding assumption is not certified (it may
/// still hold on bounded regions; see
/// [`ProblemInstance::second_moment_on_ball`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRecord {
    /// Quadratic growth: `f(x) - f* >= mu * dist(x, X*)^2`.
    pub mu: Option<f64>,
    /// Oracle variance: `E||f'(x,S) - f'(x)||^2 <= sigma^2`.
    pub sigma: Option<f64>,
    /// Polynomial growth of the second moment.
    pub poly: Option<PolyGrowth>,
    /// Global second-moment bound: `E||f'(x,S)||^2 <= lipschitz^2`.
    pub lipschitz: Option<f64>,
    /// Weak-convexity modulus (0 for convex objectives).
    pub rho: Option<f64>,
}

/// Representation of the minimizer set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Optimum {
    /// `X* = {0}` (the quartic).
    Origin,
    /// A single known point (absolute regression: the generating vector;
    /// under noise the empirical minimizer may differ slightly, so
    /// reported gaps can be marginally negative).
    Point(Vec<f64>),
    /// `{x*, -x*}` (phase retrieval sign ambiguity).
    SignPair(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumInfo {
    pub minimizer: Optimum,
    /// Objective value at the (clean) minimizer.
    pub fstar: f64,
}

/// One member of the problem suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProblemInstance {
    Quartic(QuarticProblem),
    PhaseRetrieval(PhaseRetrievalProblem),
    AbsRegression(AbsRegressionProblem),
}

impl ProblemInstance {
    pub fn dimension(&self) -> usize {
        match self {
            Self::Quartic(_) => 1,
            Self::PhaseRetrieval(p) => p.data.matrix().cols(),
            Self::AbsRegression(p) => p.data.matrix().cols(),
        }
    }

    /// Number of samples forming one epoch. The quartic draws fresh noise
    /// each query, so its epoch is a single draw.
    pub fn sample_count(&self) -> usize {
        match self {
            Self::Quartic(_) => 1,
            Self::PhaseRetrieval(p) => p.data.matrix().rows(),
            Self::AbsRegression(p) => p.data.matrix().rows(),
        }
    }

    /// Full (deterministic) objective value.
    pub fn objective(&self, x: &[f64]) -> f64 {
        match self {
            Self::Quartic(p) => p.objective(x),
            Self::PhaseRetrieval(p) => p.objective(x),
            Self::AbsRegression(p) => p.objective(x),
        }
    }

    /// Full subgradient: the exact expectation of the oracle.
    pub fn full_subgrad(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Self::Quartic(p) => p.full_subgrad(x, out),
            Self::PhaseRetrieval(p) => p.full_subgrad(x, out),
            Self::AbsRegression(p) => p.full_subgrad(x, out),
        }
    }

    /// Mini-batch stochastic subgradient: the mean of `batch` independent
    /// per-sample subgradients. Finite-sum problems draw sample indices
    /// uniformly with replacement; exactly `batch` draws are consumed from
    /// `rng`.
    pub fn batch_subgrad(
        &self,
        x: &[f64],
        batch: u64,
        rng: &mut RngStream,
        out: &mut [f64],
    ) -> Result<(), DivergedInput> {
        if !all_finite(x) {
            return Err(DivergedInput);
        }
        debug_assert!(batch >= 1);
        match self {
            Self::Quartic(p) => p.batch_subgrad(x, batch, rng, out),
            Self::PhaseRetrieval(p) => p.batch_subgrad(x, batch, rng, out),
            Self::AbsRegression(p) => p.batch_subgrad(x, batch, rng, out),
        }
        Ok(())
    }

    pub fn optimum(&self) -> &OptimumInfo {
        match self {
            Self::Quartic(p) => &p.optimum,
            Self::PhaseRetrieval(p) => &p.optimum,
            Self::AbsRegression(p) => &p.optimum,
        }
    }

    pub fn fstar(&self) -> f64 {
        self.optimum().fstar
    }

    /// Distance to the minimizer set. `None` would indicate missing
    /// metadata (all suite members carry it; callers fall back to the
    /// function gap in that case).
    pub fn dist_to_opt(&self, x: &[f64]) -> Option<f64> {
        match &self.optimum().minimizer {
            Optimum::Origin => Some(norm2(x)),
            Optimum::Point(xs) => Some(crate::linalg::dist_sq(x, xs).sqrt()),
            Optimum::SignPair(xs) => {
                let plus = crate::linalg::dist_sq(x, xs).sqrt();
                let minus = x
                    .iter()
                    .zip(xs)
                    .map(|(xi, si)| (xi + si) * (xi + si))
                    .sum::<f64>()
                    .sqrt();
                Some(plus.min(minus))
            }
        }
    }

    pub fn constants(&self) -> &ConstantsRecord {
        match self {
            Self::Quartic(p) => &p.constants,
            Self::PhaseRetrieval(p) => &p.constants,
            Self::AbsRegression(p) => &p.constants,
        }
    }

    /// Weak-convexity modulus, when certified.
    pub fn rho(&self) -> Option<f64> {
        self.constants().rho
    }

    /// Second-moment bound `L(r)` with `E||f'(x,S)||^2 <= L(r)^2` valid on
    /// the ball `||x|| <= r`. For globally Lipschitz instances this is the
    /// global constant; `None` when no certificate exists.
    pub fn second_moment_on_ball(&self, radius: f64) -> Option<f64> {
        match self {
            Self::Quartic(p) => Some(p.second_moment_on_ball(radius)),
            Self::PhaseRetrieval(p) => Some(p.region_l_coeff * radius),
            Self::AbsRegression(_) => self.constants().lipschitz,
        }
    }
}

#[cfg(test)]
mod tests;
