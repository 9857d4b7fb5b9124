//! Closed-form calculators for the stability and convergence bounds.
//!
//! Every calculator is a pure function of the inputs it is handed, so a
//! [`BoundReport`] stays recomputable from its own inputs record. The
//! experiment harness pairs these theoretical values with the empirical
//! quantities they must dominate.

use crate::schedule::StepSchedule;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error, PartialEq)]
pub enum TheoryError {
    #[error("divergence example requires x1 >= sqrt(3/alpha1) = {required}, got {x1}")]
    Example1Hypothesis { x1: f64, required: f64 },
    #[error("decay exponent must lie in (1/2, 1), got {0}")]
    DecayExponent(f64),
    #[error("growth order must satisfy p >= 2, got {0}")]
    GrowthOrder(f64),
    #[error("failure probability must lie in (0, 1), got {0}")]
    FailureProbability(f64),
    #[error("stepsize {alpha0} exceeds the admissible 1/(mu varrho) = {limit}")]
    StepsizeTooLarge { alpha0: f64, limit: f64 },
    #[error("clip threshold {gamma} is below the required 2L = {required}")]
    ClipBelowTwiceL { gamma: f64, required: f64 },
    #[error("need 1/lambda >= 2 rho, got lambda = {lambda}, rho = {rho}")]
    EnvelopeParameter { lambda: f64, rho: f64 },
    #[error("momentum beta_0 = {0} must lie in (0, 1)")]
    MomentumSaturated(f64),
    #[error("need K >= 2 for the simplified complexity bound, got {0}")]
    HorizonTooShort(u64),
}

// ---------------------------------------------------------------------------
// Divergence example
// ---------------------------------------------------------------------------

/// Log-domain lower bounds `ln|x_1| + ln(k!)` for `k = 1..=k_max` on the
/// iterates of vanilla SGD applied to the noiseless quartic with
/// `alpha_k = alpha1/k`, valid whenever `x1 >= sqrt(3/alpha1)`.
///
/// The factorial is accumulated as a running log-sum, so the bound never
/// overflows even though the iterates themselves leave the representable
/// range within a couple dozen steps.
pub fn example1_lower_bound(alpha1: f64, x1: f64, k_max: usize) -> Result<Vec<f64>, TheoryError> {
    let required = (3.0 / alpha1).sqrt();
    if !(x1 >= required) {
        return Err(TheoryError::Example1Hypothesis { x1, required });
    }
    let log_x1 = x1.ln();
    let mut log_factorial = 0.0;
    let mut bounds = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        log_factorial += (k as f64).ln();
        bounds.push(log_x1 + log_factorial);
    }
    Ok(bounds)
}

// ---------------------------------------------------------------------------
// Stability bound
// ---------------------------------------------------------------------------

/// `C = sigma^2/(2 mu) + gamma^2`, the per-unit-stepsize drift of the
/// clipped iterates under `gamma_k <= gamma / sqrt(alpha_k)`.
pub fn prop1_c(mu: f64, sigma: f64, gamma: f64) -> f64 {
    sigma * sigma / (2.0 * mu) + gamma * gamma
}

/// Stability bounds `e0_sq + C * sum_{i<k} alpha_i` for `k = 1..=k_max`.
pub fn prop1_bound(
    mu: f64,
    sigma: f64,
    gamma: f64,
    e0_sq: f64,
    step: &StepSchedule,
    k_max: usize,
) -> Vec<f64> {
    let c = prop1_c(mu, sigma, gamma);
    let mut partial = 0.0;
    (0..k_max)
        .map(|k| {
            partial += step.alpha(k as u64);
            e0_sq + c * partial
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Per-iterate recursion (mini-batch schedule)
// ---------------------------------------------------------------------------

/// One step of the conditional recursion for mini-batched clipped SGD with
/// a constant threshold:
/// `(1 - mu alpha_k E[varrho_k]) e_k^2 + sigma^2 alpha_k/(mu m_k) + alpha_k^2 gamma^2`.
///
/// `e_varrho` is the (empirically estimated) conditional mean of the clip
/// factor `min{1, gamma/||g_k||}` and must lie in (0, 1].
pub fn thm1_recursion_rhs(
    e_k_sq: f64,
    mu: f64,
    sigma: f64,
    gamma: f64,
    alpha_k: f64,
    m_k: u64,
    e_varrho: f64,
) -> f64 {
    debug_assert!(e_varrho > 0.0 && e_varrho <= 1.0);
    (1.0 - mu * alpha_k * e_varrho) * e_k_sq
        + sigma * sigma * alpha_k / (mu * m_k as f64)
        + alpha_k * alpha_k * gamma * gamma
}

// ---------------------------------------------------------------------------
// Polynomial-growth constants
// ---------------------------------------------------------------------------

/// Inputs shared by the growth-constant and rate calculators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Inputs {
    pub dist0: f64,
    pub gamma: f64,
    pub mu: f64,
    /// Central-moment scale of the polynomial-growth certificate.
    pub sigma: f64,
    pub alpha0: f64,
    pub tau: f64,
    pub p: f64,
    pub l0: f64,
    pub l1: f64,
}

/// The explicit constants controlling `E||f'(x_k,S)||^2` and
/// `E dist(x_k, X*)^{4(p-1)}` along clipped SGD with the coupled
/// threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Constants {
    pub p0_2pm1: f64,
    pub p1_2pm1: f64,
    pub p0_4pm1: f64,
    pub p1_4pm1: f64,
    pub g0: f64,
    pub g1: f64,
    pub d0: f64,
    pub d1: f64,
}

/// `P0(q) = 2^{q/2} dist0^q`.
fn p0(q: f64, dist0: f64) -> f64 {
    2.0_f64.powf(q / 2.0) * dist0.powf(q)
}

/// `P1(q) = ((2 gamma)^q + mu^{-q/2} sigma^{q/4+1}) (2 alpha0/(1-tau))^{q/2}`.
fn p1(q: f64, gamma: f64, mu: f64, sigma: f64, alpha0: f64, tau: f64) -> f64 {
    ((2.0 * gamma).powf(q) + mu.powf(-q / 2.0) * sigma.powf(q / 4.0 + 1.0))
        * (2.0 * alpha0 / (1.0 - tau)).powf(q / 2.0)
}

pub fn lemma1_constants(inputs: &Lemma1Inputs) -> Result<Lemma1Constants, TheoryError> {
    if !(inputs.tau > 0.5 && inputs.tau < 1.0) {
        return Err(TheoryError::DecayExponent(inputs.tau));
    }
    if !(inputs.p >= 2.0) {
        return Err(TheoryError::GrowthOrder(inputs.p));
    }
    let q_g = 2.0 * (inputs.p - 1.0);
    let q_d = 4.0 * (inputs.p - 1.0);
    let p0_2pm1 = p0(q_g, inputs.dist0);
    let p1_2pm1 = p1(q_g, inputs.gamma, inputs.mu, inputs.sigma, inputs.alpha0, inputs.tau);
    let p0_4pm1 = p0(q_d, inputs.dist0);
    let p1_4pm1 = p1(q_d, inputs.gamma, inputs.mu, inputs.sigma, inputs.alpha0, inputs.tau);
    Ok(Lemma1Constants {
        p0_2pm1,
        p1_2pm1,
        p0_4pm1,
        p1_4pm1,
        g0: inputs.l0 + inputs.l1 * p0_2pm1,
        g1: inputs.l1 * p1_2pm1,
        d0: p0_4pm1,
        d1: p1_4pm1,
    })
}

// ---------------------------------------------------------------------------
// Convergence rate under polynomial growth
// ---------------------------------------------------------------------------

/// The rate statement for clipped SGD with `alpha_k = alpha0 (k+1)^{-tau}`
/// and `gamma_k = gamma / sqrt(alpha_k)`:
///
/// ```text
/// E e_{k+1}^2 <= (1 - mu alpha0/(k+1)^tau) E e_k^2 + C/(k+1)^{2(1 - p(1-tau))}
/// E e_k^2    <~ (C/(mu alpha0)) k^{-(1 + eps(1-2p))}           (tau = 1-eps)
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thm3Bound {
    pub c: f64,
    pub mu: f64,
    pub alpha0: f64,
    pub tau: f64,
    pub p: f64,
    /// `2 (1 - p(1-tau))`, the decay of the additive recursion term.
    pub recursion_exponent: f64,
    /// `1 + eps(1 - 2p)` with `eps = 1 - tau`.
    pub envelope_exponent: f64,
    /// The asymptotic solution of the recursion is governed by the
    /// additive term only when its exponent exceeds `tau`; otherwise the
    /// envelope is flagged not-applicable rather than reported.
    pub recursion_dominant: bool,
    /// The displayed rate is a decay only when its exponent is positive
    /// (`eps < 1/(2p-1)`).
    pub envelope_decays: bool,
    pub constants: Lemma1Constants,
}

pub fn thm3_bound(inputs: &Lemma1Inputs) -> Result<Thm3Bound, TheoryError> {
    let constants = lemma1_constants(inputs)?;
    let c = (2.0 * inputs.gamma * inputs.gamma / inputs.mu)
        * (inputs.l0 * inputs.l0 + inputs.l1 * inputs.l1 * (constants.d0 + constants.d1))
        + constants.g0
        + constants.g1;
    let recursion_exponent = 2.0 * (1.0 - inputs.p * (1.0 - inputs.tau));
    let eps = 1.0 - inputs.tau;
    let envelope_exponent = 1.0 + eps * (1.0 - 2.0 * inputs.p);
    Ok(Thm3Bound {
        c,
        mu: inputs.mu,
        alpha0: inputs.alpha0,
        tau: inputs.tau,
        p: inputs.p,
        recursion_exponent,
        envelope_exponent,
        recursion_dominant: recursion_exponent > inputs.tau,
        envelope_decays: envelope_exponent > 0.0,
        constants,
    })
}

impl Thm3Bound {
    /// Recursion right-hand side given the previous expected squared
    /// distance.
    pub fn recursion_rhs(&self, prev_e_sq: f64, k: u64) -> f64 {
        let kp1 = (k + 1) as f64;
        (1.0 - self.mu * self.alpha0 / kp1.powf(self.tau)) * prev_e_sq
            + self.c / kp1.powf(self.recursion_exponent)
    }

    /// Leading-order envelope `(C/(mu alpha0)) k^{-(1+eps(1-2p))}` for
    /// `k >= 1`; the vanishing little-o correction is not computed, so
    /// empirical checks should apply a burn-in.
    pub fn envelope(&self, k: u64) -> f64 {
        debug_assert!(k >= 1);
        self.c / (self.mu * self.alpha0) * (k as f64).powf(-self.envelope_exponent)
    }
}

// ---------------------------------------------------------------------------
// High-probability complexity (mini-batched, constant stepsize)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thm2Inputs {
    pub e0_sq: f64,
    pub mu: f64,
    pub sigma: f64,
    pub gamma: f64,
    /// The value `G_big(dist(x0, X*)/delta)` of the growth function at the
    /// escape radius; the caller evaluates its instance's growth model.
    pub g_big_at_radius: f64,
    pub alpha0: f64,
    pub tau: f64,
    pub delta: f64,
}

/// The quantities of the second (constant-stepsize) claim. The first
/// claim's numerical constant `c0` is inherited from an external analysis
/// and is exposed as a free input to [`Thm2Bounds::first_claim_floor`]
/// rather than asserted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thm2Bounds {
    pub inputs: Thm2Inputs,
    /// Clip-activity floor `varrho = gamma/(gamma + G_big^{1/2})`.
    pub varrho: f64,
    /// `eta = (sigma^2/mu + gamma^2)/(mu varrho)`.
    pub eta: f64,
}

pub fn thm2_bounds(inputs: Thm2Inputs) -> Result<Thm2Bounds, TheoryError> {
    if !(inputs.delta > 0.0 && inputs.delta < 1.0) {
        return Err(TheoryError::FailureProbability(inputs.delta));
    }
    let varrho = inputs.gamma / (inputs.gamma + inputs.g_big_at_radius.sqrt());
    let limit = 1.0 / (inputs.mu * varrho);
    if inputs.alpha0 > limit {
        return Err(TheoryError::StepsizeTooLarge { alpha0: inputs.alpha0, limit });
    }
    let eta = (inputs.sigma * inputs.sigma / inputs.mu + inputs.gamma * inputs.gamma)
        / (inputs.mu * varrho);
    Ok(Thm2Bounds { inputs, varrho, eta })
}

impl Thm2Bounds {
    /// Whether `K` satisfies
    /// `mu varrho alpha0 K^{1-tau} >= log(e0^2 K^tau/(eta alpha0))`.
    pub fn threshold_ok(&self, k: u64) -> bool {
        let i = &self.inputs;
        let k = k as f64;
        i.mu * self.varrho * i.alpha0 * k.powf(1.0 - i.tau)
            >= (self.inputs.e0_sq * k.powf(i.tau) / (self.eta * i.alpha0)).ln()
    }

    /// Smallest `K <= limit` passing [`Self::threshold_ok`].
    pub fn min_threshold_k(&self, limit: u64) -> Option<u64> {
        (1..=limit).find(|&k| self.threshold_ok(k))
    }

    /// High-probability squared radius `2 eta alpha0 / (delta K^tau)`.
    pub fn radius_sq(&self, k: u64) -> f64 {
        2.0 * self.eta * self.inputs.alpha0 / (self.inputs.delta * (k as f64).powf(self.inputs.tau))
    }

    /// Probability floor of the second claim:
    /// `1 - 2 delta - delta (sigma^2/mu + gamma^2) alpha0^2 / (e0^2 K^{2 tau - 1})`.
    pub fn probability_floor(&self, k: u64) -> f64 {
        let i = &self.inputs;
        let noise = i.sigma * i.sigma / i.mu + i.gamma * i.gamma;
        1.0 - 2.0 * i.delta
            - i.delta * noise * i.alpha0 * i.alpha0
                / (i.e0_sq * (k as f64).powf(2.0 * i.tau - 1.0))
    }

    /// Probability floor of the first (time-varying stepsize) claim with
    /// the external constant `c0` supplied by the caller:
    /// `1 - delta - delta (sigma^2/mu + gamma^2) sum_{k<K} alpha_k^2 / e0^2 - c0 alpha_K / eps`.
    pub fn first_claim_floor(&self, c0: f64, k: u64, eps: f64) -> f64 {
        let i = &self.inputs;
        let alpha = |j: u64| i.alpha0 * ((j + 1) as f64).powf(-i.tau);
        let sum_sq: f64 = (0..k).map(|j| alpha(j) * alpha(j)).sum();
        let noise = i.sigma * i.sigma / i.mu + i.gamma * i.gamma;
        1.0 - i.delta - i.delta * noise * sum_sq / i.e0_sq - c0 * alpha(k) / eps
    }
}

// ---------------------------------------------------------------------------
// Weakly convex complexity (clipped heavy ball)
// ---------------------------------------------------------------------------

/// `C = gamma^2 (1 + rho/(2 nu))/lambda + nu L^2 (1 + 1/(2 lambda nu (1 - beta0)))`,
/// the additive constant of the V-function descent inequality.
pub fn lemma5_constant(rho: f64, gamma: f64, l: f64, nu: f64, lambda: f64, beta0: f64) -> f64 {
    gamma * gamma * (1.0 + rho / (2.0 * nu)) / lambda
        + nu * l * l * (1.0 + 1.0 / (2.0 * lambda * nu * (1.0 - beta0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thm5Inputs {
    pub rho: f64,
    /// Initial optimality gap `f(x0) - inf f`.
    pub delta_f0: f64,
    pub gamma: f64,
    pub l: f64,
    pub nu: f64,
    pub lambda: f64,
    pub alpha0: f64,
    pub k: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thm5Bound {
    pub inputs: Thm5Inputs,
    /// Constant stepsize `alpha0/sqrt(K)` used over the horizon.
    pub alpha: f64,
    pub beta0: f64,
    pub xi: f64,
    pub c: f64,
    /// `2 (xi Delta + 2 L^2/nu + C sum alpha_i^2) / (sum alpha_i)`.
    pub general: f64,
    /// `8 (rho Delta + gamma^2) / sqrt(K)`.
    pub simplified: f64,
}

/// Expected squared envelope-gradient bound at a randomly selected
/// iterate, for clipped SHB run with `alpha = alpha0/sqrt(K)` and
/// `beta_k = nu alpha`.
pub fn thm5_bound(inputs: Thm5Inputs) -> Result<Thm5Bound, TheoryError> {
    if inputs.gamma < 2.0 * inputs.l {
        return Err(TheoryError::ClipBelowTwiceL {
            gamma: inputs.gamma,
            required: 2.0 * inputs.l,
        });
    }
    if 1.0 / inputs.lambda < 2.0 * inputs.rho {
        return Err(TheoryError::EnvelopeParameter { lambda: inputs.lambda, rho: inputs.rho });
    }
    if inputs.k < 2 {
        return Err(TheoryError::HorizonTooShort(inputs.k));
    }
    let k = inputs.k as f64;
    let alpha = inputs.alpha0 / k.sqrt();
    let beta0 = inputs.nu * alpha;
    if !(beta0 > 0.0 && beta0 < 1.0) {
        return Err(TheoryError::MomentumSaturated(beta0));
    }
    let xi = 2.0 + 1.0 / (inputs.lambda * inputs.nu);
    let c = lemma5_constant(inputs.rho, inputs.gamma, inputs.l, inputs.nu, inputs.lambda, beta0);
    let sum_alpha = k * alpha;
    let sum_alpha_sq = k * alpha * alpha;
    let general = 2.0
        * (xi * inputs.delta_f0 + 2.0 * inputs.l * inputs.l / inputs.nu + c * sum_alpha_sq)
        / sum_alpha;
    let simplified =
        8.0 * (inputs.rho * inputs.delta_f0 + inputs.gamma * inputs.gamma) / k.sqrt();
    Ok(Thm5Bound { inputs, alpha, beta0, xi, c, general, simplified })
}

/// Selection weights `alpha_k / sum_i alpha_i` for the randomized iterate
/// index (`Pr(k* = k+1)`, i.e. weight `j` selects iterate `x_{j+1}`).
pub fn kstar_weights(alphas: &[f64]) -> Vec<f64> {
    let total: f64 = alphas.iter().sum();
    alphas.iter().map(|a| a / total).collect()
}

// ---------------------------------------------------------------------------
// Bound reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Satisfied,
    Violated,
    NotApplicable,
}

/// Distribution of `theoretical - empirical` over the checkpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlackStats {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl SlackStats {
    pub fn from_pairs(theoretical: &[f64], empirical: &[f64]) -> Option<Self> {
        if theoretical.is_empty() || theoretical.len() != empirical.len() {
            return None;
        }
        let mut slack: Vec<f64> =
            theoretical.iter().zip(empirical).map(|(t, e)| t - e).collect();
        slack.sort_by(|a, b| a.partial_cmp(b).expect("slack values must be comparable"));
        let n = slack.len();
        let median =
            if n % 2 == 1 { slack[n / 2] } else { 0.5 * (slack[n / 2 - 1] + slack[n / 2]) };
        Some(Self { min: slack[0], median, max: slack[n - 1] })
    }
}

/// A theoretical bound paired with the empirical quantities it must
/// dominate, with one verdict per checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound: String,
    pub tool_version: String,
    /// Every constant entering the theoretical values, keyed by name; the
    /// theoretical column is a deterministic function of this record.
    pub inputs: BTreeMap<String, f64>,
    pub checkpoints: Vec<u64>,
    pub theoretical: Vec<f64>,
    pub empirical: Vec<f64>,
    pub verdicts: Vec<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack: Option<SlackStats>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn new(bound: impl Into<String>) -> Self {
        Self {
            bound: bound.into(),
            tool_version: TOOL_VERSION.to_string(),
            inputs: BTreeMap::new(),
            checkpoints: Vec::new(),
            theoretical: Vec::new(),
            empirical: Vec::new(),
            verdicts: Vec::new(),
            slack: None,
            notes: Vec::new(),
        }
    }

    /// A report whose preconditions failed: a single not-applicable
    /// verdict, never a silent pass.
    pub fn not_applicable(bound: impl Into<String>, reason: impl Into<String>) -> Self {
        let mut report = Self::new(bound);
        report.verdicts.push(Verdict::NotApplicable);
        report.notes.push(reason.into());
        report
    }

    pub fn input(&mut self, name: &str, value: f64) -> &mut Self {
        self.inputs.insert(name.to_string(), value);
        self
    }

    pub fn finish_slack(&mut self) {
        self.slack = SlackStats::from_pairs(&self.theoretical, &self.empirical);
    }

    pub fn violations(&self) -> usize {
        self.verdicts.iter().filter(|v| **v == Verdict::Violated).count()
    }

    pub fn all_satisfied(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| *v == Verdict::Satisfied)
    }
}
