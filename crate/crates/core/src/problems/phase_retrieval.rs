//! Robust phase retrieval instance generation.

use super::matrix::gen_conditioned_matrix_from;
use super::{ConditionedMatrix, ConstantsRecord, Optimum, OptimumInfo, ProblemError, ProblemInstance};
use crate::linalg::{norm2_sq, DenseMatrix};
use crate::rng::{RngStream, StreamDomain};
use serde::{Deserialize, Serialize};

/// Robust phase retrieval: `f(x) = (1/m) sum_i |<a_i, x>^2 - b_i|` with
/// `b_i = <a_i, x*>^2 + delta_i zeta_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRetrievalProblem {
    pub data: ConditionedMatrix,
    pub b: Vec<f64>,
    /// Corruption values `delta_i * zeta_i` (zero where the mask is off).
    pub corruption: Vec<f64>,
    pub corruption_mask: Vec<bool>,
    pub optimum: OptimumInfo,
    pub constants: ConstantsRecord,
    /// `L(r) = region_l_coeff * r` bounds the oracle second moment on
    /// `||x|| <= r` (Lipschitz-type certificates fail globally here).
    pub region_l_coeff: f64,
}

impl PhaseRetrievalProblem {
    pub fn objective(&self, x: &[f64]) -> f64 {
        let a = self.data.matrix();
        let m = a.rows();
        let mut acc = 0.0;
        for i in 0..m {
            let t = crate::linalg::dot(a.row(i), x);
            acc += (t * t - self.b[i]).abs();
        }
        acc / m as f64
    }

    /// Per-sample subgradient `2 sign(<a_i,x>^2 - b_i) <a_i,x> a_i`
    /// accumulated into `out` with weight `w` (`sign(0) := 0`).
    fn accumulate_sample(&self, x: &[f64], i: usize, w: f64, out: &mut [f64]) {
        let a = self.data.matrix();
        let t = crate::linalg::dot(a.row(i), x);
        let r = t * t - self.b[i];
        if r == 0.0 {
            return;
        }
        crate::linalg::axpy(w * 2.0 * r.signum() * t, a.row(i), out);
    }

    pub fn sample_subgrad(&self, x: &[f64], i: usize, out: &mut [f64]) {
        out.fill(0.0);
        self.accumulate_sample(x, i, 1.0, out);
    }

    pub fn full_subgrad(&self, x: &[f64], out: &mut [f64]) {
        let m = self.data.matrix().rows();
        out.fill(0.0);
        for i in 0..m {
            self.accumulate_sample(x, i, 1.0 / m as f64, out);
        }
    }

    pub(super) fn batch_subgrad(&self, x: &[f64], batch: u64, rng: &mut RngStream, out: &mut [f64]) {
        let m = self.data.matrix().rows();
        out.fill(0.0);
        let w = 1.0 / batch as f64;
        for _ in 0..batch {
            let i = rng.index(m);
            self.accumulate_sample(x, i, w, out);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseRetrievalSpec {
    pub m: usize,
    pub n: usize,
    pub kappa: f64,
    /// Probability that a measurement is corrupted.
    pub p_fail: f64,
    /// Variance of the corruption noise `zeta_i` (default 25).
    pub corruption_variance: f64,
}

impl PhaseRetrievalSpec {
    pub fn new(m: usize, n: usize, kappa: f64, p_fail: f64) -> Self {
        Self { m, n, kappa, p_fail, corruption_variance: 25.0 }
    }
}

/// Coefficient `c` with `E||g(x)||^2 <= (c r)^2` on `||x|| <= r`:
/// the per-sample subgradient satisfies
/// `E||g(x)||^2 = (4/m) sum_i <a_i,x>^2 ||a_i||^2 <= 4 lambda_max(M) ||x||^2`
/// for `M = (1/m) sum_i ||a_i||^2 a_i a_i^T`.
fn region_l_coefficient(a: &DenseMatrix) -> f64 {
    let (m, n) = (a.rows(), a.cols());
    let mut mom = DenseMatrix::zeros(n, n);
    for i in 0..m {
        let row = a.row(i);
        let w = norm2_sq(row) / m as f64;
        for p in 0..n {
            for q in 0..n {
                mom.set(p, q, mom.get(p, q) + w * row[p] * row[q]);
            }
        }
    }
    2.0 * mom.sym_lambda_max().sqrt()
}

/// Draw order on the data stream: `Q` column-major, then `x*` on the unit
/// sphere, then per measurement one uniform (the corruption coin) and one
/// normal (the corruption value, consumed whether or not the coin fires).
pub fn gen_phase_retrieval(
    spec: PhaseRetrievalSpec,
    seed: u64,
) -> Result<ProblemInstance, ProblemError> {
    if !(0.0..=1.0).contains(&spec.p_fail) {
        return Err(ProblemError::BadFailProbability(spec.p_fail));
    }
    if !(spec.corruption_variance >= 0.0) {
        return Err(ProblemError::BadNoise(spec.corruption_variance));
    }
    let mut rng = RngStream::new(seed, StreamDomain::Data, 0);
    let data = gen_conditioned_matrix_from(spec.m, spec.n, spec.kappa, &mut rng)?;
    let xstar = rng.unit_sphere(spec.n);
    let corruption_std = spec.corruption_variance.sqrt();
    let mut b = vec![0.0; spec.m];
    let mut corruption = vec![0.0; spec.m];
    let mut corruption_mask = vec![false; spec.m];
    for i in 0..spec.m {
        let t = crate::linalg::dot(data.matrix().row(i), &xstar);
        let coin = rng.uniform() < spec.p_fail;
        let zeta = corruption_std * rng.normal();
        corruption_mask[i] = coin;
        corruption[i] = if coin { zeta } else { 0.0 };
        b[i] = t * t + corruption[i];
    }

    // Composition bound: |.| is 1-Lipschitz and <a_i, .>^2 has 2 a_i a_i^T
    // Hessian, so each summand is 2||a_i||^2-weakly convex; the max over
    // samples is a conservative certificate for the average.
    let rho = 2.0
        * (0..spec.m)
            .map(|i| norm2_sq(data.matrix().row(i)))
            .fold(0.0_f64, f64::max);
    let region_l_coeff = region_l_coefficient(data.matrix());

    // f at the clean x*: only corrupted measurements contribute.
    let fstar = corruption.iter().map(|c| c.abs()).sum::<f64>() / spec.m as f64;

    let constants = ConstantsRecord {
        mu: None,
        sigma: None,
        poly: None,
        lipschitz: None, // second moment is unbounded globally; see region_l_coeff
        rho: Some(rho),
    };
    Ok(ProblemInstance::PhaseRetrieval(PhaseRetrievalProblem {
        data,
        b,
        corruption,
        corruption_mask,
        optimum: OptimumInfo { minimizer: Optimum::SignPair(xstar), fstar },
        constants,
        region_l_coeff,
    }))
}
