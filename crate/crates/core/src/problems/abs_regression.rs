//! Absolute linear regression: `f(x) = (1/m) ||A x - b||_1`.

use super::matrix::gen_conditioned_matrix_from;
use super::{ConditionedMatrix, ConstantsRecord, Optimum, OptimumInfo, PolyGrowth, ProblemError, ProblemInstance};
use crate::linalg::norm2_sq;
use crate::rng::{RngStream, StreamDomain};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsRegressionSpec {
    pub m: usize,
    pub n: usize,
    pub kappa: f64,
    /// Measurement noise scale `sigma` in `b = A x* + sigma w` (default 0.01).
    pub noise: f64,
}

impl AbsRegressionSpec {
    pub fn new(m: usize, n: usize, kappa: f64) -> Self {
        Self { m, n, kappa, noise: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsRegressionProblem {
    pub data: ConditionedMatrix,
    pub b: Vec<f64>,
    pub optimum: OptimumInfo,
    pub constants: ConstantsRecord,
}

/// Draw order on the data stream: `Q` column-major, then `x*` on the unit
/// sphere, then `m` normals for the measurement noise `w`.
pub fn gen_abs_regression(
    spec: AbsRegressionSpec,
    seed: u64,
) -> Result<ProblemInstance, ProblemError> {
    if !(spec.noise >= 0.0) || !spec.noise.is_finite() {
        return Err(ProblemError::BadNoise(spec.noise));
    }
    let mut rng = RngStream::new(seed, StreamDomain::Data, 0);
    let data = gen_conditioned_matrix_from(spec.m, spec.n, spec.kappa, &mut rng)?;
    let xstar = rng.unit_sphere(spec.n);
    let mut b = vec![0.0; spec.m];
    data.matrix().matvec(&xstar, &mut b);
    for bi in b.iter_mut() {
        *bi += spec.noise * rng.normal();
    }

    // Per-sample subgradients are sign(r_i) a_i, so the second moment is
    // globally bounded: Lipschitz case of the growth certificates.
    let row_norms_sq: Vec<f64> = (0..spec.m).map(|i| norm2_sq(data.matrix().row(i))).collect();
    let l_max = row_norms_sq.iter().fold(0.0_f64, |a, &b| a.max(b)).sqrt();
    let mean_sq = row_norms_sq.iter().sum::<f64>() / spec.m as f64;

    let mut fstar_residuals = vec![0.0; spec.m];
    data.matrix().matvec(&xstar, &mut fstar_residuals);
    let fstar = fstar_residuals
        .iter()
        .zip(&b)
        .map(|(ax, bi)| (ax - bi).abs())
        .sum::<f64>()
        / spec.m as f64;

    let constants = ConstantsRecord {
        mu: None,
        sigma: Some(mean_sq.sqrt()),
        poly: Some(PolyGrowth { l0: l_max * l_max, l1: 0.0, p: 2.0, sigma_growth: mean_sq.sqrt() }),
        lipschitz: Some(l_max),
        rho: Some(0.0),
    };
    Ok(ProblemInstance::AbsRegression(AbsRegressionProblem {
        data,
        b,
        optimum: OptimumInfo { minimizer: Optimum::Point(xstar), fstar },
        constants,
    }))
}

impl AbsRegressionProblem {
    pub fn objective(&self, x: &[f64]) -> f64 {
        let a = self.data.matrix();
        let m = a.rows();
        let mut acc = 0.0;
        for i in 0..m {
            acc += (crate::linalg::dot(a.row(i), x) - self.b[i]).abs();
        }
        acc / m as f64
    }

    /// `sign(<a_i,x> - b_i) a_i` with `sign(0) := 0`, accumulated with
    /// weight `w`.
    fn accumulate_sample(&self, x: &[f64], i: usize, w: f64, out: &mut [f64]) {
        let a = self.data.matrix();
        let r = crate::linalg::dot(a.row(i), x) - self.b[i];
        if r == 0.0 {
            return;
        }
        crate::linalg::axpy(w * r.signum(), a.row(i), out);
    }

    pub fn sample_subgrad(&self, x: &[f64], i: usize, out: &mut [f64]) {
        out.fill(0.0);
        self.accumulate_sample(x, i, 1.0, out);
    }

    /// Full subgradient `(1/m) A^T sign(A x - b)`.
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
