//! Conditioned design matrices `A = Q D`.

use super::ProblemError;
use crate::linalg::DenseMatrix;
use crate::rng::{RngStream, StreamDomain};
use serde::{Deserialize, Serialize};

/// `A = Q D` with standard-normal `Q` and diagonal `D` whose entries are
/// linearly spaced between `1/kappa` and `1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionedMatrix {
    matrix: DenseMatrix,
    kappa: f64,
}

impl ConditionedMatrix {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    #[cfg(test)]
    pub(crate) fn from_parts(matrix: DenseMatrix, kappa: f64) -> Self {
        Self { matrix, kappa }
    }
}

/// Diagonal entries `d_j = 1/kappa + (j-1)(1 - 1/kappa)/(n-1)`, ascending
/// (`d_j = 1` when `n = 1`).
pub(super) fn diagonal_entries(n: usize, kappa: f64) -> Vec<f64> {
    let lo = 1.0 / kappa;
    if n == 1 {
        return vec![1.0];
    }
    (0..n).map(|j| lo + j as f64 * (1.0 - lo) / (n - 1) as f64).collect()
}

/// Generates `A = Q D`, deterministic in `seed`. `Q` is filled
/// column-major from the seeded data stream, then each column `j` is
/// scaled by `d_j`; the fixed order makes instances reproducible across
/// implementations that share the RNG contract.
pub fn gen_conditioned_matrix(
    m: usize,
    n: usize,
    kappa: f64,
    seed: u64,
) -> Result<ConditionedMatrix, ProblemError> {
    let mut rng = RngStream::new(seed, StreamDomain::Data, 0);
    gen_conditioned_matrix_from(m, n, kappa, &mut rng)
}

/// As [`gen_conditioned_matrix`], drawing from a caller-provided stream so
/// instance generators can lay out further draws after the matrix.
pub(super) fn gen_conditioned_matrix_from(
    m: usize,
    n: usize,
    kappa: f64,
    rng: &mut RngStream,
) -> Result<ConditionedMatrix, ProblemError> {
    if m < n || n == 0 {
        return Err(ProblemError::BadShape { m, n });
    }
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(ProblemError::BadCondition(kappa));
    }
    let d = diagonal_entries(n, kappa);
    let mut a = DenseMatrix::zeros(m, n);
    for (j, dj) in d.iter().enumerate() {
        for i in 0..m {
            a.set(i, j, rng.normal() * dj);
        }
    }
    Ok(ConditionedMatrix { matrix: a, kappa })
}
