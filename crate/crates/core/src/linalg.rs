//! Small dense vector/matrix helpers.
//!
//! The problem sizes in this crate are tiny (n <= 50, m <= 500), so plain
//! slices and a row-major matrix keep the hot loops allocation-free.

/// Euclidean norm.
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Squared Euclidean norm.
pub fn norm2_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Inner product. Panics on dimension mismatch.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot: dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += c * x`, in place.
pub fn axpy(c: f64, x: &[f64], y: &mut [f64]) {
    assert_eq!(x.len(), y.len(), "axpy: dimension mismatch");
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

/// Squared distance between two points.
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dist_sq: dimension mismatch");
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// `out = A x`.
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.cols, "matvec: dimension mismatch");
        assert_eq!(out.len(), self.rows, "matvec: output dimension mismatch");
        for (i, oi) in out.iter_mut().enumerate() {
            *oi = dot(self.row(i), x);
        }
    }

    /// `out = A^T s`.
    pub fn t_matvec(&self, s: &[f64], out: &mut [f64]) {
        assert_eq!(s.len(), self.rows, "t_matvec: dimension mismatch");
        assert_eq!(out.len(), self.cols, "t_matvec: output dimension mismatch");
        out.fill(0.0);
        for (i, si) in s.iter().enumerate() {
            axpy(*si, self.row(i), out);
        }
    }

    /// Largest eigenvalue of a symmetric positive semidefinite matrix by
    /// power iteration. Deterministic: starts from the all-ones vector.
    pub fn sym_lambda_max(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "sym_lambda_max: matrix not square");
        let n = self.rows;
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        let mut w = vec![0.0; n];
        let mut lambda = 0.0;
        for _ in 0..500 {
            self.matvec(&v, &mut w);
            let nw = norm2(&w);
            if nw == 0.0 {
                return 0.0;
            }
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / nw;
            }
            let prev = lambda;
            lambda = nw;
            if (lambda - prev).abs() <= 1e-13 * lambda.max(1.0) {
                break;
            }
        }
        lambda
    }
}
