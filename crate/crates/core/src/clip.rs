//! The Euclidean-ball clipping operator and divergence cutoffs.

use crate::linalg::norm2;
use thiserror::Error;

/// Magnitude cutoff beyond which a trajectory is declared diverged.
///
/// Runaway trajectories on steep objectives overflow doubles within a few
/// iterations; the experiment harness records divergence as an outcome
/// instead of crashing on non-finite arithmetic.
pub const DIVERGENCE_CUTOFF: f64 = 1e15;

#[derive(Debug, Error, PartialEq)]
pub enum ClipError {
    #[error("clip threshold must be positive, got {0}")]
    NonPositiveThreshold(f64),
    #[error("input vector has a non-finite coordinate")]
    NonFiniteInput,
}

/// Projects `g` onto the closed Euclidean ball of radius `gamma`:
/// `min{1, gamma/||g||} * g`.
///
/// The direction of `g` is preserved, and the zero vector is returned
/// unchanged without forming `gamma/||g||` (the projection of 0 onto any
/// ball is 0, and this avoids a 0/0).
pub fn clip_vec(g: &[f64], gamma: f64) -> Result<Vec<f64>, ClipError> {
    let mut out = g.to_vec();
    clip_in_place(&mut out, gamma)?;
    Ok(out)
}

/// In-place variant of [`clip_vec`]; returns the applied scale factor
/// `min{1, gamma/||g||}` (1.0 for the zero vector).
pub fn clip_in_place(g: &mut [f64], gamma: f64) -> Result<f64, ClipError> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(ClipError::NonPositiveThreshold(gamma));
    }
    if !crate::linalg::all_finite(g) {
        return Err(ClipError::NonFiniteInput);
    }
    let norm = norm2(g);
    if norm <= gamma || norm == 0.0 {
        return Ok(1.0);
    }
    let scale = gamma / norm;
    for gi in g.iter_mut() {
        *gi *= scale;
    }
    Ok(scale)
}

/// Clip scale factor `min{1, gamma/||g||}` without modifying `g`.
pub fn clip_factor(g: &[f64], gamma: f64) -> f64 {
    let norm = norm2(g);
    if norm <= gamma || norm == 0.0 {
        1.0
    } else {
        gamma / norm
    }
}

/// True when any coordinate is non-finite or exceeds [`DIVERGENCE_CUTOFF`].
pub fn is_diverged(x: &[f64]) -> bool {
    x.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_CUTOFF)
}
