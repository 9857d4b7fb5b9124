//! Flat CSV export of problem data for cross-implementation replay.
//!
//! One file, four columns: `record,i,j,value`. Sections in order:
//! `meta` rows (name in the `i` column), then `a` (matrix entries,
//! row-major), `b`, `xstar`, `corruption`, and `mask` where applicable.
//! Floats are written with 17 significant digits.

use super::{Optimum, ProblemInstance};
use std::io::{self, Write};

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn meta<W: Write>(w: &mut W, name: &str, value: String) -> io::Result<()> {
    writeln!(w, "meta,{name},,{value}")
}

/// Writes the full problem data of `inst` as a flat CSV container.
pub fn write_instance_csv<W: Write>(inst: &ProblemInstance, w: &mut W) -> io::Result<()> {
    writeln!(w, "record,i,j,value")?;
    match inst {
        ProblemInstance::Quartic(p) => {
            meta(w, "kind", "quartic".into())?;
            meta(w, "epsilon", fmt(p.spec.epsilon))?;
            meta(w, "noise", fmt(p.spec.noise))?;
        }
        ProblemInstance::PhaseRetrieval(p) => {
            meta(w, "kind", "phase-retrieval".into())?;
            meta(w, "m", p.data.matrix().rows().to_string())?;
            meta(w, "n", p.data.matrix().cols().to_string())?;
            meta(w, "kappa", fmt(p.data.kappa()))?;
            write_matrix(w, p.data.matrix())?;
            write_vector(w, "b", &p.b)?;
            if let Optimum::SignPair(xs) = &p.optimum.minimizer {
                write_vector(w, "xstar", xs)?;
            }
            write_vector(w, "corruption", &p.corruption)?;
            for (i, flag) in p.corruption_mask.iter().enumerate() {
                writeln!(w, "mask,{i},,{}", u8::from(*flag))?;
            }
        }
        ProblemInstance::AbsRegression(p) => {
            meta(w, "kind", "abs-regression".into())?;
            meta(w, "m", p.data.matrix().rows().to_string())?;
            meta(w, "n", p.data.matrix().cols().to_string())?;
            meta(w, "kappa", fmt(p.data.kappa()))?;
            write_matrix(w, p.data.matrix())?;
            write_vector(w, "b", &p.b)?;
            if let Optimum::Point(xs) = &p.optimum.minimizer {
                write_vector(w, "xstar", xs)?;
            }
        }
    }
    Ok(())
}

fn write_matrix<W: Write>(w: &mut W, a: &crate::linalg::DenseMatrix) -> io::Result<()> {
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            writeln!(w, "a,{i},{j},{}", fmt(a.get(i, j)))?;
        }
    }
    Ok(())
}

fn write_vector<W: Write>(w: &mut W, name: &str, v: &[f64]) -> io::Result<()> {
    for (i, vi) in v.iter().enumerate() {
        writeln!(w, "{name},{i},,{}", fmt(*vi))?;
    }
    Ok(())
}
