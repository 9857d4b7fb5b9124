use super::*;
use crate::linalg::DenseMatrix;
use crate::rng::{RngStream, StreamDomain};

fn matrix_from_rows(rows: &[&[f64]]) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(rows.len(), rows[0].len());
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            a.set(i, j, *v);
        }
    }
    a
}

/// Phase retrieval with explicit measurements, for hand-checked cases.
fn pr_from_data(rows: &[&[f64]], b: &[f64], xstar: Vec<f64>) -> ProblemInstance {
    let a = matrix_from_rows(rows);
    let m = a.rows();
    let rho = 2.0
        * (0..m)
            .map(|i| crate::linalg::norm2_sq(a.row(i)))
            .fold(0.0_f64, f64::max);
    ProblemInstance::PhaseRetrieval(PhaseRetrievalProblem {
        data: ConditionedMatrix::from_parts(a, 1.0),
        b: b.to_vec(),
        corruption: vec![0.0; m],
        corruption_mask: vec![false; m],
        optimum: OptimumInfo { minimizer: Optimum::SignPair(xstar), fstar: 0.0 },
        constants: ConstantsRecord {
            mu: None,
            sigma: None,
            poly: None,
            lipschitz: None,
            rho: Some(rho),
        },
        region_l_coeff: 0.0,
    })
}

#[test]
fn quartic_oracle_is_unbiased() {
    // Monte Carlo mean of the noisy oracle at x = 2 vs the analytic
    // derivative f'(2) = 10, sigma_n = 1, 1e5 draws, 4 standard errors.
    let inst = make_quartic(QuarticSpec::new(1.0, 1.0)).unwrap();
    let mut rng = RngStream::new(11, StreamDomain::Sample, 0);
    let n = 100_000;
    let mut g = vec![0.0];
    let mut sum = 0.0;
    for _ in 0..n {
        inst.batch_subgrad(&[2.0], 1, &mut rng, &mut g).unwrap();
        sum += g[0];
    }
    let mean = sum / n as f64;
    let se = 1.0 / (n as f64).sqrt();
    assert!((mean - 10.0).abs() < 4.0 * se, "mean = {mean}");
}

#[test]
fn quartic_noiseless_oracle_is_exact() {
    let inst = make_quartic(QuarticSpec::new(1.0, 0.0)).unwrap();
    let mut rng = RngStream::new(3, StreamDomain::Sample, 0);
    let mut g = vec![0.0];
    for batch in [1, 7, 32] {
        inst.batch_subgrad(&[1.5], batch, &mut rng, &mut g).unwrap();
        assert_eq!(g[0], 1.5_f64.powi(3) + 1.5);
    }
}

#[test]
fn quartic_quadratic_growth_pointwise() {
    // f(x) - f* >= (eps/2) x^2, exact inequality on a sampled grid.
    let inst = make_quartic(QuarticSpec::new(1.0, 0.0)).unwrap();
    let mu = inst.constants().mu.unwrap();
    for i in -100..=100 {
        let x = i as f64 * 0.1;
        assert!(inst.objective(&[x]) >= mu * x * x - 1e-15);
    }
}

#[test]
fn quartic_polynomial_growth_on_grid() {
    // Deterministic part: |f'(x)|^2 <= 2x^6 + 2 eps^2 x^2
    //                              <= (l0 - c_noise) + (l1 - c_noise)|x|^6
    // on |x| <= 10 (here eps = 1, so l0 - c_noise = l1 - c_noise = 4).
    let inst = make_quartic(QuarticSpec::new(1.0, 0.0)).unwrap();
    let poly = inst.constants().poly.unwrap();
    let mut g = vec![0.0];
    for i in -1000..=1000 {
        let x = i as f64 * 0.01;
        inst.full_subgrad(&[x], &mut g);
        let lhs = g[0] * g[0];
        let mid = 2.0 * x.powi(6) + 2.0 * x * x;
        let rhs = poly.l0 + poly.l1 * x.abs().powi(6);
        assert!(lhs <= mid + 1e-9 && mid <= rhs + 1e-9, "x = {x}");
    }
}

#[test]
fn phase_retrieval_interpolates_when_clean() {
    let spec = PhaseRetrievalSpec { m: 40, n: 5, kappa: 10.0, p_fail: 0.0, corruption_variance: 25.0 };
    let inst = gen_phase_retrieval(spec, 5).unwrap();
    let xstar = match &inst.optimum().minimizer {
        Optimum::SignPair(xs) => xs.clone(),
        _ => unreachable!(),
    };
    assert!(inst.objective(&xstar) < 1e-15);
    assert_eq!(inst.fstar(), 0.0);
    let mut g = vec![0.0; 5];
    if let ProblemInstance::PhaseRetrieval(p) = &inst {
        for i in 0..40 {
            p.sample_subgrad(&xstar, i, &mut g);
            assert!(crate::linalg::norm2(&g) < 1e-12);
        }
    }
}

#[test]
fn phase_retrieval_hand_computed_subgradient() {
    // Single measurement a = [1], b = 0, x = [2]: f = |4| = 4 and
    // g = 2 sign(4) * 2 * 1 = 4, the derivative of x^2 at 2.
    let inst = pr_from_data(&[&[1.0]], &[0.0], vec![1.0]);
    assert_eq!(inst.objective(&[2.0]), 4.0);
    let mut g = vec![0.0];
    inst.full_subgrad(&[2.0], &mut g);
    assert_eq!(g, vec![4.0]);
    // finite-difference confirmation away from the kink
    let h = 1e-6;
    let fd = (inst.objective(&[2.0 + h]) - inst.objective(&[2.0 - h])) / (2.0 * h);
    assert!((fd - g[0]).abs() < 1e-6);
}

#[test]
fn phase_retrieval_fstar_matches_stored_corruptions() {
    let spec = PhaseRetrievalSpec::new(500, 50, 10.0, 0.1);
    let inst = gen_phase_retrieval(spec, 17).unwrap();
    if let ProblemInstance::PhaseRetrieval(p) = &inst {
        assert!(p.corruption_mask.iter().any(|&m| m), "expected some corrupted rows");
        let recomputed: f64 =
            p.corruption.iter().map(|c| c.abs()).sum::<f64>() / p.b.len() as f64;
        assert!(p.optimum.fstar > 0.0);
        assert!((inst.objective(match &p.optimum.minimizer {
            Optimum::SignPair(xs) => xs,
            _ => unreachable!(),
        }) - recomputed)
            .abs()
            < 1e-12);
        assert_eq!(inst.fstar(), recomputed);
        // mask off => corruption entry zero
        for (c, m) in p.corruption.iter().zip(&p.corruption_mask) {
            assert_eq!(*c != 0.0, *m);
        }
    } else {
        unreachable!();
    }
}

#[test]
fn phase_retrieval_weak_convexity_certificate() {
    // f(y) >= f(x) + <g, y-x> - (rho/2)||y-x||^2 for the recorded rho,
    // 1e4 random pairs, tolerance 1e-9.
    let spec = PhaseRetrievalSpec::new(60, 8, 10.0, 0.1);
    let inst = gen_phase_retrieval(spec, 23).unwrap();
    let rho = inst.rho().unwrap();
    let mut rng = RngStream::new(23, StreamDomain::Sample, 9);
    let mut g = vec![0.0; 8];
    for _ in 0..10_000 {
        let mut x = vec![0.0; 8];
        let mut y = vec![0.0; 8];
        rng.fill_normal(&mut x);
        rng.fill_normal(&mut y);
        inst.full_subgrad(&x, &mut g);
        let lin: f64 = g.iter().zip(x.iter().zip(&y)).map(|(gi, (xi, yi))| gi * (yi - xi)).sum();
        let dist_sq = crate::linalg::dist_sq(&x, &y);
        assert!(
            inst.objective(&y) >= inst.objective(&x) + lin - 0.5 * rho * dist_sq - 1e-9,
            "weak convexity violated"
        );
    }
}

#[test]
fn dist_to_opt_handles_sign_ambiguity() {
    let inst = pr_from_data(&[&[1.0, 0.0]], &[1.0], vec![1.0, 0.0]);
    let xstar = vec![1.0, 0.0];
    let neg: Vec<f64> = xstar.iter().map(|v| -v).collect();
    assert_eq!(inst.dist_to_opt(&neg), Some(0.0));
    // x = 2 x* with ||x*|| = 1: min(1, 3) = 1
    assert_eq!(inst.dist_to_opt(&[2.0, 0.0]), Some(1.0));
}

#[test]
fn abs_regression_hand_computed() {
    // A = [[1], [-1]], b = 0, x = 3: f = (|3| + |-3|)/2 = 3 and the full
    // subgradient is (1*1 + (-1)*(-1))/2 = 1.
    let a = matrix_from_rows(&[&[1.0], &[-1.0]]);
    let inst = ProblemInstance::AbsRegression(AbsRegressionProblem {
        data: ConditionedMatrix::from_parts(a, 1.0),
        b: vec![0.0, 0.0],
        optimum: OptimumInfo { minimizer: Optimum::Point(vec![0.0]), fstar: 0.0 },
        constants: ConstantsRecord {
            mu: None,
            sigma: None,
            poly: None,
            lipschitz: Some(1.0),
            rho: Some(0.0),
        },
    });
    assert_eq!(inst.objective(&[3.0]), 3.0);
    let mut g = vec![0.0];
    inst.full_subgrad(&[3.0], &mut g);
    assert_eq!(g, vec![1.0]);
}

#[test]
fn abs_regression_noiseless_fit_is_exact() {
    let mut spec = AbsRegressionSpec::new(30, 4, 10.0);
    spec.noise = 0.0;
    let inst = gen_abs_regression(spec, 9).unwrap();
    let xstar = match &inst.optimum().minimizer {
        Optimum::Point(xs) => xs.clone(),
        _ => unreachable!(),
    };
    assert!(inst.objective(&xstar) < 1e-14);
    let mut g = vec![0.0; 4];
    inst.full_subgrad(&xstar, &mut g);
    assert!(crate::linalg::norm2(&g) < 1e-14, "0 must be a subgradient at the exact fit");
}

#[test]
fn abs_regression_gap_at_generator_near_noise_floor() {
    // f(x*) = (1/m)||sigma w||_1, which concentrates near
    // sigma E|w| ~ 0.00798 for sigma = 0.01.
    let spec = AbsRegressionSpec::new(500, 50, 10.0);
    let inst = gen_abs_regression(spec, 31).unwrap();
    let xstar = match &inst.optimum().minimizer {
        Optimum::Point(xs) => xs.clone(),
        _ => unreachable!(),
    };
    let f = inst.objective(&xstar);
    assert_eq!(f, inst.fstar());
    assert!((0.006..0.010).contains(&f), "f(x*) = {f}");
}

#[test]
fn abs_regression_lipschitz_bound_is_exact() {
    let spec = AbsRegressionSpec::new(60, 6, 10.0);
    let inst = gen_abs_regression(spec, 41).unwrap();
    let l = inst.constants().lipschitz.unwrap();
    let mut rng = RngStream::new(41, StreamDomain::Sample, 1);
    let mut g = vec![0.0; 6];
    if let ProblemInstance::AbsRegression(p) = &inst {
        for _ in 0..200 {
            let mut x = vec![0.0; 6];
            rng.fill_normal(&mut x);
            for i in 0..60 {
                p.sample_subgrad(&x, i, &mut g);
                assert!(crate::linalg::norm2(&g) <= l + 1e-12);
            }
        }
    }
}

#[test]
fn full_subgrad_equals_full_pass_average() {
    // Deterministic mode: averaging every per-sample subgradient once
    // must reproduce full_subgrad exactly.
    let spec = AbsRegressionSpec::new(25, 3, 5.0);
    let inst = gen_abs_regression(spec, 2).unwrap();
    let x = vec![0.3, -0.7, 1.1];
    let mut full = vec![0.0; 3];
    inst.full_subgrad(&x, &mut full);
    let mut acc = vec![0.0; 3];
    let mut g = vec![0.0; 3];
    if let ProblemInstance::AbsRegression(p) = &inst {
        for i in 0..25 {
            p.sample_subgrad(&x, i, &mut g);
            crate::linalg::axpy(1.0 / 25.0, &g, &mut acc);
        }
    }
    for (a, f) in acc.iter().zip(&full) {
        assert!((a - f).abs() < 1e-15);
    }
}

#[test]
fn batch_mean_variance_scales_inversely() {
    // Empirical variance of the batch mean at m_k = 16 is ~1/16 of the
    // single-sample variance (ratio within +-20% over 1e4 draws).
    let inst = make_quartic(QuarticSpec::new(1.0, 1.0)).unwrap();
    let mut rng = RngStream::new(77, StreamDomain::Sample, 0);
    let mut g = vec![0.0];
    let draws = 10_000;
    let mut var = [0.0, 0.0];
    for (slot, batch) in [(0, 1u64), (1, 16u64)] {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..draws {
            inst.batch_subgrad(&[2.0], batch, &mut rng, &mut g).unwrap();
            sum += g[0];
            sum_sq += g[0] * g[0];
        }
        let mean = sum / draws as f64;
        var[slot] = sum_sq / draws as f64 - mean * mean;
    }
    let ratio = var[0] / var[1];
    assert!((12.8..19.2).contains(&ratio), "variance ratio = {ratio}");
}

#[test]
fn finite_sum_oracle_is_unbiased() {
    // Monte Carlo mean of the sampled subgradient converges to the full
    // subgradient at a fixed point (1e5 draws, 4 standard errors per
    // coordinate).
    let spec = PhaseRetrievalSpec::new(50, 4, 10.0, 0.1);
    let inst = gen_phase_retrieval(spec, 13).unwrap();
    let x = vec![0.5, -0.25, 1.0, 0.0];
    let mut full = vec![0.0; 4];
    inst.full_subgrad(&x, &mut full);
    let mut rng = RngStream::new(99, StreamDomain::Sample, 0);
    let n = 100_000;
    let mut g = vec![0.0; 4];
    let mut sum = vec![0.0; 4];
    let mut sum_sq = vec![0.0; 4];
    for _ in 0..n {
        inst.batch_subgrad(&x, 1, &mut rng, &mut g).unwrap();
        for j in 0..4 {
            sum[j] += g[j];
            sum_sq[j] += g[j] * g[j];
        }
    }
    for j in 0..4 {
        let mean = sum[j] / n as f64;
        let var = (sum_sq[j] / n as f64 - mean * mean).max(0.0);
        let se = (var / n as f64).sqrt();
        assert!((mean - full[j]).abs() <= 4.0 * se + 1e-12, "coordinate {j}: {mean} vs {}", full[j]);
    }
}

#[test]
fn oracle_rejects_non_finite_query() {
    let inst = make_quartic(QuarticSpec::new(1.0, 1.0)).unwrap();
    let mut rng = RngStream::new(0, StreamDomain::Sample, 0);
    let mut g = vec![0.0];
    assert_eq!(inst.batch_subgrad(&[f64::NAN], 1, &mut rng, &mut g), Err(DivergedInput));
}

#[test]
fn instances_are_deterministic_in_seed() {
    let spec = PhaseRetrievalSpec::new(30, 5, 10.0, 0.1);
    assert_eq!(gen_phase_retrieval(spec, 4).unwrap(), gen_phase_retrieval(spec, 4).unwrap());
    assert_ne!(gen_phase_retrieval(spec, 4).unwrap(), gen_phase_retrieval(spec, 5).unwrap());
    let rspec = AbsRegressionSpec::new(30, 5, 10.0);
    assert_eq!(gen_abs_regression(rspec, 4).unwrap(), gen_abs_regression(rspec, 4).unwrap());
}

#[test]
fn instance_export_roundtrip_fields() {
    let spec = PhaseRetrievalSpec::new(8, 3, 2.0, 0.5);
    let inst = gen_phase_retrieval(spec, 1).unwrap();
    let mut buf = Vec::new();
    write_instance_csv(&inst, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("record,i,j,value\n"));
    assert!(text.contains("meta,kind,,phase-retrieval"));
    // 8x3 matrix entries, 8 b entries, 3 xstar, 8 corruption, 8 mask
    assert_eq!(text.lines().filter(|l| l.starts_with("a,")).count(), 24);
    assert_eq!(text.lines().filter(|l| l.starts_with("b,")).count(), 8);
    assert_eq!(text.lines().filter(|l| l.starts_with("xstar,")).count(), 3);
    assert_eq!(text.lines().filter(|l| l.starts_with("mask,")).count(), 8);
}
