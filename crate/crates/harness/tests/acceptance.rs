//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line with its key statistics and runtime (run with `--nocapture` to
//! see the lines as they complete).
//!
//! Tolerances and thresholds are pinned in code; the statistical checks
//! use seeded ensembles, so every run is reproducible.

use clipopt_core::clip::{clip_factor, clip_vec};
use clipopt_core::linalg::{dist_sq, norm2};
use clipopt_core::moreau::{moreau_grad, prox_point, MoreauConfig};
use clipopt_core::problems::{make_quartic, ProblemInstance, QuarticSpec};
use clipopt_core::rng::{RngStream, StreamDomain};
use clipopt_core::schedule::{BatchSchedule, ClipSchedule, MomentumSchedule, ScheduleSet, StepSchedule};
use clipopt_core::theory::{self, Verdict};
use clipopt_harness::config::{Algorithm, Budget, ExperimentConfig, ProblemConfig};
use clipopt_harness::engine::run_trials;
use clipopt_harness::verify::{verify_bounds, BoundSelection, VerifySettings};
use std::time::Instant;

fn check(criterion: &str, pass: bool, detail: &str, started: Instant, budget_s: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    let runtime_ok = elapsed <= budget_s;
    let status = if pass && runtime_ok { "PASS" } else { "FAIL" };
    println!("{status} {criterion}: {detail} [{elapsed:.1}s / {budget_s:.0}s budget]");
    assert!(pass, "{criterion}: {detail}");
    assert!(runtime_ok, "{criterion}: runtime {elapsed:.1}s exceeded {budget_s:.0}s");
}

fn base_config(problem: ProblemConfig, algorithm: Algorithm, schedules: ScheduleSet) -> ExperimentConfig {
    ExperimentConfig {
        version: 1,
        problem,
        algorithm,
        schedules,
        trials: 1,
        budget: Budget::Iterations(100),
        seed: 20240501,
        alpha0_grid: vec![],
        eps_list: vec![],
        diagnostic_stride: 10,
        moreau: None,
        shared_data: true,
        trace_stride: 1,
        x0: None,
    }
}

// ---------------------------------------------------------------------------
// 1. Super-exponential divergence of vanilla SGD
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_divergence_example() {
    let started = Instant::now();
    let mut cfg = base_config(
        ProblemConfig::Quartic { epsilon: 1.0, noise: 0.0 },
        Algorithm::Sgd,
        ScheduleSet {
            step: StepSchedule::Polynomial { alpha0: 0.03, tau: 1.0 },
            clip: None,
            momentum: None,
            batch: BatchSchedule::Unit,
        },
    );
    cfg.budget = Budget::Iterations(200);
    cfg.x0 = Some(vec![10.0]);
    let report = verify_bounds(&cfg, BoundSelection::Example1, &VerifySettings::default()).unwrap();
    let diverged_at = report.inputs.get("diverged_at").copied();
    let pass = report.all_satisfied() && diverged_at.is_some_and(|k| k <= 50.0);
    check(
        "1 (divergence example)",
        pass,
        &format!(
            "ln|x_k| >= ln(10) + ln(k!) at all {} recorded iterates, diverged at k = {:?}",
            report.verdicts.len(),
            diverged_at
        ),
        started,
        1.0,
    );
}

// ---------------------------------------------------------------------------
// 2. Stability bound
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_stability_bound() {
    let started = Instant::now();
    let mut cfg = base_config(
        ProblemConfig::Quartic { epsilon: 1.0, noise: 1.0 },
        Algorithm::ClippedSgd,
        ScheduleSet {
            step: StepSchedule::Polynomial { alpha0: 1.0, tau: 0.75 },
            clip: Some(ClipSchedule::Coupled { gamma: 1.0 }),
            momentum: None,
            batch: BatchSchedule::Unit,
        },
    );
    cfg.trials = 10_000;
    cfg.budget = Budget::Iterations(1000);
    let report = verify_bounds(&cfg, BoundSelection::Prop1, &VerifySettings::default()).unwrap();
    let pass = report.all_satisfied() && report.verdicts.len() == 100;
    check(
        "2 (stability bound)",
        pass,
        &format!(
            "trial-mean dist^2 below the bound at {} / {} checkpoints (min slack {:.3})",
            report.verdicts.len() - report.violations(),
            report.verdicts.len(),
            report.slack.map(|s| s.min).unwrap_or(f64::NAN)
        ),
        started,
        120.0,
    );
}

// ---------------------------------------------------------------------------
// 3. Per-iterate recursion with the mini-batch schedule
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_minibatch_recursion() {
    let started = Instant::now();
    let mut cfg = base_config(
        ProblemConfig::Quartic { epsilon: 1.0, noise: 1.0 },
        Algorithm::ClippedSgd,
        ScheduleSet {
            step: StepSchedule::Polynomial { alpha0: 1.0, tau: 0.75 },
            clip: Some(ClipSchedule::Constant { gamma: 1.0 }),
            momentum: None,
            batch: BatchSchedule::InverseStep,
        },
    );
    cfg.trials = 10_000;
    cfg.budget = Budget::Iterations(1000);
    let report = verify_bounds(&cfg, BoundSelection::Thm1, &VerifySettings::default()).unwrap();
    let total = report.verdicts.len();
    let satisfied = total - report.violations();
    let fraction = satisfied as f64 / total as f64;
    check(
        "3 (mini-batch recursion)",
        fraction >= 0.95 && total == 99,
        &format!("recursion within 2 SE at {satisfied}/{total} checkpoints ({fraction:.3})"),
        started,
        300.0,
    );
}

// ---------------------------------------------------------------------------
// 4. Rate under polynomial growth
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_polynomial_growth_rate() {
    let started = Instant::now();
    let mut cfg = base_config(
        ProblemConfig::Quartic { epsilon: 1.0, noise: 1.0 },
        Algorithm::ClippedSgd,
        ScheduleSet {
            step: StepSchedule::Polynomial { alpha0: 1.0, tau: 0.9 },
            clip: Some(ClipSchedule::Coupled { gamma: 1.0 }),
            momentum: None,
            batch: BatchSchedule::Unit,
        },
    );
    cfg.trials = 1000;
    cfg.budget = Budget::Iterations(100_000);
    let report = verify_bounds(&cfg, BoundSelection::Thm3, &VerifySettings::default()).unwrap();

    let horizon = 100_000u64;
    let slope = report.inputs["slope_last_decade"];
    let threshold = report.inputs["slope_threshold"];
    assert!((report.inputs["envelope_exponent"] - 0.3).abs() < 1e-12);
    let recursion: Vec<&Verdict> = report
        .checkpoints
        .iter()
        .zip(&report.verdicts)
        .filter(|(k, _)| **k < horizon)
        .map(|(_, v)| v)
        .collect();
    let violations = recursion.iter().filter(|v| ***v == Verdict::Violated).count();
    let fraction = 1.0 - violations as f64 / recursion.len() as f64;
    let pass = slope <= threshold && fraction >= 0.95;
    check(
        "4 (polynomial-growth rate)",
        pass,
        &format!(
            "last-decade slope {slope:.3} <= {threshold:.2}; recursion within 2 SE at \
             {:.3} of {} checkpoints past burn-in",
            fraction,
            recursion.len()
        ),
        started,
        900.0,
    );
}

// ---------------------------------------------------------------------------
// 5. Complexity bound for clipped SHB
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_complexity_bound() {
    let started = Instant::now();
    let mut cfg = base_config(
        ProblemConfig::PhaseRetrieval {
            m: 100,
            n: 10,
            kappa: 10.0,
            p_fail: 0.0,
            corruption_variance: 25.0,
        },
        Algorithm::ClippedShb,
        // placeholders: the verifier derives the theorem's schedule
        // relations (alpha = 1/(rho sqrt(K)), nu = rho, gamma = 2L)
        ScheduleSet {
            step: StepSchedule::Constant { alpha0: 0.01 },
            clip: Some(ClipSchedule::Constant { gamma: 1.0 }),
            momentum: Some(MomentumSchedule::Constant { beta: 0.1 }),
            batch: BatchSchedule::Unit,
        },
    );
    cfg.trials = 200;
    let settings = VerifySettings { horizons: vec![100, 1000], ..VerifySettings::default() };
    let report = verify_bounds(&cfg, BoundSelection::Thm5, &settings).unwrap();
    let pass = report.verdicts == vec![Verdict::Satisfied, Verdict::Satisfied];
    let detail: Vec<String> = report
        .checkpoints
        .iter()
        .zip(report.empirical.iter().zip(&report.theoretical))
        .map(|(k, (e, t))| format!("K={k}: E||grad f||^2 = {e:.1} <= {t:.1}"))
        .collect();
    check("5 (complexity bound)", pass, &detail.join("; "), started, 1800.0);
}

// ---------------------------------------------------------------------------
// 6. Qualitative stability on phase retrieval
// ---------------------------------------------------------------------------

fn desk_pr_config(algorithm: Algorithm) -> ExperimentConfig {
    let clipped = algorithm.clipped();
    let momentum = algorithm.momentum();
    let mut cfg = base_config(
        ProblemConfig::PhaseRetrieval {
            m: 200,
            n: 20,
            kappa: 10.0,
            p_fail: 0.1,
            corruption_variance: 25.0,
        },
        algorithm,
        ScheduleSet {
            step: StepSchedule::Polynomial { alpha0: 1.0, tau: 0.5 },
            clip: clipped.then(|| ClipSchedule::Constant { gamma: 10.0 }),
            momentum: momentum.then(|| MomentumSchedule::Constant { beta: 0.1 }),
            batch: BatchSchedule::Unit,
        },
    );
    cfg.trials = 10;
    cfg.budget = Budget::Epochs(100);
    cfg.eps_list = vec![0.25];
    cfg.trace_stride = 200; // epoch boundaries are always recorded
    cfg
}

#[test]
fn criterion_6_phase_retrieval_stability() {
    let started = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    for algorithm in [Algorithm::Sgd, Algorithm::Shb] {
        let out = run_trials(&desk_pr_config(algorithm)).unwrap();
        let ok = out.aggregate.diverged_trials >= 1;
        pass &= ok;
        details.push(format!(
            "{algorithm:?} diverged {}/{}",
            out.aggregate.diverged_trials, out.aggregate.trials
        ));
    }
    for algorithm in [Algorithm::ClippedSgd, Algorithm::ClippedShb] {
        let out = run_trials(&desk_pr_config(algorithm)).unwrap();
        let median = out.aggregate.epoch_to_eps[0].median;
        let ok = out.aggregate.diverged_trials == 0 && median.is_some();
        pass &= ok;
        details.push(format!(
            "{algorithm:?} diverged {}/{} with median epochs-to-0.25 = {median:?}",
            out.aggregate.diverged_trials, out.aggregate.trials
        ));
    }
    check("6 (phase-retrieval stability)", pass, &details.join("; "), started, 600.0);
}

// ---------------------------------------------------------------------------
// 7. Clipping does not harm on absolute regression
// ---------------------------------------------------------------------------

fn desk_regression_config(algorithm: Algorithm) -> ExperimentConfig {
    let clipped = algorithm.clipped();
    let momentum = algorithm.momentum();
    let mut cfg = base_config(
        ProblemConfig::AbsRegression { m: 200, n: 20, kappa: 10.0, noise: 0.01 },
        algorithm,
        ScheduleSet {
            step: StepSchedule::Polynomial { alpha0: 5.0, tau: 0.5 },
            clip: clipped.then(|| ClipSchedule::Constant { gamma: 10.0 }),
            momentum: momentum.then(|| MomentumSchedule::Constant { beta: 0.1 }),
            batch: BatchSchedule::Unit,
        },
    );
    cfg.trials = 10;
    cfg.budget = Budget::Epochs(100);
    cfg.trace_stride = 200;
    cfg
}

#[test]
fn criterion_7_regression_parity() {
    let started = Instant::now();
    let final_gap = |algorithm: Algorithm| -> f64 {
        let out = run_trials(&desk_regression_config(algorithm)).unwrap();
        assert_eq!(out.aggregate.diverged_trials, 0, "{algorithm:?} must not diverge");
        out.aggregate.fgap.last().unwrap().median
    };
    let sgd = final_gap(Algorithm::Sgd);
    let clipped_sgd = final_gap(Algorithm::ClippedSgd);
    let shb = final_gap(Algorithm::Shb);
    let clipped_shb = final_gap(Algorithm::ClippedShb);
    let pass = clipped_sgd <= 1.5 * sgd && clipped_shb <= 1.5 * shb;
    check(
        "7 (regression parity)",
        pass,
        &format!(
            "median final gaps: clipped-sgd {clipped_sgd:.4} vs sgd {sgd:.4}; \
             clipped-shb {clipped_shb:.4} vs shb {shb:.4} (factor 1.5 allowed)"
        ),
        started,
        300.0,
    );
}

// ---------------------------------------------------------------------------
// 8. Moreau oracle equivalence
// ---------------------------------------------------------------------------

/// Grid-search prox at resolution 1e-7 on [-2, 2]; exact for the strictly
/// convex subproblem (coarse scan + refinement = full scan).
fn grid_prox(inst: &ProblemInstance, x: f64, lambda: f64) -> f64 {
    let objective = |y: f64| inst.objective(&[y]) + (x - y) * (x - y) / (2.0 * lambda);
    let scan = |lo: f64, hi: f64, step: f64| -> f64 {
        let mut best_y = lo;
        let mut best_v = f64::INFINITY;
        let n = ((hi - lo) / step).round() as usize;
        for i in 0..=n {
            let y = lo + i as f64 * step;
            let v = objective(y);
            if v < best_v {
                best_v = v;
                best_y = y;
            }
        }
        best_y
    };
    let coarse = scan(-2.0, 2.0, 1e-4);
    scan(coarse - 2e-4, coarse + 2e-4, 1e-7)
}

#[test]
fn criterion_8_moreau_oracle_equivalence() {
    let started = Instant::now();
    let inst = make_quartic(QuarticSpec::new(1.0, 0.0)).unwrap();
    let mut rng = RngStream::new(808, StreamDomain::Sample, 0);

    // prox against the 1e-7 grid at 100 random (x, lambda) pairs
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let x = 4.0 * rng.uniform() - 2.0;
        let lambda = 0.05 + 0.95 * rng.uniform();
        let cfg = MoreauConfig::new(lambda, 0.0).unwrap();
        let r = prox_point(&inst, &cfg, &[x]).unwrap();
        let oracle = grid_prox(&inst, x, lambda);
        let err = (r.point[0] - oracle).abs();
        worst = worst.max(err);
        assert!(
            err <= cfg.tol_prox + 1e-6,
            "prox mismatch at x = {x}, lambda = {lambda}: err = {err}"
        );
    }

    // Lemma-2 smoothness at 1e3 random pairs with slack 2 tol/lambda
    let lambda = 0.1;
    let cfg = MoreauConfig::new(lambda, 0.0).unwrap();
    let mut smooth_ok = true;
    for _ in 0..1000 {
        let x = 4.0 * rng.uniform() - 2.0;
        let y = 4.0 * rng.uniform() - 2.0;
        let gx = moreau_grad(&inst, &cfg, &[x]).unwrap();
        let gy = moreau_grad(&inst, &cfg, &[y]).unwrap();
        let lhs = (gx.grad[0] - gy.grad[0]).abs();
        smooth_ok &= lhs <= (x - y).abs() / lambda + 2.0 * cfg.tol_prox / lambda;
    }
    check(
        "8 (moreau oracle equivalence)",
        smooth_ok,
        &format!(
            "prox matched the 1e-7 grid at 100 pairs (worst error {worst:.2e}); smoothness \
             held at 1000 pairs"
        ),
        started,
        60.0,
    );
}

// ---------------------------------------------------------------------------
// 9. Operator and calculator property suite
// ---------------------------------------------------------------------------

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// Stirling series for ln(k!), exact product below k = 10; the
/// independent second path for the factorial bound.
fn ln_factorial_stirling(k: u64) -> f64 {
    if k < 10 {
        return (1..=k).map(|i| (i as f64).ln()).sum();
    }
    let k = k as f64;
    (k + 0.5) * k.ln() - k + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * k)
        - 1.0 / (360.0 * k.powi(3)) + 1.0 / (1260.0 * k.powi(5))
}

#[test]
fn criterion_9_operator_and_calculator_suite() {
    let started = Instant::now();
    let mut rng = RngStream::new(909, StreamDomain::Sample, 0);

    // clipping operator on 1e5 random pairs
    for _ in 0..100_000 {
        let n = 1 + rng.index(5);
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        rng.fill_normal(&mut a);
        rng.fill_normal(&mut b);
        let scale = 10.0_f64.powf(3.0 * rng.uniform() - 1.5);
        for v in a.iter_mut().chain(b.iter_mut()) {
            *v *= scale;
        }
        let gamma = 10.0_f64.powf(2.0 * rng.uniform() - 1.0);
        let ca = clip_vec(&a, gamma).unwrap();
        let cb = clip_vec(&b, gamma).unwrap();
        // norm cap
        assert!(norm2(&ca) <= gamma * (1.0 + 1e-12));
        // direction preservation with scale in (0, 1]
        let s = clip_factor(&a, gamma);
        assert!(s > 0.0 && s <= 1.0);
        for (c, orig) in ca.iter().zip(&a) {
            assert!((c - s * orig).abs() <= 1e-12 * orig.abs().max(1.0));
        }
        // non-expansiveness
        assert!(dist_sq(&ca, &cb).sqrt() <= dist_sq(&a, &b).sqrt() * (1.0 + 1e-10) + 1e-12);
        // idempotence
        let caa = clip_vec(&ca, gamma).unwrap();
        for (x, y) in ca.iter().zip(&caa) {
            assert!((x - y).abs() <= 1e-15 * x.abs().max(1.0));
        }
    }

    // determinism: bitwise-identical aggregates and traces across reruns
    let mut cfg = base_config(
        ProblemConfig::Quartic { epsilon: 1.0, noise: 1.0 },
        Algorithm::ClippedSgd,
        ScheduleSet {
            step: StepSchedule::Polynomial { alpha0: 0.5, tau: 0.75 },
            clip: Some(ClipSchedule::Coupled { gamma: 1.0 }),
            momentum: None,
            batch: BatchSchedule::Unit,
        },
    );
    cfg.trials = 3;
    cfg.budget = Budget::Iterations(200);
    cfg.eps_list = vec![0.1];
    let a = run_trials(&cfg).unwrap();
    let b = run_trials(&cfg).unwrap();
    assert_eq!(a, b, "identical configs must reproduce identical outputs");

    // dual-path equality of every calculator at 1e3 random draws
    let mut worst_rel = 0.0_f64;
    let mut closeness = |a: f64, b: f64| {
        assert!(rel_close(a, b, 1e-9), "dual-path mismatch: {a} vs {b}");
        worst_rel = worst_rel.max((a - b).abs() / a.abs().max(b.abs()).max(1e-300));
    };
    for _ in 0..1000 {
        let mu = 0.1 + rng.uniform();
        let sigma = 0.1 + rng.uniform();
        let gamma = 0.5 + 2.0 * rng.uniform();
        let e0_sq = 0.5 + rng.uniform();
        let alpha0 = 0.2 + 0.8 * rng.uniform();
        let tau = 0.55 + 0.4 * rng.uniform();
        let p = 2.0 + 3.0 * rng.uniform();
        let l0 = 1.0 + 5.0 * rng.uniform();
        let l1 = 5.0 * rng.uniform();
        let dist0 = 0.5 + 2.0 * rng.uniform();

        // stability bound: direct-summation second path with the constant
        // regrouped as (sigma^2 + 2 mu gamma^2)/(2 mu)
        let step = StepSchedule::Polynomial { alpha0, tau };
        let bounds = theory::prop1_bound(mu, sigma, gamma, e0_sq, &step, 20);
        let c2 = (sigma * sigma + 2.0 * mu * gamma * gamma) / (2.0 * mu);
        for k in [1usize, 7, 20] {
            let direct: f64 =
                (0..k).map(|i| alpha0 * ((i + 1) as f64).powf(-tau)).sum::<f64>();
            closeness(bounds[k - 1], e0_sq + c2 * direct);
        }

        // growth constants: log-domain second path
        let inputs =
            theory::Lemma1Inputs { dist0, gamma, mu, sigma, alpha0, tau, p, l0, l1 };
        let c = theory::lemma1_constants(&inputs).unwrap();
        let p0_log = |q: f64| (0.5 * q * 2.0_f64.ln() + q * dist0.ln()).exp();
        let p1_log = |q: f64| {
            let lead = (q * (2.0 * gamma).ln()).exp()
                + (-0.5 * q * mu.ln() + (q / 4.0 + 1.0) * sigma.ln()).exp();
            lead * (0.5 * q * (2.0 * alpha0 / (1.0 - tau)).ln()).exp()
        };
        let qg = 2.0 * (p - 1.0);
        let qd = 4.0 * (p - 1.0);
        closeness(c.g0, l0 + l1 * p0_log(qg));
        closeness(c.g1, l1 * p1_log(qg));
        closeness(c.d0, p0_log(qd));
        closeness(c.d1, p1_log(qd));

        // rate constant: distributed second path
        let bound = theory::thm3_bound(&inputs).unwrap();
        let c_alt = 2.0 * gamma * gamma / mu * l0 * l0
            + 2.0 * gamma * gamma / mu * l1 * l1 * (c.d0 + c.d1)
            + (l0 + l1 * c.p0_2pm1)
            + l1 * c.p1_2pm1;
        closeness(bound.c, c_alt);
        closeness(bound.envelope_exponent, 1.0 + (1.0 - tau) * (1.0 - 2.0 * p));

        // recursion right-hand side: regrouped second path
        let m_k = 1 + rng.index(64) as u64;
        let alpha_k = alpha0 * 0.3;
        let varrho = 0.05 + 0.95 * rng.uniform();
        let rhs = theory::thm1_recursion_rhs(e0_sq, mu, sigma, gamma, alpha_k, m_k, varrho);
        let rhs_alt = e0_sq - mu * alpha_k * varrho * e0_sq
            + sigma * (sigma / (mu * m_k as f64)) * alpha_k
            + (alpha_k * gamma) * (alpha_k * gamma);
        closeness(rhs, rhs_alt);

        // high-probability bounds: reciprocal-form second path
        let g_big = 10.0 * rng.uniform();
        let delta = 0.05 + 0.4 * rng.uniform();
        if let Ok(t2) = theory::thm2_bounds(theory::Thm2Inputs {
            e0_sq,
            mu,
            sigma,
            gamma,
            g_big_at_radius: g_big,
            alpha0,
            tau,
            delta,
        }) {
            closeness(t2.varrho, 1.0 / (1.0 + g_big.sqrt() / gamma));
            closeness(t2.eta, (sigma * sigma + mu * gamma * gamma) / (mu * mu * t2.varrho));
            let k = 10 + rng.index(1000) as u64;
            let kf = k as f64;
            closeness(t2.radius_sq(k), 2.0 * t2.eta * alpha0 / delta * kf.powf(-tau));
            closeness(
                1.0 - t2.probability_floor(k),
                2.0 * delta
                    + delta * (sigma * sigma / mu + gamma * gamma) * alpha0 * alpha0
                        / (e0_sq * kf.powf(2.0 * tau - 1.0)),
            );
        }

        // complexity bound: split-term second path
        let rho = 0.2 + 2.0 * rng.uniform();
        let delta_f0 = 0.1 + 2.0 * rng.uniform();
        let k = 4 + rng.index(10_000) as u64;
        let l = 0.39 * gamma;
        let t5 = theory::thm5_bound(theory::Thm5Inputs {
            rho,
            delta_f0,
            gamma,
            l,
            nu: rho,
            lambda: 1.0 / (2.0 * rho),
            alpha0: 1.0 / rho,
            k,
        })
        .unwrap();
        let kf = k as f64;
        closeness(t5.simplified, 8.0 * rho * delta_f0 / kf.sqrt() + 8.0 * gamma * gamma / kf.sqrt());
        let alpha = 1.0 / (rho * kf.sqrt());
        let beta0 = rho * alpha;
        let c5 = 2.0 * rho * gamma * gamma * 1.5
            + rho * l * l * (1.0 + 1.0 / (1.0 - beta0));
        let general_alt = (2.0 * (4.0 * delta_f0 + 2.0 * l * l / rho) + 2.0 * c5 / (rho * rho))
            / (kf.sqrt() / rho);
        closeness(t5.general, general_alt);

        // factorial lower bound: Stirling second path
        let x1 = (3.0_f64 / alpha0).sqrt() + rng.uniform();
        let bounds = theory::example1_lower_bound(alpha0, x1, 30).unwrap();
        for k in [1u64, 5, 12, 30] {
            closeness(bounds[k as usize - 1], x1.ln() + ln_factorial_stirling(k));
        }
    }

    check(
        "9 (operator/property suite)",
        true,
        &format!(
            "clip properties on 1e5 pairs, bitwise-deterministic reruns, dual-path \
             calculators at 1e3 draws (worst rel dev {worst_rel:.1e})"
        ),
        started,
        60.0,
    );
}
