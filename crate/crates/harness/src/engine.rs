//! Trajectory driver and multi-trial experiment runner.
//!
//! Randomness layout: stream `(Data, 0)` under the data seed generates the
//! problem instance (shared across trials by default; per-trial reseeded
//! with `shared_data = false`), stream `(Init, trial)` draws the initial
//! iterate, and stream `(Sample, trial)` feeds the oracle. Trials run
//! concurrently on disjoint streams, so permuting trial indices leaves
//! every aggregate invariant.

use crate::aggregate::{AggregateResult, EpochToEpsSummary, PercentileSummary};
use crate::config::{Algorithm, Budget, ExperimentConfig};
use crate::error::HarnessError;
use clipopt_core::clip::{clip_factor, is_diverged};
use clipopt_core::lyapunov::{lyapunov_v, lyapunov_w};
use clipopt_core::moreau::MoreauConfig;
use clipopt_core::problems::ProblemInstance;
use clipopt_core::rng::{RngStream, StreamDomain};
use clipopt_core::schedule::{MomentumSchedule, ScheduleSet};
use clipopt_core::step::{sgd_step, shb_init, shb_step, IterState};
use clipopt_core::trace::{epoch_to_eps, Trace, TraceRecord};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// One observed iteration, handed to the driver's observer before the
/// next step executes.
pub struct StepObservation<'a> {
    pub k: u64,
    pub x: &'a [f64],
    /// Search direction standing at this iterate (absent at the final
    /// record of an SGD run, where no further direction is formed).
    pub direction: Option<&'a [f64]>,
    /// Realized clip factor `min{1, gamma_k/||g_k||}` of the step leaving
    /// this iterate (SGD-family steps only).
    pub clip_factor: Option<f64>,
    pub alpha: f64,
    pub gamma: Option<f64>,
    pub batch: u64,
    pub diverged: bool,
    pub is_final: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveOutcome {
    pub diverged: bool,
    pub final_k: u64,
    /// Total oracle sample draws consumed.
    pub draws: u64,
}

/// Runs one trajectory, reporting every iterate to `observer`. Stops at
/// the iteration cap, the draw cap, or the first diverged state (iterate
/// beyond the cutoff or non-finite).
pub fn drive<F>(
    inst: &ProblemInstance,
    algorithm: Algorithm,
    schedules: &ScheduleSet,
    x0: Vec<f64>,
    sample: &mut RngStream,
    max_iterations: u64,
    max_draws: u64,
    mut observer: F,
) -> Result<DriveOutcome, HarnessError>
where
    F: FnMut(&StepObservation),
{
    let n = inst.dimension();
    if x0.len() != n {
        return Err(HarnessError::config(format!(
            "x0 has dimension {}, problem has {n}",
            x0.len()
        )));
    }
    let mut g = vec![0.0; n];
    let mut draws: u64 = 0;
    let mut state = IterState::new(x0);

    let step_err = |e: clipopt_core::step::StepError| HarnessError::config(e.to_string());

    if algorithm.momentum() {
        // d_0 = clip(g_0) at the initial point
        let v0 = schedules.values(0);
        inst.batch_subgrad(&state.x, v0.batch, sample, &mut g)
            .map_err(|_| HarnessError::config("initial iterate is non-finite"))?;
        draws += v0.batch;
        state = shb_init(&state, &g, v0.gamma).map_err(step_err)?;
        if state.diverged() {
            observer(&StepObservation {
                k: 0,
                x: &state.x,
                direction: Some(&state.d),
                clip_factor: None,
                alpha: v0.alpha,
                gamma: v0.gamma,
                batch: v0.batch,
                diverged: true,
                is_final: true,
            });
            return Ok(DriveOutcome { diverged: true, final_k: 0, draws });
        }
    }

    loop {
        let k = state.k;
        let v = schedules.values(k);
        if k >= max_iterations || draws >= max_draws {
            observer(&StepObservation {
                k,
                x: &state.x,
                direction: algorithm.momentum().then_some(state.d.as_slice()),
                clip_factor: None,
                alpha: v.alpha,
                gamma: v.gamma,
                batch: v.batch,
                diverged: false,
                is_final: true,
            });
            return Ok(DriveOutcome { diverged: false, final_k: k, draws });
        }

        let next = if algorithm.momentum() {
            observer(&StepObservation {
                k,
                x: &state.x,
                direction: Some(&state.d),
                clip_factor: None,
                alpha: v.alpha,
                gamma: v.gamma,
                batch: v.batch,
                diverged: false,
                is_final: false,
            });
            // position update first; the fresh subgradient is evaluated
            // at the new iterate
            let mut x_next = state.x.clone();
            clipopt_core::linalg::axpy(-v.alpha, &state.d, &mut x_next);
            if is_diverged(&x_next) {
                let vn = schedules.values(k + 1);
                observer(&StepObservation {
                    k: k + 1,
                    x: &x_next,
                    direction: Some(&state.d),
                    clip_factor: None,
                    alpha: vn.alpha,
                    gamma: vn.gamma,
                    batch: 0,
                    diverged: true,
                    is_final: true,
                });
                return Ok(DriveOutcome { diverged: true, final_k: k + 1, draws });
            }
            let batch_next = schedules.values(k + 1).batch;
            inst.batch_subgrad(&x_next, batch_next, sample, &mut g)
                .expect("finiteness checked above");
            draws += batch_next;
            let beta = v.beta.expect("validated: momentum schedule present");
            shb_step(&state, &g, v.alpha, beta, v.gamma).map_err(step_err)?
        } else {
            inst.batch_subgrad(&state.x, v.batch, sample, &mut g)
                .expect("diverged iterates break the loop before the oracle");
            draws += v.batch;
            let rho = v.gamma.map(|gamma| clip_factor(&g, gamma));
            let next = sgd_step(&state, &g, v.alpha, v.gamma).map_err(step_err)?;
            observer(&StepObservation {
                k,
                x: &state.x,
                direction: Some(&next.d),
                clip_factor: rho,
                alpha: v.alpha,
                gamma: v.gamma,
                batch: v.batch,
                diverged: false,
                is_final: false,
            });
            next
        };

        if next.diverged() {
            let vn = schedules.values(k + 1);
            observer(&StepObservation {
                k: k + 1,
                x: &next.x,
                direction: Some(&next.d),
                clip_factor: None,
                alpha: vn.alpha,
                gamma: vn.gamma,
                batch: 0,
                diverged: true,
                is_final: true,
            });
            return Ok(DriveOutcome { diverged: true, final_k: k + 1, draws });
        }
        state = next;
    }
}

/// Data seed for a trial: the master seed under shared data, a derived
/// per-trial seed otherwise.
pub fn data_seed(cfg: &ExperimentConfig, trial: u32) -> u64 {
    if cfg.shared_data {
        cfg.seed
    } else {
        cfg.seed ^ (trial as u64 + 1).wrapping_mul(0x9e3779b97f4a7c15)
    }
}

/// Initial iterate: the configured override, or standard normal
/// coordinates from the trial's init stream.
pub fn initial_point(cfg: &ExperimentConfig, n: usize, trial: u32) -> Vec<f64> {
    if let Some(x0) = &cfg.x0 {
        return x0.clone();
    }
    let mut init = RngStream::new(cfg.seed, StreamDomain::Init, trial as u64);
    let mut x0 = vec![0.0; n];
    init.fill_normal(&mut x0);
    x0
}

fn iteration_caps(cfg: &ExperimentConfig, inst: &ProblemInstance) -> (u64, u64) {
    match cfg.budget {
        Budget::Iterations(n) => (n, u64::MAX),
        Budget::Epochs(q) => (u64::MAX, q * inst.sample_count() as u64),
    }
}

/// Effective momentum-to-step ratio at stepsize `alpha`, for the
/// Lyapunov diagnostics.
fn effective_nu(momentum: &MomentumSchedule, alpha: f64) -> f64 {
    match *momentum {
        MomentumSchedule::Proportional { nu, .. } => nu,
        MomentumSchedule::Constant { beta } => beta / alpha,
    }
}

/// Runs one seeded trial and records its trace: metrics at every
/// `trace_stride`-th iteration (epoch boundaries, the final record, and
/// divergence always included), diagnostics at the diagnostic stride when
/// a Moreau configuration is present.
pub fn run_trajectory(
    cfg: &ExperimentConfig,
    inst: &ProblemInstance,
    trial: u32,
) -> Result<(Trace, DriveOutcome), HarnessError> {
    let moreau: Option<MoreauConfig> =
        cfg.moreau.as_ref().map(|m| m.resolve(inst)).transpose()?;
    let fstar = inst.fstar();
    let epoch = inst.sample_count() as u64;
    let (max_iterations, max_draws) = iteration_caps(cfg, inst);
    let mut sample = RngStream::new(cfg.seed, StreamDomain::Sample, trial as u64);
    let x0 = initial_point(cfg, inst.dimension(), trial);

    let mut trace = Trace::new();
    let outcome = drive(
        inst,
        cfg.algorithm,
        &cfg.schedules,
        x0,
        &mut sample,
        max_iterations,
        max_draws,
        |obs| {
            let forced = obs.is_final || obs.diverged || obs.k % epoch == 0;
            if !forced && obs.k % cfg.trace_stride != 0 {
                return;
            }
            let mut record = TraceRecord {
                k: obs.k,
                fgap: inst.objective(obs.x) - fstar,
                dist: inst.dist_to_opt(obs.x),
                dnorm: obs.direction.map(clipopt_core::linalg::norm2),
                alpha: obs.alpha,
                gamma: obs.gamma,
                batch: obs.batch,
                wk: None,
                vk: None,
                moreau_grad_sq: None,
                diverged: obs.diverged,
            };
            if let (Some(mcfg), Some(d), Some(momentum), false) =
                (&moreau, obs.direction, &cfg.schedules.momentum, obs.diverged)
            {
                if obs.k % cfg.diagnostic_stride == 0 {
                    let nu = effective_nu(momentum, obs.alpha);
                    let state = IterState { x: obs.x.to_vec(), d: d.to_vec(), k: obs.k };
                    if let Ok(w) = lyapunov_w(inst, mcfg, &state, nu) {
                        record.wk = Some(w.value);
                        record.moreau_grad_sq = Some(w.envelope_grad_norm_sq);
                    }
                    let beta = cfg.schedules.values(obs.k).beta.unwrap_or(1.0);
                    if let Ok(v) = lyapunov_v(inst, mcfg, &state, nu, obs.alpha, beta) {
                        record.vk = Some(v.value);
                    }
                }
            }
            trace.push(record);
        },
    )?;
    Ok((trace, outcome))
}

/// Aggregate plus the per-trial traces of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub aggregate: AggregateResult,
    pub traces: Vec<Trace>,
}

/// Runs all trials (in parallel, disjoint streams) and aggregates the
/// function gap and distance at epoch checkpoints. Diverged trials
/// contribute `+inf` so the percentiles reflect failures.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    cfg.validate()?;
    let shared: Option<Arc<ProblemInstance>> = if cfg.shared_data {
        Some(Arc::new(cfg.problem.build(data_seed(cfg, 0))?))
    } else {
        None
    };

    let results: Vec<Result<(Trace, DriveOutcome), HarnessError>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let inst = match &shared {
                Some(inst) => Arc::clone(inst),
                None => Arc::new(cfg.problem.build(data_seed(cfg, trial))?),
            };
            run_trajectory(cfg, &inst, trial)
        })
        .collect();

    let mut traces = Vec::with_capacity(cfg.trials as usize);
    let mut diverged_trials = 0;
    for r in results {
        let (trace, outcome) = r?;
        if outcome.diverged {
            diverged_trials += 1;
        }
        traces.push(trace);
    }

    // epoch grid shared by all trials
    let sample_count = match &shared {
        Some(inst) => inst.sample_count(),
        None => cfg.problem.build(data_seed(cfg, 0))?.sample_count(),
    };
    let m = sample_count as u64;
    let max_epoch = match cfg.budget {
        Budget::Epochs(q) => q,
        Budget::Iterations(n) => n / m,
    };
    let epochs: Vec<u64> = (0..=max_epoch).collect();

    let metric_at = |trace: &Trace, k: u64, dist: bool| -> f64 {
        match trace.at(k) {
            Some(r) if dist => r.dist.unwrap_or(f64::INFINITY),
            Some(r) => r.fgap,
            // no record at this iteration: the trial diverged earlier
            None => f64::INFINITY,
        }
    };

    let mut fgap = Vec::with_capacity(epochs.len());
    let mut dist = Vec::with_capacity(epochs.len());
    for &q in &epochs {
        let k = q * m;
        let gaps: Vec<f64> = traces.iter().map(|t| metric_at(t, k, false)).collect();
        let dists: Vec<f64> = traces.iter().map(|t| metric_at(t, k, true)).collect();
        fgap.push(PercentileSummary::from_values(&gaps));
        dist.push(PercentileSummary::from_values(&dists));
    }

    let epoch_to_eps_summaries = cfg
        .eps_list
        .iter()
        .map(|&eps| {
            let per_trial: Vec<Option<u64>> =
                traces.iter().map(|t| epoch_to_eps(t, eps, sample_count)).collect();
            EpochToEpsSummary::from_trials(eps, per_trial)
        })
        .collect();

    Ok(RunOutput {
        aggregate: AggregateResult {
            epochs,
            fgap,
            dist,
            epoch_to_eps: epoch_to_eps_summaries,
            diverged_trials,
            trials: cfg.trials,
        },
        traces,
    })
}

/// One row of the initial-stepsize sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha0: f64,
    pub eps: f64,
    pub median_epochs: Option<f64>,
    pub p5: Option<u64>,
    pub p95: Option<u64>,
    pub reached: u32,
    pub diverged: u32,
    pub trials: u32,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

/// Runs one experiment per grid stepsize; rows ordered by `alpha0`, then
/// by accuracy target.
pub fn sweep_initial_stepsize(cfg: &ExperimentConfig) -> Result<SweepTable, HarnessError> {
    cfg.validate()?;
    if cfg.alpha0_grid.is_empty() {
        return Err(HarnessError::config("sweep requires a non-empty alpha0 grid"));
    }
    let mut grid = cfg.alpha0_grid.clone();
    grid.sort_by(|a, b| a.total_cmp(b));
    let mut table = SweepTable::default();
    for alpha0 in grid {
        let point_cfg = cfg.with_alpha0(alpha0);
        let output = run_trials(&point_cfg)?;
        for summary in &output.aggregate.epoch_to_eps {
            table.rows.push(SweepRow {
                alpha0,
                eps: summary.eps,
                median_epochs: summary.median,
                p5: summary.p5,
                p95: summary.p95,
                reached: summary.reached,
                diverged: output.aggregate.diverged_trials,
                trials: output.aggregate.trials,
            });
        }
    }
    Ok(table)
}

/// 15 log-spaced points ending at 1.0, the default sweep grid (the
/// inferred counterpart of the published epoch-to-accuracy protocol; the
/// start of the published grid is not stated, so the span is documented
/// rather than asserted).
pub fn default_alpha0_grid() -> Vec<f64> {
    let lo: f64 = 0.01;
    let hi: f64 = 1.0;
    let n = 15;
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
