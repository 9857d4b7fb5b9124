//! Command-line interface: seeded experiment runs, stepsize sweeps, bound
//! verification, the divergence demonstration, and instance export.

use clap::{Parser, Subcommand};
use clipopt_harness::config::{Algorithm, Budget, ExperimentConfig, ProblemConfig};
use clipopt_harness::emit::{emit, EmitFormat, EmitPayload};
use clipopt_harness::engine::{run_trials, sweep_initial_stepsize};
use clipopt_harness::error::HarnessError;
use clipopt_harness::verify::{verify_bounds, BoundSelection, VerifySettings};
use clipopt_harness::Verbosity;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "clipopt",
    about = "Clipped stochastic subgradient experiments: seeded runs, sweeps, and bound verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config: per-trial traces plus the aggregate.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Run one experiment per initial stepsize on the config's grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Verify a theoretical bound against a seeded trial ensemble.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        bound: BoundSelection,
        /// Report path (JSON).
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
        #[arg(long)]
        checkpoint_stride: Option<u64>,
        #[arg(long)]
        burn_in: Option<u64>,
        /// Horizons K for the complexity bound.
        #[arg(long, value_delimiter = ',')]
        horizons: Option<Vec<u64>>,
        /// Certified-region radius for the complexity bound.
        #[arg(long)]
        region_radius: Option<f64>,
    },
    /// Reproduce the super-exponential divergence of vanilla SGD on the
    /// steep quartic and check the factorial lower bound.
    DivergenceDemo {
        #[arg(long, default_value_t = 0.03)]
        alpha1: f64,
        /// Initial point (must be at least sqrt(3/alpha1)).
        #[arg(long, default_value_t = 10.0)]
        x1: f64,
        #[arg(long, default_value_t = 50)]
        iterations: u64,
        #[arg(long, default_value = "divergence.json")]
        out: PathBuf,
    },
    /// Dump the problem data of a config's instance as a flat CSV.
    ExportInstance {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "instance.csv")]
        out: PathBuf,
    },
}

fn ensure_dir(dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io_at(dir, e))
}

fn run(cli: Cli, verbosity: Verbosity) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run { config, out_dir } => {
            let cfg = ExperimentConfig::load(&config)?;
            ensure_dir(&out_dir)?;
            verbosity.log(
                Verbosity::Info,
                format!("running {} trials (seed {})", cfg.trials, cfg.seed),
            );
            let output = run_trials(&cfg)?;
            emit(
                &EmitPayload::Aggregate(&output.aggregate),
                &out_dir.join("aggregate.csv"),
                EmitFormat::Csv,
            )?;
            emit(
                &EmitPayload::Aggregate(&output.aggregate),
                &out_dir.join("aggregate.json"),
                EmitFormat::Json,
            )?;
            let epochs_path = out_dir.join("epoch_to_eps.csv");
            let mut buf = Vec::new();
            clipopt_harness::emit::write_epoch_to_eps_csv(&output.aggregate, &mut buf)
                .map_err(|e| HarnessError::io_at(&epochs_path, e))?;
            std::fs::write(&epochs_path, buf).map_err(|e| HarnessError::io_at(&epochs_path, e))?;
            for (trial, trace) in output.traces.iter().enumerate() {
                let path = out_dir.join(format!("trace_{trial:03}.csv"));
                emit(&EmitPayload::Trace(trace), &path, EmitFormat::Csv)?;
            }
            verbosity.log(
                Verbosity::Info,
                format!(
                    "done: {} diverged of {} trials; outputs in {}",
                    output.aggregate.diverged_trials,
                    output.aggregate.trials,
                    out_dir.display()
                ),
            );
        }
        Command::Sweep { config, out_dir } => {
            let cfg = ExperimentConfig::load(&config)?;
            ensure_dir(&out_dir)?;
            verbosity.log(
                Verbosity::Info,
                format!("sweeping {} stepsizes", cfg.alpha0_grid.len()),
            );
            let table = sweep_initial_stepsize(&cfg)?;
            emit(&EmitPayload::Sweep(&table), &out_dir.join("sweep.csv"), EmitFormat::Csv)?;
            emit(&EmitPayload::Sweep(&table), &out_dir.join("sweep.json"), EmitFormat::Json)?;
            verbosity.log(
                Verbosity::Info,
                format!("done: {} rows in {}", table.rows.len(), out_dir.display()),
            );
        }
        Command::Verify { config, bound, out, checkpoint_stride, burn_in, horizons, region_radius } => {
            let cfg = ExperimentConfig::load(&config)?;
            let mut settings = VerifySettings::default();
            if let Some(s) = checkpoint_stride {
                settings.checkpoint_stride = s.max(1);
            }
            settings.burn_in = burn_in.or(settings.burn_in);
            if let Some(h) = horizons {
                settings.horizons = h;
            }
            if let Some(r) = region_radius {
                settings.region_radius = r;
            }
            let report = verify_bounds(&cfg, bound, &settings)?;
            emit(&EmitPayload::Report(&report), &out, EmitFormat::Json)?;
            let violations = report.violations();
            verbosity.log(
                Verbosity::Info,
                format!(
                    "{}: {} checkpoints, {} violations -> {}",
                    report.bound,
                    report.verdicts.len(),
                    violations,
                    out.display()
                ),
            );
            if violations > 0 {
                return Err(HarnessError::precondition(format!(
                    "bound {} violated at {violations} checkpoint(s); see {}",
                    report.bound,
                    out.display()
                )));
            }
        }
        Command::DivergenceDemo { alpha1, x1, iterations, out } => {
            let cfg = ExperimentConfig {
                version: 1,
                problem: ProblemConfig::Quartic { epsilon: 1.0, noise: 0.0 },
                algorithm: Algorithm::Sgd,
                schedules: clipopt_core::schedule::ScheduleSet {
                    step: clipopt_core::schedule::StepSchedule::Polynomial {
                        alpha0: alpha1,
                        tau: 1.0,
                    },
                    clip: None,
                    momentum: None,
                    batch: clipopt_core::schedule::BatchSchedule::Unit,
                },
                trials: 1,
                budget: Budget::Iterations(iterations),
                seed: 0,
                alpha0_grid: vec![],
                eps_list: vec![],
                diagnostic_stride: 10,
                moreau: None,
                shared_data: true,
                trace_stride: 1,
                x0: Some(vec![x1]),
            };
            let report = verify_bounds(&cfg, BoundSelection::Example1, &VerifySettings::default())?;
            emit(&EmitPayload::Report(&report), &out, EmitFormat::Json)?;
            for note in &report.notes {
                verbosity.log(Verbosity::Info, note);
            }
            if report.violations() > 0 {
                return Err(HarnessError::precondition(
                    "factorial lower bound violated; see report",
                ));
            }
            verbosity.log(
                Verbosity::Info,
                format!(
                    "factorial lower bound held at all {} recorded iterates -> {}",
                    report.verdicts.len(),
                    out.display()
                ),
            );
        }
        Command::ExportInstance { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let inst = cfg.problem.build(clipopt_harness::engine::data_seed(&cfg, 0))?;
            let mut buf = Vec::new();
            clipopt_core::problems::write_instance_csv(&inst, &mut buf)
                .map_err(|e| HarnessError::io_at(&out, e))?;
            std::fs::write(&out, buf).map_err(|e| HarnessError::io_at(&out, e))?;
            verbosity.log(Verbosity::Info, format!("instance data -> {}", out.display()));
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let verbosity = Verbosity::from_env();
    if let Err(e) = run(cli, verbosity) {
        eprintln!("error[{}]: {}", e.category.as_str(), e);
        std::process::exit(e.category.exit_code());
    }
}
