//! Seeded multi-trial experiment harness for clipped stochastic
//! subgradient methods: configuration, trajectory driving, aggregation,
//! bound verification, and deterministic CSV/JSON emission.

pub mod aggregate;
pub mod config;
pub mod emit;
pub mod engine;
pub mod error;
pub mod verify;

pub use config::{Algorithm, Budget, ExperimentConfig, ProblemConfig};
pub use engine::{run_trajectory, run_trials, sweep_initial_stepsize};
pub use error::{ErrorCategory, HarnessError};
pub use verify::{verify_bounds, BoundSelection, VerifySettings};

/// Output verbosity, selected by the `CLIPOPT_VERBOSITY` environment
/// variable (`quiet`, `info`, or `debug`; default `info`). The only
/// ambient configuration the tools read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verbosity {
    Quiet,
    Info,
    Debug,
}

impl Verbosity {
    pub fn from_env() -> Self {
        match std::env::var("CLIPOPT_VERBOSITY").as_deref() {
            Ok("quiet") => Self::Quiet,
            Ok("debug") => Self::Debug,
            _ => Self::Info,
        }
    }

    /// Prints a progress line to stderr when the level permits.
    pub fn log(self, level: Verbosity, message: impl AsRef<str>) {
        if self >= level {
            eprintln!("{}", message.as_ref());
        }
    }
}
