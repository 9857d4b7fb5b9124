//! Stochastic subgradient optimization with gradient clipping.
//!
//! This crate implements the building blocks for running and analyzing
//! clipped stochastic (sub)gradient methods on rapidly growing and weakly
//! convex objectives:
//!
//! - [`clip`]: the Euclidean-ball clipping operator and divergence cutoffs.
//! - [`schedule`]: stepsize, clip-threshold, momentum, and batch schedules.
//! - [`step`]: single-step update rules for (clipped) SGD and the clipped
//!   stochastic heavy ball method.
//! - [`problems`]: a stochastic problem suite (noisy quartic, robust phase
//!   retrieval, absolute linear regression) with subgradient oracles and
//!   known-optimum metadata.
//! - [`moreau`]: proximal points and Moreau-envelope gradients, the
//!   near-stationarity measure for weakly convex minimization.
//! - [`lyapunov`]: the W/V Lyapunov diagnostics used to probe the descent
//!   property of the clipped heavy-ball analysis.
//! - [`trace`]: per-iteration trajectory records and CSV export.
//! - [`theory`]: closed-form calculators for the stability and convergence
//!   bounds that the experiment harness verifies against empirical traces.
//! - [`rng`]: the seeded, splittable random-number streams that make every
//!   experiment reproducible.
//!
//! All arithmetic is in `f64`. Every function here is deterministic given
//! its inputs; randomness enters only through explicit [`rng::RngStream`]
//! handles owned by the caller.

pub mod clip;
pub mod linalg;
pub mod lyapunov;
pub mod moreau;
pub mod problems;
pub mod rng;
pub mod schedule;
pub mod step;
pub mod theory;
pub mod trace;

pub use clip::{clip_vec, is_diverged, ClipError, DIVERGENCE_CUTOFF};
pub use schedule::{
    BatchSchedule, ClipSchedule, MomentumSchedule, ScheduleError, ScheduleSet, ScheduleValues,
    StepSchedule,
};
pub use step::{sgd_step, shb_init, shb_step, IterState, StepError};
