//! Error type with machine-readable categories for the CLI exit paths.

use thiserror::Error;

/// Coarse error category; the CLI maps each to a fixed exit code and
/// prints it in a parseable `error[<category>]: ...` form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Malformed or inconsistent configuration.
    Config,
    /// Filesystem or serialization failure.
    Io,
    /// A bound's precondition does not hold for the configuration.
    Precondition,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Config => 2,
            Self::Io => 3,
            Self::Precondition => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Config => "config",
            Self::Io => "io",
            Self::Precondition => "precondition",
        }
    }
}

#[derive(Debug, Error)]
#[error("{message}")]
pub struct HarnessError {
    pub category: ErrorCategory,
    pub message: String,
}

impl HarnessError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { category: ErrorCategory::Config, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { category: ErrorCategory::Io, message: message.into() }
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        Self { category: ErrorCategory::Precondition, message: message.into() }
    }

    /// Attaches path context to I/O failures.
    pub fn io_at(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Self::io(format!("{}: {err}", path.display()))
    }
}

impl From<clipopt_core::problems::ProblemError> for HarnessError {
    fn from(e: clipopt_core::problems::ProblemError) -> Self {
        Self::config(e.to_string())
    }
}

impl From<clipopt_core::schedule::ScheduleError> for HarnessError {
    fn from(e: clipopt_core::schedule::ScheduleError) -> Self {
        Self::config(e.to_string())
    }
}

impl From<clipopt_core::moreau::MoreauError> for HarnessError {
    fn from(e: clipopt_core::moreau::MoreauError) -> Self {
        Self::config(e.to_string())
    }
}

impl From<clipopt_core::theory::TheoryError> for HarnessError {
    fn from(e: clipopt_core::theory::TheoryError) -> Self {
        Self::precondition(e.to_string())
    }
}
