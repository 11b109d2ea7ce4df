use std::fmt;

use ssfinsler::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERDICT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_REGULARITY: i32 = 4;

/// A failure with its exit code and the place it happened.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub module: &'static str,
    pub operation: &'static str,
    pub r: Option<f64>,
    pub s: Option<f64>,
    pub message: String,
}

impl CliError {
    pub fn config(message: String) -> Self {
        CliError {
            code: EXIT_CONFIG,
            module: "cli",
            operation: "config",
            r: None,
            s: None,
            message,
        }
    }

    pub fn io(operation: &'static str, message: String) -> Self {
        CliError {
            code: EXIT_NUMERIC,
            module: "cli",
            operation,
            r: None,
            s: None,
            message,
        }
    }

    /// Wraps a library error; the point falls back to the one carried by
    /// the error itself.
    pub fn numeric(
        module: &'static str,
        operation: &'static str,
        point: Option<(f64, Option<f64>)>,
        err: Error,
    ) -> Self {
        let code = match err {
            Error::Regularity { .. } | Error::Admissibility { .. } => EXIT_REGULARITY,
            Error::Syntax { .. } | Error::UnknownIdentifier(_) | Error::DegenerateInput(_) => {
                EXIT_CONFIG
            }
            _ => EXIT_NUMERIC,
        };
        let carried = match err {
            Error::Regularity { r, s, .. } => Some((r, Some(s))),
            Error::Quadrature { r, .. }
            | Error::CrossCheck { r, .. }
            | Error::Admissibility { r, .. }
            | Error::DomainExit { r, .. } => Some((r, None)),
            _ => None,
        };
        let (r, s) = match carried.or(point) {
            Some((r, s)) => (Some(r), s.or(point.and_then(|p| p.1))),
            None => (None, None),
        };
        CliError {
            code,
            module,
            operation,
            r,
            s,
            message: err.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}", self.module, self.operation)?;
        match (self.r, self.s) {
            (Some(r), Some(s)) => write!(f, " at (r={r}, s={s})")?,
            (Some(r), None) => write!(f, " at r={r}")?,
            _ => {}
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for CliError {}
