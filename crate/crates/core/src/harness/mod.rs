//! Config-driven front end shared by the `qcmps` binary and the examples.
//!
//! Exit codes are stable: see the `EXIT_*` constants.

pub mod cli;
pub mod commands;
pub mod config;
pub mod trace;

use crate::error::Error;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

pub const EXIT_OK: i32 = 0;
/// I/O and other unexpected errors.
pub const EXIT_IO: i32 = 1;
/// Bad config, bad input file or invalid argument.
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
/// Cross-validation or gradient check above tolerance.
pub const EXIT_VALIDATION: i32 = 4;
pub const EXIT_GUARD: i32 = 5;

pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Parse { .. }
        | Error::Config { .. }
        | Error::InvalidArgument(_)
        | Error::DimensionMismatch(_)
        | Error::IndexOutOfRange { .. }
        | Error::NonHermitian => EXIT_CONFIG,
        Error::NumericalFailure { .. } => EXIT_NUMERICAL,
        Error::Validation(_) => EXIT_VALIDATION,
        Error::GuardExceeded { .. } => EXIT_GUARD,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => EXIT_IO,
    }
}
