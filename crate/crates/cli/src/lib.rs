//! Pipeline commands behind the `bogp` binary.

pub mod commands;
pub mod config;
mod lock;

use std::fmt;

pub use config::{DataSource, Overrides, RunConfig};
pub use lock::OutputLock;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_MISSING: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

/// A command failure carrying its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }

    pub fn missing(message: impl Into<String>) -> Self {
        Self { code: EXIT_MISSING, message: message.into() }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self { code: EXIT_INTERNAL, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

/// Ingestion and parameter problems are the caller's to fix; everything else
/// is ours.
impl From<bogp_core::Error> for Failure {
    fn from(e: bogp_core::Error) -> Self {
        use bogp_core::Error as E;
        let code = match e {
            E::Io { .. }
            | E::Csv(_)
            | E::MissingLabelColumn(_)
            | E::InvalidLabel { .. }
            | E::NoUsableColumns
            | E::AllMissingColumn(_)
            | E::TooFewInstances { .. }
            | E::InvalidParameter(_)
            | E::OutOfDomain { .. } => EXIT_INPUT,
            _ => EXIT_INTERNAL,
        };
        Self { code, message: e.to_string() }
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;
