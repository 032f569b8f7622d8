use std::fmt;

use inferonomics_bench::BenchError;
use inferonomics_core::reporting::ReportError;
use inferonomics_core::{CostError, DatasetError, SelectionError};

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit 1.
    Validation(String),
    /// Files, sockets and remote endpoints: exit 2.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }

    pub fn io(context: impl fmt::Display, e: impl fmt::Display) -> Self {
        CliError::Io(format!("{context}: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<CostError> for CliError {
    fn from(e: CostError) -> Self {
        match e {
            CostError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Cost(c) => c.into(),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SelectionError> for CliError {
    fn from(e: SelectionError) -> Self {
        match e {
            SelectionError::Cost(c) => c.into(),
            SelectionError::Dataset(d) => d.into(),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Selection(s) => s.into(),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::InvalidConfig(_) | BenchError::InvalidWorkload(_) => CliError::Validation(e.to_string()),
            BenchError::Dataset(d) => d.into(),
            _ => CliError::Io(e.to_string()),
        }
    }
}
