//! Library surface of the experiment driver; the `funcest` binary is a thin
//! wrapper over these modules, and the integration tests exercise them
//! directly.

pub mod commands;
pub mod configs;
pub mod input;
pub mod table;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or input files; exit code 2.
    Validation(String),
    /// The computation itself failed (infeasible program, singular system,
    /// degenerate allocation); exit code 3.
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "validation error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}
