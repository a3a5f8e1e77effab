use std::io;
use std::path::Path;

use mtd_core::{ClaimsError, EngineError, EvalError, SynthError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input files, infeasible specs.
    #[error("{0}")]
    Input(String),
    /// Non-convergence or a failed random walk.
    #[error("{0}")]
    Algorithm(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Algorithm(_) => 3,
        }
    }

    pub fn io(path: &Path, err: io::Error) -> Self {
        CliError::Input(format!("{}: {err}", path.display()))
    }

    pub fn claims(path: &Path, err: ClaimsError) -> Self {
        CliError::Input(format!("{}: {err}", path.display()))
    }
}

fn flag_name(field: &str) -> String {
    match field {
        "max_outer_iters" => "--max-iters".into(),
        other => format!("--{}", other.replace('_', "-")),
    }
}

impl From<EngineError> for CliError {
    fn from(err: EngineError) -> Self {
        match err {
            EngineError::Config { field, value, bound } => {
                CliError::Input(format!("invalid {} = {value}: must be {bound}", flag_name(field)))
            }
            EngineError::Claims(e) => CliError::Input(e.to_string()),
            e @ EngineError::Walk { .. } => CliError::Algorithm(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(err: EvalError) -> Self {
        CliError::Input(err.to_string())
    }
}

impl From<SynthError> for CliError {
    fn from(err: SynthError) -> Self {
        CliError::Input(err.to_string())
    }
}
