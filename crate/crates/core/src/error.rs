use std::path::PathBuf;

use thiserror::Error;

use crate::mip::SolverError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config parse error: {0}")]
    Parse(String),

    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("series file {path:?} could not be read: {reason}")]
    MissingSeries { path: PathBuf, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "inertia {inertia} MW*s is too low for EFR {efr} MW: no finite PFR volume secures the nadir"
    )]
    InfeasibleInertia { inertia: f64, efr: f64 },

    #[error("EFR {efr} MW + PFR {pfr} MW cannot cover a {loss} MW loss; frequency never settles")]
    NoNadir { efr: f64, pfr: f64, loss: f64 },

    #[error("invalid quantiles: {0}")]
    InvalidQuantile(String),

    #[error("branch weights sum to {0}, expected 1")]
    WeightSum(f64),

    #[error("conflicting formulation options: {0}")]
    OptionConflict(String),

    #[error("planner failed at hour {hour}")]
    Planner {
        hour: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Solver(#[from] SolverError),

    #[error("solve ended with status {0} and no usable solution")]
    Unsolved(String),

    #[error("mismatched coverage: {0}")]
    Coverage(String),

    #[error("{0}")]
    Report(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Report(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Report(format!("json: {e}"))
    }
}
