use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("LP relaxation is unbounded")]
    Unbounded,

    #[error("relaxed master problem is infeasible")]
    MasterInfeasible,

    #[error("recourse problem of scenario {0} is infeasible; complete recourse violated")]
    RecourseInfeasible(usize),

    #[error("recourse problem of scenario {0} is unbounded")]
    RecourseUnbounded(usize),

    #[error("simplex iteration limit reached")]
    IterationLimit,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
