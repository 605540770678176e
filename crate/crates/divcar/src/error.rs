use thiserror::Error;

/// Errors produced by corpus loading, graph construction, sampling,
/// search and ranking.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("keyword {0:?} is not covered by any vertex")]
    UncoverableKeyword(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("no sample covered the query after retries")]
    NoValidSample,

    #[error(
        "no recommendation survived ranking ({candidates} candidates, {distinct} distinct)"
    )]
    EmptyResult { candidates: usize, distinct: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
