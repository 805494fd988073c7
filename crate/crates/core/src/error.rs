use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("no feasible DAG: {0}")]
    Infeasible(String),
    #[error("exhaustive search refused for p = {p} (limit {limit})")]
    TooLarge { p: usize, limit: usize },
    #[error("empty node set")]
    EmptyNodeSet,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
