use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid action id {0} (expected 0..=6)")]
    InvalidAction(i64),
    #[error("invalid grid state: {0}")]
    InvalidState(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid level: {0}")]
    InvalidLevel(String),
    #[error("unknown level '{0}'")]
    UnknownLevel(String),
    #[error("level '{level}' produced no solvable instance in {attempts} attempts")]
    UnsatisfiableLevel { level: String, attempts: usize },
    #[error("mission is unreachable under the given dynamics")]
    Unsolvable,
    #[error("episode has already terminated; call reset")]
    SteppingTerminatedEpisode,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("metrics do not line up: {0}")]
    MismatchedMetrics(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
