use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is undefined at mu == lambda.
    #[error("singular parameters: {0} requires mu != lambda")]
    SingularParameters(&'static str),

    #[error("cost guard: {what} = {value} exceeds the limit {limit}; {hint}")]
    CostGuard {
        what: &'static str,
        value: u64,
        limit: u64,
        hint: &'static str,
    },

    #[error("censored fraction {fraction:.5} exceeds the allowed {allowed:.5} ({censored} of {total} replicates)")]
    Censoring {
        censored: u64,
        total: u64,
        fraction: f64,
        allowed: f64,
    },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
