use std::path::PathBuf;

use thiserror::Error;

use crate::config::FieldError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config {0}")]
    Parse(#[from] FieldError),
    #[error("config field `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error(transparent)]
    Model(#[from] swiptmc::Error),
    #[error("self-check failed for {file}: {message}")]
    SelfCheck { file: String, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl std::error::Error for FieldError {}
