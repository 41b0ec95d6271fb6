use std::path::PathBuf;

use thiserror::Error;
use weakcontact::{GeometryError, ParseError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("cannot parse expression at `{path}`: {source}")]
    Expr {
        path: String,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("cannot write report: {0}")]
    Output(String),
}

impl CliError {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> CliError {
        CliError::Schema { path: path.into(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
