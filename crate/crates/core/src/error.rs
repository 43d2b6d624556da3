use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{}:{line}: {msg}", path.display())]
    ConfigLine { path: PathBuf, line: usize, msg: String },

    #[error("integration error at t={t:.6e} (stage {stage}, cell {cell}): {msg}")]
    Integration {
        t: f64,
        stage: usize,
        cell: usize,
        msg: String,
    },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("quadrature failed for {integral}: {msg}")]
    Quadrature { integral: String, msg: String },

    #[error("profile rejected: {0}")]
    Profile(String),

    #[error("validation error in {}, row {row}: {msg}", path.display())]
    Validation { path: PathBuf, row: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
