use std::io;

use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("numeric failure: {0}")]
    Numeric(#[from] htscatter_core::Error),
    #[error("self-check failed: {0}")]
    Check(String),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

impl RunError {
    /// 2 for configuration problems, 3 for numeric failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numeric(_) | RunError::Check(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}
