use std::path::{Path, PathBuf};

use ipm_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const TOLERANCE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const BLOW_UP: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl LabError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        LabError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Core(e) => match e {
                CoreError::BlowUp { .. } | CoreError::Cfl { .. } | CoreError::Stability { .. } => exit::BLOW_UP,
                CoreError::Quadrature { .. } | CoreError::Fit { .. } => exit::TOLERANCE,
                _ => exit::CONFIG,
            },
            _ => exit::CONFIG,
        }
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Format(e.to_string())
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Format(e.to_string())
    }
}
