use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Core(#[from] mpwm_core::Error),
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("reference norm is zero; relative error undefined")]
    ZeroReference,
}

impl SimError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        SimError::Io { path: path.display().to_string(), source }
    }
}

pub type SimResult<T> = std::result::Result<T, SimError>;
