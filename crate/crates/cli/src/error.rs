use std::path::Path;

use spectral_causality::Error as CoreError;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    /// 2 for configuration problems (including unreadable or unwritable
    /// paths), 3 for bad data, 4 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Data(_) | CliError::Csv { .. } => 3,
            CliError::Core(e) => match e {
                CoreError::Config(_) => 2,
                CoreError::Numerical(_) => 4,
                CoreError::Input(_)
                | CoreError::InsufficientData { .. }
                | CoreError::Dimension(_)
                | CoreError::Data(_) => 3,
            },
        }
    }
}
