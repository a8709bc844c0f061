//! Sweep, verify and figure-preset front-end for `fsorf-core`.

pub mod analysis;
pub mod config;
pub mod output;
pub mod presets;
pub mod sweep;
pub mod verify;

use config::ConfigError;

/// Everything that ends a run early, mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("verification failed")]
    Verification,
    #[error("{0} cell(s) failed to evaluate")]
    Numerical(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Verification => 2,
            CliError::Numerical(_) => 3,
        }
    }
}
