use bovirial_core::Error as CoreError;
use thiserror::Error;

/// Failures of a subcommand, each tied to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("manifest check failed: {0}")]
    Manifest(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("non-finite value in column {column} of {file}")]
    NonFinite { file: String, column: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for bad input, 3 for blow-up, 4 for under-resolved data, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::MissingData(_) | CliError::Manifest(_) => 2,
            CliError::Core(e) => match e {
                CoreError::InvalidGrid(_) | CoreError::InvalidArgument(_) | CoreError::GridMismatch => 2,
                CoreError::BlowUp { .. } => 3,
                CoreError::UnderResolved(_) => 4,
                _ => 1,
            },
            _ => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::MissingData("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(CoreError::BlowUp { t: 1.0, max_abs: 1e13 }).exit_code(), 3);
        assert_eq!(CliError::Core(CoreError::UnderResolved("x".into())).exit_code(), 4);
        assert_eq!(CliError::Core(CoreError::InvalidGrid("x".into())).exit_code(), 2);
        assert_eq!(CliError::Core(CoreError::NonFinite { index: 0 }).exit_code(), 1);
    }
}
