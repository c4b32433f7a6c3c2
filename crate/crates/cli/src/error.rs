use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] zeta_ladder::Error),

    #[error("usage: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 0 success, 2 domain/usage/input, 3 degenerate configuration,
    /// 4 precision failure.
    pub fn exit_code(&self) -> i32 {
        use zeta_ladder::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::Degenerate { .. } | E::Existence { .. } | E::Calibration(_) => 3,
                E::Precision { .. } | E::Internal(_) => 4,
                E::Domain(_)
                | E::OutOfRange { .. }
                | E::Range(_)
                | E::Integrity(_)
                | E::Io(_)
                | E::Parse(_) => 2,
            },
            CliError::Usage(_) | CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
