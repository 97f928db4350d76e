use thiserror::Error;

/// Failures of a command, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] gmtk::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use gmtk::Error as E;
        match self {
            CliError::Input(_) | CliError::Io { .. } => 2,
            CliError::Core(e) => match e {
                E::Parse(_) | E::InvalidParameter { .. } | E::DimensionMismatch { .. } | E::NotACycle { .. } => 2,
                E::Infeasible(_) => 4,
                E::Domain { .. } | E::RankViolation { .. } | E::SearchFailed { .. } | E::NotAdmissible(_) | E::BudgetExceeded { .. } | E::Stage { .. } => 3,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

pub fn json_error(path: &str, e: serde_json::Error) -> CliError {
    CliError::Input(format!("{path}: line {}: {e}", e.line()))
}
