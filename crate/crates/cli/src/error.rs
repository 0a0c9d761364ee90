use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse configuration: {0}")]
    Parse(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] rotcool::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub(crate) fn from_core_config(e: rotcool::Error) -> Self {
        CliError::Core(e)
    }

    /// 2 for configuration problems, 3 for numerical or output failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::UnknownPreset(_) | CliError::Config(_) => 2,
            CliError::Core(e) => core_code(e),
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 3,
        }
    }
}

fn core_code(e: &rotcool::Error) -> i32 {
    use rotcool::Error as E;
    match e {
        E::Domain(_) | E::InvalidInput { .. } | E::UnknownLevel(_) | E::UnknownMode(_) | E::Design(_) => 2,
        E::Convergence { .. } | E::Instability { .. } | E::Propagation { .. } => 3,
        E::Protocol { source, .. } => core_code(source),
    }
}
