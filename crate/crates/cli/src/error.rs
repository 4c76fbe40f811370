use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] cavityspec_core::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    /// Some rows of a sweep failed to converge; the file was still written.
    #[error("{0}")]
    RowsFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use cavityspec_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_input_error() => 2,
            CliError::Core(E::Supercritical(_)) => 2,
            CliError::Core(_) | CliError::RowsFailed(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        use cavityspec_core::Error as E;
        match self {
            CliError::Config(_) => "config",
            CliError::Core(E::Validation { .. }) => "validation",
            CliError::Core(E::Domain { .. }) => "domain",
            CliError::Core(E::NonConvergence { .. }) => "non_convergence",
            CliError::Core(E::Supercritical(_)) => "supercritical",
            CliError::Core(E::NoRoot(_)) => "no_root",
            CliError::Io(_) => "io",
            CliError::RowsFailed(_) => "non_convergence",
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "exit_code": self.exit_code(),
            }
        })
        .to_string()
    }
}
