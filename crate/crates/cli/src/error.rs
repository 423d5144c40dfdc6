use aoi_mec_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn core(context: impl Into<String>, source: CoreError) -> Self {
        CliError::Core {
            context: context.into(),
            source,
        }
    }

    /// 2 for configuration problems, 3 for infeasible or unstable
    /// operating points, 4 for numeric failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core { source, .. } => match source {
                CoreError::InvalidParameter(_) => 2,
                CoreError::Infeasible(_) | CoreError::Instability { .. } | CoreError::NotPartial(_) => 3,
                CoreError::Singularity(_) | CoreError::Domain(_) => 4,
                _ => 1,
            },
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}
