use sgml_core::ied::IedError;
use sgml_core::power::PowerError;
use sgml_core::scada::ScadaError;
use sgml_core::scl::SclError;

/// A failed command. `Invalid` means the inputs were read but did not pass
/// checking; everything else is an operational failure.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{stage}: {message}")]
    Invalid { stage: &'static str, message: String },
    #[error("{stage}: {cause:#}")]
    Failed { stage: &'static str, cause: anyhow::Error },
}

impl CliError {
    pub fn invalid(stage: &'static str, message: impl Into<String>) -> Self {
        CliError::Invalid {
            stage,
            message: message.into(),
        }
    }

    pub fn failed(stage: &'static str, cause: impl Into<anyhow::Error>) -> Self {
        let cause = cause.into();
        if is_validation_failure(&cause) {
            return CliError::Invalid {
                stage,
                message: format!("{cause:#}"),
            };
        }
        CliError::Failed { stage, cause }
    }

    pub fn stage(&self) -> &'static str {
        match self {
            CliError::Invalid { stage, .. } | CliError::Failed { stage, .. } => stage,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid { .. } => 1,
            CliError::Failed { .. } => 2,
        }
    }
}

fn is_validation_failure(e: &anyhow::Error) -> bool {
    if let Some(scl) = e.downcast_ref::<SclError>() {
        return !matches!(scl, SclError::MalformedXml(_) | SclError::UnclassifiableDocument(_));
    }
    matches!(e.downcast_ref::<IedError>(), Some(IedError::ValidationFailed(_)))
        || matches!(e.downcast_ref::<PowerError>(), Some(PowerError::ValidationFailed(_)))
        || matches!(
            e.downcast_ref::<ScadaError>(),
            Some(ScadaError::ValidationFailed(_) | ScadaError::DanglingDataSourceXid { .. })
        )
}

pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T, E: Into<anyhow::Error>> StageExt<T> for Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|e| CliError::failed(stage, e))
    }
}
