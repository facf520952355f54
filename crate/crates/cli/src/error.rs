use rstboost::boosting::BoostError;
use rstboost::metrics::MetricsError;
use rstboost::treebank::TreebankError;
use thiserror::Error;

/// Harness failures, grouped by process exit code.
#[derive(Debug, Error)]
pub enum HarnessError {
    /// Bad flags or configuration (exit 1).
    #[error("usage: {0}")]
    Usage(String),
    /// Unreadable or inconsistent data (exit 2).
    #[error("data error: {0}")]
    Data(String),
    /// A broken internal invariant (exit 3).
    #[error("internal error: {0}")]
    Internal(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 1,
            HarnessError::Data(_) => 2,
            HarnessError::Internal(_) => 3,
        }
    }
}

impl From<TreebankError> for HarnessError {
    fn from(e: TreebankError) -> Self {
        match e {
            TreebankError::InvalidConfig(_) => HarnessError::Usage(e.to_string()),
            _ => HarnessError::Data(e.to_string()),
        }
    }
}

impl From<BoostError> for HarnessError {
    fn from(e: BoostError) -> Self {
        match e {
            BoostError::InvalidConfig(_) | BoostError::InvalidPrefix { .. } => {
                HarnessError::Usage(e.to_string())
            }
            BoostError::EmptyTreebank
            | BoostError::UnknownRelation(_)
            | BoostError::Json(_)
            | BoostError::Io { .. }
            | BoostError::DimensionMismatch(_) => HarnessError::Data(e.to_string()),
            BoostError::Learner(_) | BoostError::Transition(_) | BoostError::TerminalState => {
                HarnessError::Internal(e.to_string())
            }
        }
    }
}

impl From<MetricsError> for HarnessError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::Boost(b) => b.into(),
            other => HarnessError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Data(e.to_string())
    }
}
