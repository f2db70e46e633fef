use altocc_core::analytics::AnalyticsError;
use altocc_core::ingest::IngestError;
use altocc_core::montecarlo::MonteCarloError;
use altocc_core::raytrace::RaytraceError;
use altocc_core::{CurveError, LosError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Data(format!("{}: {e}", path.display()))
    }
}

impl From<AnalyticsError> for CliError {
    fn from(e: AnalyticsError) -> Self {
        match e {
            AnalyticsError::Domain { .. } => CliError::Config(e.to_string()),
            AnalyticsError::Los(inner) => inner.into(),
            AnalyticsError::Curve(inner) => inner.into(),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<LosError> for CliError {
    fn from(e: LosError) -> Self {
        match e {
            LosError::Domain { .. } | LosError::BelowHeight { .. } | LosError::BadGrid => {
                CliError::Config(e.to_string())
            }
            LosError::Io(_) | LosError::Parse(_) => CliError::Data(e.to_string()),
            LosError::FitFailed { .. } | LosError::AtHeight { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<CurveError> for CliError {
    fn from(e: CurveError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<MonteCarloError> for CliError {
    fn from(e: MonteCarloError) -> Self {
        match e {
            MonteCarloError::Transmitters(_) | MonteCarloError::Csv(_) | MonteCarloError::Curve(_) => {
                CliError::Data(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<RaytraceError> for CliError {
    fn from(e: RaytraceError) -> Self {
        match e {
            RaytraceError::BadGrid(_) | RaytraceError::BadHeight(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Domain { .. } => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}
