use newsframe_core::datasets::DatasetError;
use newsframe_core::framing::FramingError;
use newsframe_core::legislation::LegislationError;
use newsframe_core::newscycle::CycleError;
use newsframe_ingest::IngestError;

/// Input problems exit with 2, failures while computing with 3.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Auth(_) | IngestError::RateLimited { .. } | IngestError::Network(_) | IngestError::Json(_) => {
                CliError::Runtime(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<FramingError> for CliError {
    fn from(e: FramingError) -> Self {
        match e {
            FramingError::EmptyCorpus(p) => CliError::Input(format!("EmptyCorpus: period {p} corpus is empty")),
            FramingError::OverlappingPeriods
            | FramingError::MissingCalibration(_)
            | FramingError::TooFewScores(_)
            | FramingError::Keywords(_) => CliError::Input(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<CycleError> for CliError {
    fn from(e: CycleError) -> Self {
        match e {
            CycleError::EmptyCorpus => CliError::Input("EmptyCorpus: corpus is empty".into()),
            CycleError::Lexicon(..) | CycleError::Corpus(_) | CycleError::Io(_) => CliError::Input(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<LegislationError> for CliError {
    fn from(e: LegislationError) -> Self {
        match e {
            LegislationError::EmptyRow { .. } | LegislationError::Metrics(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::DimensionMismatch { .. } | DatasetError::NoQuiescentYears => {
                CliError::Runtime(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}
