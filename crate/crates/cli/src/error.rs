use std::io;
use std::path::Path;

use mteval::corpus::CorpusError;
use mteval::human::HumanError;
use mteval::lexicon::LexiconError;
use mteval::meteor::MeteorError;
use mteval::report::ReportError;
use mteval::scoring::ScoreError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    pub fn io(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            context: path.display().to_string(),
            source,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Io { path, source } => CliError::Io {
                context: path.display().to_string(),
                source,
            },
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<HumanError> for CliError {
    fn from(e: HumanError) -> Self {
        match e {
            HumanError::Io(source) => CliError::Io {
                context: "rating log".into(),
                source,
            },
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<LexiconError> for CliError {
    fn from(e: LexiconError) -> Self {
        match e {
            LexiconError::Io(source) => CliError::Io {
                context: "lexicon".into(),
                source,
            },
            other => CliError::Validation(other.to_string()),
        }
    }
}

macro_rules! validation_from {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Validation(e.to_string())
            }
        })*
    };
}

validation_from!(ScoreError, ReportError, MeteorError);
