use std::io;
use std::path::PathBuf;

use thiserror::Error;
use wigi_core::{
    AtlasError, ConfigError, FetchError, IngestError, InputError, LexiconError, RecordsError,
};

/// Exit status for input problems: missing files, bad configuration, unreadable tables.
pub const EXIT_INPUT: i32 = 1;
/// Exit status when the dump parse aborts.
pub const EXIT_PARSE: i32 = 2;
/// Exit status for failures not caused by the inputs.
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("{what} not found: {}", path.display())]
    MissingInput { what: String, path: PathBuf },
    #[error("report `{report}` needs {what}")]
    ReportInput { report: &'static str, what: String },
    #[error("property configuration: {0}")]
    Properties(#[from] ConfigError),
    #[error("dump: {0}")]
    Ingest(#[from] IngestError),
    #[error("{}: {source}", path.display())]
    Records {
        path: PathBuf,
        #[source]
        source: RecordsError,
    },
    #[error("atlas: {0}")]
    Atlas(#[from] AtlasError),
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("lexicon: {0}")]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Ingest(_) => EXIT_PARSE,
            CliError::Output { .. } | CliError::Internal(_) => EXIT_INTERNAL,
            CliError::Fetch(FetchError::MissingUserAgent | FetchError::BadWiki(_)) => EXIT_INPUT,
            CliError::Fetch(_) => EXIT_INTERNAL,
            _ => EXIT_INPUT,
        }
    }
}
