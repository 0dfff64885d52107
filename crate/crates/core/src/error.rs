use std::io;
use std::path::PathBuf;

use thiserror::Error;
use wigi_stats::StatsError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{value}` is not a valid {prefix}-identifier")]
pub struct IdError {
    pub value: String,
    pub prefix: char,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid {what}: `{value}`")]
pub struct ParseValueError {
    pub what: &'static str,
    pub value: String,
}

impl ParseValueError {
    pub(crate) fn new(what: &'static str, value: &str) -> Self {
        Self {
            what,
            value: value.to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("read failed near byte {offset}: {source}")]
    Io {
        offset: u64,
        #[source]
        source: io::Error,
    },
    #[error("input is not valid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { offset: u64 },
    #[error("malformed entity on line {line}: {message}")]
    Malformed { line: u64, message: String },
}

#[derive(Debug, Error)]
pub enum RecordsError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("csv error at row {row}: {source}")]
    Csv {
        row: u64,
        #[source]
        source: csv::Error,
    },
    #[error("header is missing columns: {}", missing.join(", "))]
    MissingColumns { missing: Vec<String> },
    #[error("header has unexpected columns or order: {found}")]
    UnexpectedHeader { found: String },
    #[error("row {row}: duplicate id {id}")]
    DuplicateId { row: u64, id: String },
    #[error("row {row}: {message}")]
    Malformed { row: u64, message: String },
}

#[derive(Debug, Error)]
pub enum AtlasError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{source_name} row {row}: unknown cluster `{value}`")]
    UnknownCluster {
        source_name: String,
        row: usize,
        value: String,
    },
    #[error("{source_name} row {row}: {message}")]
    Malformed {
        source_name: String,
        row: usize,
        message: String,
    },
}

#[derive(Debug, Error)]
pub enum IndicatorError {
    #[error("ratio undefined: no known-gender records")]
    UndefinedRatio,
    #[error("only {shared} countries shared with the external index, need at least {needed}")]
    TooFewShared { shared: usize, needed: usize },
    #[error("only {overlap} buckets overlap the population table, need at least {needed}")]
    TooFewBuckets { overlap: usize, needed: usize },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path} row {row}: {message}")]
    Row {
        path: PathBuf,
        row: u64,
        message: String,
    },
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
}

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("page {wiki}:{title} does not exist")]
    MissingPage { wiki: String, title: String },
    #[error("offline and not cached: {wiki}:{title}")]
    Offline { wiki: String, title: String },
    #[error("HTTP {status} for {wiki}:{title}")]
    Http {
        status: u16,
        wiki: String,
        title: String,
    },
    #[error("request for {wiki}:{title} failed: {message}")]
    Transport {
        wiki: String,
        title: String,
        message: String,
    },
    #[error("a user-agent string is required for network access")]
    MissingUserAgent,
    #[error("`{0}` is not a Wikipedia site code")]
    BadWiki(String),
    #[error("cache i/o on {path}: {source}")]
    Cache {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Error)]
pub enum CelebrityError {
    #[error("regression needs at least two wikis, found {found}")]
    TooFewWikis { found: usize },
    #[error("regression needs both female and non-female observations")]
    SingleGender,
    #[error(transparent)]
    Stats(#[from] StatsError),
}
