//! Article-search API adapters, a response cache, and JSON Lines corpus files.

pub mod adapter;
pub mod cache;
pub mod jsonl;
pub mod transport;

use newsframe_core::corpus::CorpusError;

pub use adapter::{parse_article, AdapterName, ArticleField, QueryField, SourceAdapter};
pub use cache::{fetch_topic, FetchJob, FetchOutcome, FetchStats};
pub use jsonl::{load_corpus, read_corpus, save_corpus, write_corpus};
pub use transport::{HttpResponse, RateLimiter, Transport, UreqTransport};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum IngestError {
    #[error("missing API key: set {0}")]
    MissingKey(&'static str),
    #[error("API rejected the credentials ({0})")]
    Auth(String),
    #[error("rate limited by the API{}", retry_after.map(|s| format!("; retry after {s}s")).unwrap_or_default())]
    RateLimited { retry_after: Option<u64> },
    #[error("network error: {0}")]
    Network(String),
    #[error("record is missing required field {0}")]
    MissingField(&'static str),
    #[error("unparseable date {0:?}")]
    BadDate(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("malformed response: {0}")]
    Json(String),
    #[error("invalid fetch job: {0}")]
    InvalidJob(String),
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

impl From<std::io::Error> for IngestError {
    fn from(e: std::io::Error) -> Self {
        IngestError::Io(e.to_string())
    }
}
