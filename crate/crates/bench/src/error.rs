use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid workload: {0}")]
    InvalidWorkload(String),
    #[error("endpoint rejected credentials (HTTP {status})")]
    Auth { status: u16 },
    #[error("no successful requests at concurrency {concurrency}")]
    NoSuccessfulRequests { concurrency: u32 },
    #[error("http client: {0}")]
    Client(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Dataset(#[from] inferonomics_core::DatasetError),
}
