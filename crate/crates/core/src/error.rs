use alloc::string::String;

/// Errors raised by the analysis core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{what} out of range: {value}")]
    Range { what: &'static str, value: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("registration error: {0}")]
    Registration(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("clustering error: {0}")]
    Clustering(String),
    #[error("anchoring error: {0}")]
    Anchoring(String),
    #[error("verification refused: {0}")]
    Refused(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
