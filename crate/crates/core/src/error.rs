use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A floating-point result overflowed the exponent range.
    #[error("range error: {0}")]
    Range(String),
    #[error("{a} has no inverse modulo {m}")]
    NoInverse { a: i64, m: u64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("resource bound exceeded: {0}")]
    Resource(String),
    #[error("malformed checkpoint line {line}: {text}")]
    Checkpoint { line: usize, text: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
