use thiserror::Error;

/// Error taxonomy shared by the whole workspace.
///
/// `Domain` covers invalid parameters (lengths below 3, probabilities
/// outside [0, 1], malformed input files). `Overflow` is raised whenever an
/// exact integer computation would leave 128-bit range instead of silently
/// wrapping. `Resource` marks computations that were refused because they
/// would exceed a configured budget; the message names a cheaper route when
/// one exists.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain: {0}")]
    Domain(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("resource: {0}")]
    Resource(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI's JSON error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Overflow(_) => "overflow",
            Error::Resource(_) => "resource",
            Error::Io(_) => "io",
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Domain(format!("csv: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
