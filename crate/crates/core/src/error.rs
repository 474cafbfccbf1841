use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Hamiltonian: {0}")]
    InvalidSpec(String),

    #[error("site {site} is out of range for a chain of {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error(
        "exact diagonalization is capped at L = {cap} sites (requested L = {sites}); \
         use the MPS engine for larger chains"
    )]
    Capacity { sites: usize, cap: usize },

    #[error("numerical validity check failed: {0}")]
    Numerical(String),

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("insufficient data: need at least {needed} usable points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("malformed input file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
