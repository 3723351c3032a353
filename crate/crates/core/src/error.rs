use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The lowest single-particle energy x_0 + delta is not positive.
    #[error("gap condition violated: lowest mode energy x_0 + delta = {energy:e} is not positive")]
    Gap { energy: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("chain is not mirror symmetric (max |phi_0^2 - phi_N^2| = {deviation:e})")]
    Symmetry { deviation: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity exceeded: {sites} sites requested, at most {max} supported")]
    Capacity { sites: usize, max: usize },

    #[error("sweep plan error: {0}")]
    Plan(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Numeric failures (gap, non-convergence, non-finite values) as opposed to
    /// input validation failures.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Gap { .. } | Error::Numeric(_) | Error::Domain(_))
    }
}
