use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not symmetric within relative tolerance {tol:e} (max deviation {max_dev:e})")]
    NotSymmetric { tol: f64, max_dev: f64 },

    #[error("eigensolver failed to converge within {0} sweeps")]
    EighNoConvergence(usize),

    #[error("SVR solver exceeded {0} pair updates without reaching the KKT tolerance")]
    SvrNoConvergence(u64),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Convergence failures are reported separately from input errors by the CLI.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            Error::EighNoConvergence(_) | Error::SvrNoConvergence(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
