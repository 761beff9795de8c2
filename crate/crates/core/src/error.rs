use std::fmt;

/// Errors raised by the library and mapped onto CLI exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter outside its documented range.
    InvalidParameter(String),
    /// Function evaluated outside its domain (poles, negative arguments).
    Domain(String),
    /// An index outside the table or schedule.
    Index(String),
    /// Grid size incompatible with the requested dyadic level.
    Resolution(String),
    /// Work would exceed a configured memory cap.
    ResourceExhausted(String),
    /// An iterative method failed to converge within its cap.
    NonConvergence(String),
    /// Characteristic function still too large at the end of the inversion grid.
    TailNotDecayed { rho_max: f64, tail: f64 },
    /// Requested moment beyond the moment barrier.
    MomentBarrier(String),
    /// Dense covariance factorization clipped too much negative mass.
    Factorization(String),
    /// A block was used before being coupled.
    MissingCoupling(usize),
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::Domain(_) | Error::Index(_) | Error::Resolution(_) => 2,
            Error::ResourceExhausted(_)
            | Error::NonConvergence(_)
            | Error::TailNotDecayed { .. }
            | Error::MomentBarrier(_)
            | Error::Factorization(_)
            | Error::MissingCoupling(_) => 3,
            Error::Io(_) => 4,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(m) => write!(f, "invalid parameter: {m}"),
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Index(m) => write!(f, "index error: {m}"),
            Error::Resolution(m) => write!(f, "resolution error: {m}"),
            Error::ResourceExhausted(m) => write!(f, "resource exhausted: {m}"),
            Error::NonConvergence(m) => write!(f, "no convergence: {m}"),
            Error::TailNotDecayed { rho_max, tail } => {
                write!(f, "characteristic function not decayed: |phi| = {tail:.3e} at rho = {rho_max}")
            }
            Error::MomentBarrier(m) => write!(f, "moment barrier: {m}"),
            Error::Factorization(m) => write!(f, "factorization failed: {m}"),
            Error::MissingCoupling(m) => write!(f, "block {m} has no coupling"),
            Error::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
