use thiserror::Error;

/// Errors raised anywhere in the bound pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no intersection: g({lo}) = {g_lo} and g({hi}) = {g_hi} have the same sign")]
    NoIntersection { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },
    #[error("function is not monotone on [{lo}, {hi}]")]
    NotMonotone { lo: f64, hi: f64 },
    #[error("certificate degraded: restoration inflated the objective by {inflation:e}")]
    CertificateDegraded { inflation: f64 },
    #[error("certificate rejected: {0}")]
    CertificateInvalid(String),
    #[error("instance too large for exact enumeration: n = {n} > {max}")]
    TooLarge { n: usize, max: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
