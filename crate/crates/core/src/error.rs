use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("insufficient moments: at least {needed} required, got {got}")]
    InsufficientMoments { needed: usize, got: usize },

    #[error("law is not standardized: {0}")]
    NotStandardized(String),

    #[error("insufficient cumulant order: {needed} required, got {got}")]
    InsufficientOrder { needed: usize, got: usize },

    #[error("invalid Renyi index r = {0}")]
    InvalidIndex(f64),

    #[error("series constant term must be positive, got {0}")]
    NonPositiveConstant(f64),

    #[error("extremum not localized: {0}")]
    ExtremumNotLocalized(String),

    #[error("unsupported distribution: {0}")]
    Unsupported(String),

    #[error("invalid distribution parameters: {0}")]
    InvalidDistribution(String),

    #[error("invalid grid parameters: {0}")]
    InvalidGrid(String),

    #[error("grid under-resolved: mass defect {0:e}")]
    GridUnderResolved(f64),

    #[error("density unbounded or non-integrable characteristic power for n = {n} (n >= {n_min} required)")]
    BelowMinimumOrder { n: usize, n_min: usize },

    #[error("negative density {value:e} at x = {x} exceeds tolerance {tolerance:e}")]
    NegativeDensity { x: f64, value: f64, tolerance: f64 },

    #[error("non-positive integral {0}")]
    NonPositiveIntegral(f64),
}
