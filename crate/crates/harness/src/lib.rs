//! Experiments that compare entropy expansions with entropies measured on
//! Fourier-inverted densities of normalized sums.

pub mod commands;
pub mod config;

pub use commands::{
    run_coeffs, run_locallimit, run_monotonicity, run_verify, richardson_summary, CoeffRow, ConvergenceRow,
    LocalLimitRow, MonotonicityRow, RichardsonLine,
};
pub use config::{Experiment, ExperimentConfig, CONFIG_HELP};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io(_) => 2,
            HarnessError::Numerical(_) => 3,
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}
