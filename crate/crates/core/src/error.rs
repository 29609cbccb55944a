use thiserror::Error;

use crate::spectral::RecurrenceWitness;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The smallest singular value fell below the singularity threshold, so
    /// `0` is (numerically) in the spectrum.
    #[error("singular operator: smallest singular value {smallest:e}, largest {largest:e}")]
    SingularOperator { smallest: f64, largest: f64 },

    #[error("recurrence budget of {budget} exhausted; best defect {:e} at n = {}", best.best_defect(), best.best_index().unwrap_or(0))]
    BudgetExceeded { budget: u64, best: Box<RecurrenceWitness> },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
