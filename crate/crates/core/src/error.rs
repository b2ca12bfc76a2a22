use thiserror::Error;

/// Errors raised by the inference routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A dense `2^n` table was requested above the configured cap.
    #[error("{n} observation positions exceed the dense table cap of {cap}")]
    Capacity { n: usize, cap: usize },

    /// Bad argument for an otherwise well-formed call.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent or out-of-range problem instance.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// The observations have probability zero under the model.
    #[error("degenerate evidence: {0}")]
    DegenerateEvidence(String),

    /// A contributing subset does not fit in any bag of the decomposition.
    #[error("decomposition mismatch: subset {subset:#x} is not contained in any bag")]
    DecompositionMismatch { subset: u64 },

    /// An enumeration oracle would exceed its work budget.
    #[error("enumeration of {needed} terms exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;
