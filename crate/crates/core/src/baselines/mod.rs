//! Approximate estimators of the mixture weights, for comparison with the
//! exact engines: maximum likelihood by EM, the mean-field variational
//! Bayes iteration and an alternating Gibbs sampler.

mod digamma;
mod em;
mod gibbs;
mod vb;

pub use digamma::digamma;
pub use em::{em_max_likelihood, EMState};
pub use gibbs::{gibbs_sample, GibbsOptions, GibbsResult, GibbsState};
pub use vb::{variational_bayes, VBState};

use crate::error::{Error, Result};
use crate::model::{Model, ObservationSeq};
use crate::scalar::Scalar;

/// Stopping rule shared by the fixed-point iterations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterOptions {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for IterOptions {
    fn default() -> Self {
        IterOptions {
            max_iters: 100_000,
            tol: 1e-10,
        }
    }
}

// Every observed token must be explainable by some cause.
fn check_tokens<T: Scalar>(model: &Model<T>, obs: &ObservationSeq) -> Result<()> {
    model.require_statistical()?;
    for (i, &w) in obs.tokens().iter().enumerate() {
        if model.beta_row(w).iter().all(|&b| b == T::zero()) {
            return Err(Error::DegenerateEvidence(format!(
                "token {w} at position {i} has zero emission under every cause"
            )));
        }
    }
    Ok(())
}
