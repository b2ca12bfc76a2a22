//! Exact marginal inference for Dirichlet-prior mixture models.
//!
//! Given prior weights `alpha(z)` over causes and known emission
//! probabilities `beta(w|z)`, the crate computes the exact probability of a
//! short observation sequence and the exact posterior mean of the mixture
//! weights. Two exact engines are provided:
//!
//! * [`dense`]: generating-function product over all `2^n` subsets of the
//!   observations, `O(3^n + m 2^n)`.
//! * [`sparse`]: the same product split along a tree decomposition of the
//!   interaction graph, exponential only in its width.
//!
//! [`oracles`] holds independent brute-force references and [`baselines`]
//! the approximate methods (EM, variational Bayes, Gibbs sampling).
//!
//! All numeric code is generic over [`Scalar`] (`f32` / `f64`); the `*F64`
//! and `*F32` aliases below fix the precision.

pub mod algebra;
pub mod baselines;
pub mod cli;
pub mod dense;
pub mod error;
pub mod model;
pub mod oracles;
pub mod scalar;
pub mod sparse;

pub use algebra::{DenseCap, SubsetMask, TruncatedPoly, DEFAULT_CAP, HARD_CAP, MAX_POSITIONS};
pub use dense::{pochhammer, posterior_mean, probability, ptilde_all, InferenceResult};
pub use error::{Error, Result};
pub use model::{cause_subset_products, moments, support, Mode, Model, MomentTable, ObservationSeq};
pub use scalar::Scalar;
pub use sparse::{
    interaction_graph, sparse_coefficient, sparse_posterior_mean, tree_decompose,
    validate_decomposition, InteractionGraph, TreeDecomposition,
};

pub type TruncatedPolyF64 = TruncatedPoly<f64>;
pub type TruncatedPolyF32 = TruncatedPoly<f32>;
pub type ModelF64 = Model<f64>;
pub type ModelF32 = Model<f32>;
pub type MomentTableF64 = MomentTable<f64>;
pub type MomentTableF32 = MomentTable<f32>;
pub type InferenceResultF64 = InferenceResult<f64>;
pub type InferenceResultF32 = InferenceResult<f32>;
