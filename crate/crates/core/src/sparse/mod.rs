//! Exact inference for sparse emission tables.
//!
//! Two positions interact when some cause can emit both. With a tree
//! decomposition of that interaction graph the generating-function product
//! splits into per-bag factors over at most `width + 1` variables, and the
//! coefficient of interest is extracted by eliminating bags leaf-first.
//! Cost grows with `3^width` instead of `3^n`.

mod decomposition;
mod elimination;
mod graph;

pub use decomposition::{tree_decompose, validate_decomposition, TreeDecomposition, ValidationReport, Violation};
pub use elimination::{sparse_coefficient, sparse_posterior_mean, BagAssignment, SparsePlan};
pub use graph::{interaction_graph, InteractionGraph};
