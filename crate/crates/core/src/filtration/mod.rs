//! Finite filtered probability space: event tree, adapted processes,
//! projections, stopping times, and norms.

mod process;
mod stopping;
mod tree;

pub use process::{
    closing_martingale, conditional_expectation, predictable_projection, sup_norm,
    AdaptedProcess, LevelSlice, RandomVariable,
};
pub use stopping::{count_stopping_times, enumerate_stopping_times, StoppingTime};
pub use tree::{FiltrationTree, NodeId, TreeBuilder};
