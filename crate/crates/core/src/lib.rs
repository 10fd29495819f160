//! Risk assessment for cash-flow processes on finite filtered probability spaces.
//!
//! The library models a finite filtered probability space as an event tree
//! ([`filtration`]), decomposes measures on the optional σ-field into a
//! deflator/discount pair ([`decomposition`]), evaluates monetary convex risk
//! measures for processes both primally and through robust dual
//! representations ([`riskcore`]), and solves discrete path-dependent
//! (reflected) backward stochastic differential equations with full dual-gap
//! verification ([`bsde`]).
//!
//! Exact rational arithmetic is the default everywhere the identities are
//! algebraic; floating point is confined to the BSDE solvers and the
//! discounted control families built on top of them.
//!
//! ```
//! use procrisk::decomposition::{decompose_optional, OptionalMeasure};
//! use procrisk::filtration::{AdaptedProcess, FiltrationTree};
//! use procrisk::scalar::rat;
//!
//! // Deterministic measure climbing 1/4, 1/2, 1 over two steps.
//! let tree = FiltrationTree::deterministic(2, 1.0);
//! let a = OptionalMeasure::exact(
//!     &tree,
//!     AdaptedProcess::new(&tree, vec![rat(1, 4), rat(1, 2), rat(1, 1)]).unwrap(),
//! )
//! .unwrap();
//!
//! // The deflator stays at one, the discount is 1 - a, and the pair
//! // rebuilds the measure bit for bit.
//! let dec = decompose_optional(&tree, &a).unwrap();
//! assert_eq!(dec.discount.values(), &[rat(3, 4), rat(1, 2), rat(0, 1)]);
//! assert_eq!(dec.recompose(&tree).unwrap(), a);
//! ```

pub mod bsde;
pub mod decomposition;
pub mod error;
pub mod filtration;
pub mod riskcore;
pub mod sampling;
pub mod scalar;
pub mod suite;

pub use error::{Error, Result};
pub use scalar::Scalar;
