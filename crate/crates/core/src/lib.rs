//! Weighted Hankel transforms, Bessel heat semigroups and Laplace-transform-
//! type spectral multipliers on the half-space (0,∞)^n, together with a
//! verification harness for the associated kernel identities and comparison
//! operators.
//!
//! The library evaluates the multiplier operator along two independent paths
//! — a spectral path through the Hankel transform and a principal-value
//! singular-integral path through the heat-kernel time derivative — and
//! cross-validates them.

pub mod analysis;
pub mod dd;
pub mod expr;
pub mod grid;
pub mod hankel;
pub mod inputs;
pub mod error;
pub mod multiplier;
pub mod par;
pub mod quad;
pub mod report;
pub mod semigroup;
pub mod specfun;

pub use error::{Error, Result};
