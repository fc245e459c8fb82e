//! Minus partial order on positive semidefinite matrices, the concentric
//! conic geometry behind its automorphisms, and congruence recovery for
//! order-preserving maps.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conic;
pub mod error;
pub mod linalg;
pub mod order;
pub mod random;
pub mod reconstruction;
pub mod report;

#[cfg(test)]
mod test_support;

pub use error::{Error, Result};
