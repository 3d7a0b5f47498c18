//! Exact rational scalars, vectors, and dense matrices.
//!
//! Every weight, length, budget, and LP quantity in this crate is a [`Rat`].
//! Values are immutable after construction and always kept in lowest terms
//! with a positive denominator, so equality and ordering are exact.

mod linalg;
mod rat;
mod vec;

pub use linalg::{rank, solve_square};
pub use rat::Rat;
pub use vec::{RatMatrix, RatVec};
