//! Approximative atomic systems for operators on finite-dimensional
//! l^p coordinate spaces.
//!
//! Spaces are `(R^d, l^p)` with `1 <= p <= inf`; operators are dense
//! matrices between them. Every verification returns a [`atomic::Certificate`]
//! carrying the residuals it was decided on.

pub mod atomic;
pub mod error;
pub mod float;
pub mod frames;
pub mod linalg;
pub mod par;
pub mod random;
pub mod seqspace;

pub use error::{Error, Result};
