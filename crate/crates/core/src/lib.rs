//! Simulation of the global maximum of the centered log-modulus of GUE
//! characteristic polynomials, and numerical evaluation of its conjectured
//! limiting law.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod charpoly;
pub mod ensemble;
pub mod error;
pub mod prediction;
pub mod sampler;
pub mod search;
pub mod selberg;
pub mod special;

pub use error::{Error, Result};
