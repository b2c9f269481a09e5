//! Finite-dimensional toolkit for commutative semispectral measures.
//!
//! The crate reconstructs a sharp generator and a Markov kernel from any
//! commuting POVM, smears PVMs back into POVMs, evaluates convolution kernels
//! in closed form, and checks continuity properties (Feller, strong Feller,
//! uniform continuity, norm-1, absolute continuity) on concrete instances.

// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod io;
pub mod kernels;
pub mod operators;
pub mod povm;
pub mod reconstruction;
pub mod sampling;
pub mod suite;

pub use error::{Error, Result};
