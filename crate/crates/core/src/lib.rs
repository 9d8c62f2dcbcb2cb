//! Discrete mother operators on flat grids and the evolutionary systems
//! descended from them.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod error;
pub mod evolve;
pub mod flatgrid;
pub mod linops;
pub mod matlaw;
pub mod subspaces;

pub use error::{OpError, Result};
