#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod cli;
pub mod error;
pub mod graph;
pub mod kernel;
pub mod quadrature;
pub mod schrodinger;
pub mod spectral;

pub use error::{Error, Result};
