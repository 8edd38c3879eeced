// negated float comparisons are used to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cutoffs;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod models;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
