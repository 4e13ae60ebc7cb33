// negated float comparisons are used so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod extrapolation;
pub mod petviashvili;
pub mod spectral;

pub use error::{Error, Result};
