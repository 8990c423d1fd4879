#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod config;
pub mod error;
pub mod linear_spectrum;
pub mod ls_solver;
pub mod oracle;
pub mod potential;
pub mod quadrature;
pub mod report;
pub mod spectral_field;
pub mod specfun;

pub use error::{Error, Result};
