// `!(x > 0.0)` deliberately rejects NaN; long literals are reference values
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod asymptotics;
pub mod coeffs;
pub mod error;
pub mod gibbs;
pub mod kernels;
pub mod specfun;
pub mod spectra;
pub mod sum;
pub mod verify;

pub use error::{Error, Result};
