//! Renewal pinning models: exact homogeneous solutions, Monte Carlo quenched
//! free energies, replica-symmetric and interpolation bounds.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod bounds;
pub mod convolution;
pub mod disorder;
pub mod error;
pub mod homogeneous;
pub mod numeric;
pub mod quenched;
pub mod renewal;
pub mod replica;

pub use error::{PinError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
