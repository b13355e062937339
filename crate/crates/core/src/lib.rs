//! Exact norms on Banach halos, their modules and short isometry groups.
//!
//! Norm values are exact rational powers or certified rational intervals
//! ([`scalar::PowerValue`]); every infimum-defined norm is computed by a
//! bounded search that returns matching lower and upper bounds when it can
//! certify them ([`lattice::BoundsCertificate`]).

pub mod error;
pub mod halo;
pub mod isometry;
pub mod lattice;
pub mod linalg;
pub mod norms;
pub mod poly;
pub mod scalar;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::{PowerValue, Rational};
