pub mod correlations;
pub mod error;
pub mod experiment;
pub mod integrate;
pub mod linalg;
pub mod liouvillian;
pub mod meanfield;
pub mod network;
pub mod perturbation;
pub mod quadrature;
pub mod spin;
pub mod sweep;
pub mod sync;

pub use error::{Error, Result};
