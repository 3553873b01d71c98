//! Superdirective beamforming for coupled antenna arrays.
//!
//! Element patterns or port parameters go in; maximum-directivity and
//! sensitivity-constrained excitations come out, together with Monte Carlo
//! tolerance analysis of excitation errors.

pub mod beamforming;
pub mod cli;
pub mod coupling;
pub mod error;
pub mod json;
pub mod linalg;
pub mod patterns;
pub mod robust;
pub mod sensitivity;

pub use error::{Error, Result};
