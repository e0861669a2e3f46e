//! Dynamic functional principal component analysis for periodically
//! correlated functional time series.
//!
//! The pipeline is: expand curves in a Fourier basis ([`basis`]), estimate the
//! phase-block spectral density matrix with a lag-window estimator
//! ([`spectral`]), eigendecompose it on a frequency grid ([`numerics`]),
//! turn eigenvectors into real periodic filters, then compute scores and
//! reconstructions ([`model`]). [`simbench`] reproduces the two synthetic
//! benchmark scenarios.

pub mod basis;
pub mod error;
pub mod io;
pub mod model;
pub mod numerics;
pub mod simbench;
pub mod spectral;

pub use error::{Error, Result};
