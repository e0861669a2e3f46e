//! Complex linear algebra used by the frequency-domain estimators.

mod fourier;
mod hermitian;

pub use fourier::{inverse_fourier_coeffs, FrequencyGrid};
pub use hermitian::{hermitian_eig, EigenDecomposition, HermitianMatrix};

pub use num_complex::Complex64;
