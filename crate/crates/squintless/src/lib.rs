//! Gridless 2D angle (DOA/DOD) estimation for multi-frequency array signals.
//!
//! The crate covers the full estimation chain for the noise-free multi-frequency
//! tensor model:
//!
//! * [`model`] — steering vectors, tensor synthesis and separation metrics;
//! * [`kernels`] — the squared-Fejér interpolation kernel family and its derivatives;
//! * [`certificate`] — dual-polynomial construction and the uniqueness condition checkers;
//! * [`solver`] — the semidefinite reformulation solved by ADMM;
//! * [`recovery`] — Toeplitz–Vandermonde decomposition, angle pairing and dual-peak
//!   localization;
//! * [`oracle`] — brute-force references (grid dual norm, duality gap, tiny-instance
//!   interior-point minimizer) used to validate the other modules.

pub mod certificate;
mod error;
pub mod kernels;
mod linalg;
pub mod model;
pub mod oracle;
pub mod recovery;
pub mod solver;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Complex dense matrix.
pub type CMat = nalgebra::DMatrix<C64>;

/// Complex dense vector.
pub type CVec = nalgebra::DVector<C64>;
