//! Dense complex linear algebra used throughout the crate.

pub mod eig;
pub mod matrix;
pub mod ops;
pub mod svd;
pub mod tolerances;

pub use eig::{hermitian_eig, Eigen};
pub use matrix::{c, r, ComplexMatrix, C64, I, ONE, ZERO};
pub use ops::{
    kernel, matrix_sqrt_psd, max_eigenvalue, min_eigenvalue, numerical_rank, partial_trace, polar_unitary,
    support_projector, Subsystem,
};
pub use svd::{svd, Svd};
pub use tolerances::Tolerances;
