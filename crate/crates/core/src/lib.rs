//! Finite-dimensional double and triple operator integrals.
//!
//! Self-adjoint operators are dense Hermitian matrices, spectral measures are
//! their clustered eigenprojections, and symbols are bivariate trigonometric
//! polynomials on the torus. On top of that the crate provides:
//!
//! * functions of noncommuting pairs `f(A, B)` and double operator integrals,
//! * triple operator integrals for arbitrary kernels and for Haagerup-type
//!   representations, together with representation norms,
//! * executable Schatten-norm inequalities and the divided-difference
//!   perturbation identity for `f(A1, B1) - f(A2, B2)`,
//! * Lipschitz-ratio sweeps and a hill-climbing search for large ratios.

pub mod error;
pub mod matrix;
pub mod opint;
pub mod rng;
pub mod search;
pub mod symbol;
pub mod theorems;

mod pindex;

pub use error::{Error, Result};
pub use matrix::{GeneralOperator, HermitianOperator, SpectralDecomposition};
pub use num_complex::Complex64;
pub use pindex::SchattenIndex;
pub use symbol::{BesovProfile, TrigPoly2};

/// Width of the interval that all generated spectra are confined to: the open
/// interval `(-SPECTRAL_BOUND, SPECTRAL_BOUND)`.
pub const SPECTRAL_BOUND: f64 = std::f64::consts::PI - 0.1;
