//! Reconstruction of structured signals from finitely many moments or
//! Fourier coefficients.
//!
//! The crate is organised bottom-up:
//!
//! * [`polyalg`]: complex polynomials, simultaneous root finding, Padé
//!   denominators from Hankel systems, confluent Vandermonde matrices.
//! * [`prony`]: forward and inverse maps for the classical and confluent
//!   one-dimensional Prony systems.
//! * [`md`]: multi-dimensional Prony systems by separation of variables.
//! * [`shift`]: linear combinations of shifts of a known kernel, measured by
//!   polynomial moments or Fourier coefficients.
//! * [`pwc`]: moments of `D f` for a known differential operator `D`, jump
//!   recovery and full piecewise-constant reconstruction.
//! * [`stability`]: Jacobian of the Prony map, first-order error bounds and
//!   seeded noise experiments.

pub mod error;
pub mod md;
pub mod polyalg;
pub mod prony;
pub mod pwc;
pub mod shift;
pub mod stability;

pub use error::{PronyError, Result};
pub use num_complex::Complex64;
pub use prony::{
    confluent_moments, prony_moments, solve_confluent_prony, solve_confluent_prony_with,
    solve_prony_1d, solve_prony_1d_with, ConfluentPronySolution, MomentSequence, PronyOptions,
    PronySolution,
};
