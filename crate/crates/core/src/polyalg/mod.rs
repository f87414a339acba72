//! Numeric kernel: polynomials, root finding, Padé denominators from Hankel
//! systems, confluent Vandermonde matrices and their inverse norms.

mod matrix;
mod pade;
mod polynomial;
mod roots;
mod vandermonde;

pub use matrix::{DenseMatrix, PivotedQr};
pub use pade::{pade_from_moments, PadeApproximant, RANK_TOLERANCE};
pub use polynomial::Polynomial;
pub use roots::{
    aberth, backward_error, canonical_cmp, cluster_by_tolerance, cluster_into, find_roots,
    find_roots_with, refine_cluster, sort_canonical, RootOptions, RootSet,
};
pub use vandermonde::{
    confluent_vandermonde, falling_factorial, gautschi_bound, inf_norm_inverse, int_pow,
};
