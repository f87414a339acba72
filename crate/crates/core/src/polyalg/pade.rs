use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::DenseMatrix;
use super::polynomial::Polynomial;
use crate::error::{PronyError, Result};

/// Default relative pivot threshold for deciding the Hankel rank.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// `P/Q` with `deg P <= n - 1`, `deg Q <= n` and `Q(0) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PadeApproximant {
    pub numerator: Polynomial,
    pub denominator: Polynomial,
    /// Requested denominator degree.
    pub order: usize,
}

/// Padé approximant of type `[n-1 / n]` to `I(z) = sum m_k z^k`, matching
/// the first `2n` coefficients.
///
/// The denominator is the null vector of the `n x (n+1)` Hankel block
/// `sum_i m_{k-i} B_i = 0`, `k = n..2n-1`, computed by column-pivoted QR; the
/// numerator follows from the first `n` equations.
pub fn pade_from_moments(
    moments: &[Complex64],
    n: usize,
    rank_tol: f64,
) -> Result<PadeApproximant> {
    if n == 0 {
        return Err(PronyError::InvalidInput(
            "Padé order must be positive".into(),
        ));
    }
    if moments.len() < 2 * n {
        return Err(PronyError::InsufficientMoments {
            needed: 2 * n,
            available: moments.len(),
        });
    }
    let mut h = DenseMatrix::zeros(n, n + 1);
    for r in 0..n {
        for i in 0..=n {
            h[(r, i)] = moments[n + r - i];
        }
    }
    let qr = h.qr_pivoted();
    let rank = qr.rank(rank_tol);
    if rank < n {
        return Err(PronyError::SingularHankel {
            effective_rank: rank,
            requested: n,
        });
    }
    let b = qr.null_vector();
    let bmax = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if b[0].norm() <= rank_tol * bmax {
        return Err(PronyError::DegenerateDenominator { requested: n });
    }
    let b0 = b[0];
    let b: Vec<Complex64> = b.iter().map(|&z| z / b0).collect();
    let a: Vec<Complex64> = (0..n)
        .map(|k| (0..=k).map(|i| moments[k - i] * b[i]).sum())
        .collect();
    Ok(PadeApproximant {
        numerator: Polynomial::new(a),
        denominator: Polynomial::new(b),
        order: n,
    })
}
