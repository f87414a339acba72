use num_complex::Complex64;

use super::matrix::DenseMatrix;
use crate::error::{PronyError, Result};

const NODE_TOLERANCE: f64 = 1e-8;

/// `k (k-1) ... (k-i+1)`; zero when `k < i`, one when `i = 0`.
pub fn falling_factorial(k: usize, i: usize) -> f64 {
    if k < i {
        return 0.0;
    }
    (0..i).map(|t| (k - t) as f64).product()
}

/// `x^e` by repeated multiplication, with `0^0 = 1`.
pub fn int_pow(x: Complex64, e: usize) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..e {
        acc *= x;
    }
    acc
}

fn check_distinct(nodes: &[Complex64]) -> Result<()> {
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let scale = 1f64.max(nodes[i].norm()).max(nodes[j].norm());
            if (nodes[i] - nodes[j]).norm() <= NODE_TOLERANCE * scale {
                return Err(PronyError::DuplicateNodes {
                    first: i,
                    second: j,
                });
            }
        }
    }
    Ok(())
}

/// Confluent Vandermonde matrix with `rows` rows.
///
/// Node `j` contributes `derivative_orders[j] + 1` columns: the value column
/// `x_j^k` followed by the derivative columns `d^i/dx^i x^k` at `x_j` for
/// `i = 1..=derivative_orders[j]`. With every order equal to one this is the
/// matrix in the factorisation of the Prony-map Jacobian.
pub fn confluent_vandermonde(
    nodes: &[Complex64],
    derivative_orders: &[usize],
    rows: usize,
) -> Result<DenseMatrix> {
    if nodes.len() != derivative_orders.len() {
        return Err(PronyError::InvalidInput(
            "one derivative order per node".into(),
        ));
    }
    check_distinct(nodes)?;
    let cols: usize = derivative_orders.iter().map(|l| l + 1).sum();
    let mut v = DenseMatrix::zeros(rows, cols);
    let mut c = 0;
    for (&x, &order) in nodes.iter().zip(derivative_orders) {
        for i in 0..=order {
            for k in i..rows {
                v[(k, c)] = int_pow(x, k - i) * falling_factorial(k, i);
            }
            c += 1;
        }
    }
    Ok(v)
}

/// `||M^-1||_inf`.
pub fn inf_norm_inverse(m: &DenseMatrix) -> Result<f64> {
    Ok(m.inverse()?.inf_norm())
}

/// A-priori bound on `||V^-1||_inf` for the confluent Vandermonde matrix
/// with one derivative column per node:
///
/// `max_i b_i prod_{j != i} ((1 + |x_j|) / |x_i - x_j|)^2`,
/// `b_i = max(1 + |x_i|, 1 + 2 (1 + |x_i|) sum_{j != i} 1 / |x_j - x_i|)`.
pub fn gautschi_bound(nodes: &[Complex64]) -> Result<f64> {
    if nodes.is_empty() {
        return Err(PronyError::InvalidInput(
            "at least one node required".into(),
        ));
    }
    check_distinct(nodes)?;
    let bound = (0..nodes.len())
        .map(|i| {
            let xi = nodes[i];
            let mut inv_gap_sum = 0.0;
            let mut product = 1.0;
            for (j, &xj) in nodes.iter().enumerate() {
                if j == i {
                    continue;
                }
                let gap = (xi - xj).norm();
                inv_gap_sum += 1.0 / gap;
                let f = (1.0 + xj.norm()) / gap;
                product *= f * f;
            }
            let b = (1.0 + xi.norm()).max(1.0 + 2.0 * (1.0 + xi.norm()) * inv_gap_sum);
            b * product
        })
        .fold(0.0, f64::max);
    Ok(bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn as_real(m: &DenseMatrix) -> Vec<Vec<f64>> {
        (0..m.rows())
            .map(|r| m.row(r).iter().map(|z| z.re).collect())
            .collect()
    }

    #[test]
    fn single_node_layouts() {
        let v0 = confluent_vandermonde(&[c(0.0)], &[1], 2).unwrap();
        assert_eq!(as_real(&v0), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let v1 = confluent_vandermonde(&[c(1.0)], &[1], 2).unwrap();
        assert_eq!(as_real(&v1), vec![vec![1.0, 0.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn two_node_layout_matches_pattern() {
        let v = confluent_vandermonde(&[c(0.0), c(0.5)], &[1, 1], 4).unwrap();
        // Entry-by-entry evaluation of (x^k, k x^(k-1)).
        let mut expected = vec![vec![0.0; 4]; 4];
        for (j, x) in [0.0f64, 0.5].into_iter().enumerate() {
            for (k, row) in expected.iter_mut().enumerate() {
                row[2 * j] = x.powi(k as i32);
                row[2 * j + 1] = if k == 0 {
                    0.0
                } else {
                    k as f64 * x.powi(k as i32 - 1)
                };
            }
        }
        assert_eq!(as_real(&v), expected);
    }

    #[test]
    fn higher_derivative_columns() {
        let v = confluent_vandermonde(&[c(0.5)], &[2], 3).unwrap();
        assert_eq!(
            as_real(&v),
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.5, 1.0, 0.0],
                vec![0.25, 1.0, 2.0]
            ]
        );
    }

    #[test]
    fn duplicate_nodes_rejected() {
        assert_eq!(
            confluent_vandermonde(&[c(0.1), c(0.1)], &[1, 1], 4),
            Err(PronyError::DuplicateNodes {
                first: 0,
                second: 1
            })
        );
        assert!(gautschi_bound(&[c(0.3), c(0.3 + 1e-12)]).is_err());
    }

    #[test]
    fn inverse_norms() {
        assert_eq!(inf_norm_inverse(&DenseMatrix::identity(3)).unwrap(), 1.0);
        let d = DenseMatrix::diagonal(&[c(2.0), c(4.0)]);
        assert_eq!(inf_norm_inverse(&d).unwrap(), 0.5);
        // Exact rational inverse of V(0, 0.5) has row sums (29, 9, 28, 6).
        let v = confluent_vandermonde(&[c(0.0), c(0.5)], &[1, 1], 4).unwrap();
        let n = inf_norm_inverse(&v).unwrap();
        assert!((n - 29.0).abs() < 1e-12);
        // ...and the 3x3 confluent matrix at 0.5 has inverse norm 3/2.
        let w = confluent_vandermonde(&[c(0.5)], &[2], 3).unwrap();
        assert!((inf_norm_inverse(&w).unwrap() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn gautschi_hand_values() {
        assert_eq!(gautschi_bound(&[c(0.0)]).unwrap(), 1.0);
        let b = gautschi_bound(&[c(0.0), c(0.5)]).unwrap();
        assert!((b - 45.0).abs() < 1e-12);
        assert!(b >= 29.0);
    }

    #[test]
    fn gautschi_diverges_as_nodes_merge() {
        let vals: Vec<f64> = [0.1, 0.01, 0.001]
            .iter()
            .map(|&g| gautschi_bound(&[c(0.2), c(0.2 + g)]).unwrap())
            .collect();
        assert!(vals[0] < vals[1] && vals[1] < vals[2]);
    }
}
