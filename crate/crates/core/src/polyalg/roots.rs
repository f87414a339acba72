//! Simultaneous polynomial root finding.
//!
//! Roots are found with the Aberth–Ehrlich iteration started from a
//! perturbed ring around the root centroid. Each approximation is frozen once
//! its backward error `|p(z)| / sum |c_i| |z|^i` reaches roundoff level, which
//! lets multiple roots (where the iteration converges only linearly) settle
//! without burning the iteration budget.
//!
//! Multiple roots come back from the iteration as tight clusters of simple
//! approximations. [`find_roots`] merges clusters closer than the configured
//! relative tolerance and polishes each cluster centroid with Newton steps on
//! the derivative of order `m - 1`, for which the multiple root is simple.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::polynomial::Polynomial;
use crate::error::{PronyError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootOptions {
    pub max_iterations: usize,
    /// Backward-error tolerance accepted at the end of the budget.
    pub tolerance: f64,
    /// Relative distance under which approximations are merged into one
    /// multiple root.
    pub cluster_tolerance: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            max_iterations: 500,
            tolerance: 1e-12,
            cluster_tolerance: 1e-6,
        }
    }
}

/// Roots of a polynomial, listed with multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    /// Largest backward error `|p(r)| / sum |c_i||r|^i` over the roots.
    pub residual: f64,
    pub iterations: usize,
}

impl RootSet {
    /// Distinct roots with their multiplicities.
    pub fn multiplicities(&self) -> Vec<(Complex64, usize)> {
        let mut out: Vec<(Complex64, usize)> = Vec::new();
        for &r in &self.roots {
            match out.iter_mut().find(|(z, _)| *z == r) {
                Some((_, m)) => *m += 1,
                None => out.push((r, 1)),
            }
        }
        out
    }
}

pub fn find_roots(p: &Polynomial) -> Result<RootSet> {
    find_roots_with(p, &RootOptions::default())
}

pub fn find_roots_with(p: &Polynomial, opts: &RootOptions) -> Result<RootSet> {
    let (raw, iterations) = aberth(p, opts)?;
    let clusters = cluster_by_tolerance(&raw, opts.cluster_tolerance);
    let mut roots = Vec::with_capacity(raw.len());
    for members in &clusters {
        let pts: Vec<Complex64> = members.iter().map(|&i| raw[i]).collect();
        let z = refine_cluster(p, &pts);
        roots.extend(std::iter::repeat_n(z, members.len()));
    }
    sort_canonical(&mut roots);
    let residual = roots
        .iter()
        .map(|&z| backward_error(p, z))
        .fold(0.0, f64::max);
    Ok(RootSet {
        roots,
        residual,
        iterations,
    })
}

pub fn backward_error(p: &Polynomial, z: Complex64) -> f64 {
    let scale = p.abs_eval(z);
    if scale == 0.0 {
        0.0
    } else {
        p.eval(z).norm() / scale
    }
}

/// Raw Aberth–Ehrlich iteration. Returns the approximations (one per root,
/// unmerged) and the iteration count.
pub fn aberth(p: &Polynomial, opts: &RootOptions) -> Result<(Vec<Complex64>, usize)> {
    let n = p.degree();
    if n == 0 || p.is_zero() {
        return Err(PronyError::InvalidInput(
            "root finding needs degree >= 1".into(),
        ));
    }
    if p.coeffs()
        .iter()
        .any(|c| !c.re.is_finite() || !c.im.is_finite())
    {
        return Err(PronyError::InvalidInput(
            "non-finite polynomial coefficient".into(),
        ));
    }

    // Exact zero roots are split off so the iteration never sees them.
    let zeros = p.coeffs().iter().take_while(|&&c| c == ZERO).count();
    let deflated = Polynomial::new(p.coeffs()[zeros..].to_vec());
    let mut roots = vec![ZERO; zeros];
    if deflated.degree() == 0 {
        return Ok((roots, 0));
    }
    if deflated.degree() == 1 {
        let c = deflated.coeffs();
        roots.push(-c[0] / c[1]);
        return Ok((roots, 0));
    }

    let m = deflated.degree();
    let dp = deflated.derivative();
    let mut z = initial_ring(&deflated);
    let mut frozen = vec![false; m];
    let stop = 4.0 * m as f64 * f64::EPSILON;
    let mut iterations = 0;

    while iterations < opts.max_iterations && frozen.iter().any(|f| !f) {
        iterations += 1;
        for i in 0..m {
            if frozen[i] {
                continue;
            }
            let zi = z[i];
            let pv = deflated.eval(zi);
            let scale = deflated.abs_eval(zi);
            if pv.norm() <= stop * scale {
                frozen[i] = true;
                continue;
            }
            let w = pv / dp.eval(zi);
            let s: Complex64 = (0..m).filter(|&j| j != i).map(|j| 1.0 / (zi - z[j])).sum();
            let denom = Complex64::new(1.0, 0.0) - w * s;
            let step = if denom.norm() == 0.0 || !denom.re.is_finite() {
                w
            } else {
                w / denom
            };
            if !step.re.is_finite() || !step.im.is_finite() {
                return Err(PronyError::NoConvergence {
                    iterations,
                    residual: f64::INFINITY,
                });
            }
            z[i] = zi - step;
            if step.norm() <= f64::EPSILON * z[i].norm() {
                frozen[i] = true;
            }
        }
    }

    let residual = z
        .iter()
        .map(|&r| backward_error(&deflated, r))
        .fold(0.0, f64::max);
    if residual > opts.tolerance {
        return Err(PronyError::NoConvergence {
            iterations,
            residual,
        });
    }
    roots.extend(z);
    Ok((roots, iterations))
}

fn initial_ring(p: &Polynomial) -> Vec<Complex64> {
    let n = p.degree();
    let c = p.coeffs();
    let center = -c[n - 1] / (c[n] * n as f64);
    // Geometric mean distance of the roots from the centroid.
    let shifted = p.eval(center).norm() / c[n].norm();
    let mut radius = shifted.powf(1.0 / n as f64);
    if !radius.is_finite() || radius <= f64::EPSILON * (1.0 + center.norm()) {
        radius = 1.0 + center.norm();
    }
    // Fixed irregular angular offsets keep the start symmetric-free while
    // staying reproducible.
    (0..n)
        .map(|k| {
            let jitter = 0.25 + 0.5 * ((k as f64 * 0.618_033_988_749_895).fract());
            let theta = TAU * (k as f64 + jitter) / n as f64 + 0.4;
            center + Complex64::from_polar(radius, theta)
        })
        .collect()
}

/// Single-linkage grouping of points closer than `tol * max(1, |z|)`.
pub fn cluster_by_tolerance(points: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut label: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            let scale = 1f64.max(points[i].norm()).max(points[j].norm());
            if (points[i] - points[j]).norm() <= tol * scale {
                let (a, b) = (label[i], label[j]);
                if a != b {
                    for l in label.iter_mut() {
                        if *l == b {
                            *l = a;
                        }
                    }
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, &l) in label.iter().enumerate() {
        match groups.iter_mut().find(|(k, _)| *k == l) {
            Some((_, g)) => g.push(i),
            None => groups.push((l, vec![i])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

/// Agglomerative single-linkage grouping into exactly `k` clusters.
pub fn cluster_into(points: &[Complex64], k: usize) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = (0..points.len()).map(|i| vec![i]).collect();
    while clusters.len() > k.max(1) {
        let mut best = (0, 1, f64::INFINITY);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let d = clusters[a]
                    .iter()
                    .flat_map(|&i| clusters[b].iter().map(move |&j| (i, j)))
                    .map(|(i, j)| (points[i] - points[j]).norm())
                    .fold(f64::INFINITY, f64::min);
                if d < best.2 {
                    best = (a, b, d);
                }
            }
        }
        let merged = clusters.remove(best.1);
        clusters[best.0].extend(merged);
    }
    clusters
}

/// Polishes a cluster of approximations to a root of multiplicity
/// `pts.len()`: Newton on `p^(m-1)` from the centroid, accepted only while it
/// decreases the residual.
pub fn refine_cluster(p: &Polynomial, pts: &[Complex64]) -> Complex64 {
    let m = pts.len();
    let centroid = pts.iter().sum::<Complex64>() / m as f64;
    let q = p.nth_derivative(m - 1);
    if q.degree() == 0 {
        return centroid;
    }
    let mut z = centroid;
    let mut best = q.eval(z).norm();
    for _ in 0..20 {
        if best == 0.0 {
            break;
        }
        let (v, dv) = q.eval_with_derivative(z);
        if dv.norm() == 0.0 {
            break;
        }
        let next = z - v / dv;
        let r = q.eval(next).norm();
        if !(r < best) {
            break;
        }
        let moved = (next - z).norm();
        z = next;
        best = r;
        if moved <= f64::EPSILON * z.norm().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    z
}

/// Canonical order: real part, then imaginary part.
pub fn canonical_cmp(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

pub fn sort_canonical(v: &mut [Complex64]) {
    v.sort_by(canonical_cmp);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn quadratic_roots() {
        let rs = find_roots(&Polynomial::from_real(&[-1.0, 0.0, 1.0])).unwrap();
        assert_eq!(rs.roots.len(), 2);
        assert!((rs.roots[0] - c(-1.0)).norm() < 1e-14);
        assert!((rs.roots[1] - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn linear_root() {
        let rs = find_roots(&Polynomial::from_real(&[1.0, -0.5])).unwrap();
        assert_eq!(rs.roots, vec![c(2.0)]);
    }

    #[test]
    fn double_root_is_merged_and_polished() {
        // (1 - 2z)^2 (1 - 4z) = 1 - 8z + 20z^2 - 16z^3
        let p = Polynomial::from_real(&[1.0, -8.0, 20.0, -16.0]);
        let rs = find_roots(&p).unwrap();
        assert_eq!(rs.multiplicities().len(), 2);
        let sorted = &rs.roots;
        assert!((sorted[0] - c(0.25)).norm() < 1e-8);
        assert!((sorted[1] - c(0.5)).norm() < 1e-8);
        assert_eq!(sorted[1], sorted[2]);
        assert!(rs.residual <= 1e-12);
    }

    #[test]
    fn exact_zero_roots_are_deflated() {
        let p = Polynomial::from_real(&[0.0, 0.0, -0.5, 1.0]);
        let rs = find_roots(&p).unwrap();
        assert_eq!(rs.roots, vec![c(0.0), c(0.0), c(0.5)]);
    }

    #[test]
    fn complex_roots_of_real_polynomial() {
        let rs = find_roots(&Polynomial::from_real(&[1.0, 0.0, 1.0])).unwrap();
        assert!((rs.roots[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((rs.roots[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn constant_polynomial_rejected() {
        assert!(matches!(
            find_roots(&Polynomial::from_real(&[3.0])),
            Err(PronyError::InvalidInput(_))
        ));
    }

    #[test]
    fn iteration_budget_is_enforced() {
        let p = Polynomial::from_roots(&[c(0.1), c(0.2), c(0.3), c(-0.4), c(0.9)]);
        let opts = RootOptions {
            max_iterations: 1,
            ..Default::default()
        };
        assert!(matches!(
            find_roots_with(&p, &opts),
            Err(PronyError::NoConvergence { .. })
        ));
    }

    #[test]
    fn cluster_into_groups_nearest() {
        let pts = [c(0.0), c(1.0), c(1.0 + 1e-7), c(1.0 - 1e-7), c(0.0 + 1e-9)];
        let mut groups = cluster_into(&pts, 2);
        groups.iter_mut().for_each(|g| g.sort());
        groups.sort();
        assert_eq!(groups, vec![vec![0, 4], vec![1, 2, 3]]);
    }
}
