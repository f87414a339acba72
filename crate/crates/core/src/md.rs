//! Multi-dimensional Prony systems `sum_j a_j prod_l (x^j_l)^{k_l} = m_k`
//! solved by separation of variables.
//!
//! Restricted to the `m`-th coordinate axis (`k = r e_m`) the generating
//! function collapses to `sum_j a_j / (1 - x^j_m t)`, a one-dimensional Prony
//! problem for the pairs `(a_j, x^j_m)`. Solving each axis independently and
//! matching pairs by amplitude reassembles the points, which is unique
//! exactly when the amplitudes are pairwise distinct.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PronyError, Result};
use crate::polyalg::{canonical_cmp, int_pow};
use crate::prony::{solve_prony_1d_with, MomentSequence, PronyOptions};

/// Moments along the coordinate axes, `axes[m][r] = m_{r e_m}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisMoments {
    axes: Vec<Vec<Complex64>>,
}

impl AxisMoments {
    /// All axes must have the same length `K >= 2` and share `m_{(0,..,0)}`.
    pub fn new(axes: Vec<Vec<Complex64>>) -> Result<Self> {
        let Some(first) = axes.first() else {
            return Err(PronyError::InvalidInput(
                "dimension must be at least 1".into(),
            ));
        };
        let k = first.len();
        if k < 2 {
            return Err(PronyError::InvalidInput(
                "each axis needs at least 2 moments".into(),
            ));
        }
        if axes.iter().any(|a| a.len() != k) {
            return Err(PronyError::InvalidInput(
                "axes have different lengths".into(),
            ));
        }
        let m0 = first[0];
        for (axis, a) in axes.iter().enumerate().skip(1) {
            let d = (a[0] - m0).norm();
            if d > 1e-12 * m0.norm().max(1.0) {
                return Err(PronyError::InconsistentAxes {
                    axis,
                    discrepancy: d,
                });
            }
        }
        Ok(AxisMoments { axes })
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn axis(&self, m: usize) -> &[Complex64] {
        &self.axes[m]
    }

    pub fn axes(&self) -> &[Vec<Complex64>] {
        &self.axes
    }
}

/// Points with pairwise-distinct amplitudes, ordered by amplitude.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MDPronySolution {
    points: Vec<Vec<Complex64>>,
    amplitudes: Vec<Complex64>,
}

impl MDPronySolution {
    /// Builds a solution without the distinctness checks, so that
    /// configurations the solver cannot separate can still be evaluated.
    pub fn new(points: Vec<Vec<Complex64>>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if points.len() != amplitudes.len() || points.is_empty() {
            return Err(PronyError::InvalidInput("one amplitude per point".into()));
        }
        let d = points[0].len();
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(PronyError::InvalidInput(
                "points must share a positive dimension".into(),
            ));
        }
        Ok(MDPronySolution { points, amplitudes })
    }

    pub fn from_real(points: &[Vec<f64>], amplitudes: &[f64]) -> Result<Self> {
        Self::new(
            points
                .iter()
                .map(|p| p.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
            amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
        )
    }

    pub fn points(&self) -> &[Vec<Complex64>] {
        &self.points
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dimension(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn canonicalize(&mut self) {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| canonical_cmp(&self.amplitudes[a], &self.amplitudes[b]));
        self.points = idx.iter().map(|&i| self.points[i].clone()).collect();
        self.amplitudes = idx.iter().map(|&i| self.amplitudes[i]).collect();
    }
}

/// `m_k = sum_j a_j prod_l (x^j_l)^{k_l}`.
pub fn md_moments(sol: &MDPronySolution, k: &[usize]) -> Result<Complex64> {
    if k.len() != sol.dimension() {
        return Err(PronyError::InvalidInput(
            "multi-index dimension mismatch".into(),
        ));
    }
    Ok(sol
        .points
        .iter()
        .zip(&sol.amplitudes)
        .map(|(p, &a)| p.iter().zip(k).fold(a, |acc, (&x, &e)| acc * int_pow(x, e)))
        .sum())
}

/// The moments `m_{r e_m}` for `r = 0..count-1` on every axis.
pub fn axis_moments(sol: &MDPronySolution, count: usize) -> Result<AxisMoments> {
    let d = sol.dimension();
    let mut axes = Vec::with_capacity(d);
    for m in 0..d {
        let mut k = vec![0; d];
        let axis = (0..count)
            .map(|r| {
                k[m] = r;
                md_moments(sol, &k)
            })
            .collect::<Result<Vec<_>>>()?;
        axes.push(axis);
    }
    AxisMoments::new(axes)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdOptions {
    pub prony: PronyOptions,
    /// Relative amplitude gap under which matching is declared ambiguous.
    pub amplitude_separation: f64,
    /// Relative tolerance for agreement of amplitudes across axes.
    pub axis_agreement: f64,
}

impl Default for MdOptions {
    fn default() -> Self {
        MdOptions {
            prony: PronyOptions::default(),
            amplitude_separation: 1e-6,
            axis_agreement: 1e-6,
        }
    }
}

pub fn solve_prony_md(am: &AxisMoments, n: usize) -> Result<MDPronySolution> {
    solve_prony_md_with(am, n, &MdOptions::default())
}

/// Solves each axis as a one-dimensional problem with `2n` moments and
/// pairs coordinates across axes by sorted amplitude.
pub fn solve_prony_md_with(
    am: &AxisMoments,
    n: usize,
    opts: &MdOptions,
) -> Result<MDPronySolution> {
    let d = am.dimension();
    let mut per_axis: Vec<Vec<(Complex64, Complex64)>> = Vec::with_capacity(d);
    for axis in 0..d {
        let m = MomentSequence::new(am.axis(axis).to_vec())?;
        let sol = solve_prony_1d_with(&m, n, &opts.prony)?;
        let mut pairs: Vec<(Complex64, Complex64)> = sol
            .amplitudes()
            .iter()
            .copied()
            .zip(sol.nodes().iter().copied())
            .collect();
        pairs.sort_by(|a, b| canonical_cmp(&a.0, &b.0));
        for w in 0..pairs.len().saturating_sub(1) {
            let (a, b) = (pairs[w].0, pairs[w + 1].0);
            let scale = a.norm().max(b.norm());
            if (a - b).norm() < opts.amplitude_separation * scale {
                return Err(PronyError::AmbiguousAmplitudes {
                    axis,
                    first: w,
                    second: w + 1,
                });
            }
        }
        per_axis.push(pairs);
    }

    let reference = &per_axis[0];
    for (axis, pairs) in per_axis.iter().enumerate().skip(1) {
        let discrepancy = pairs
            .iter()
            .zip(reference)
            .map(|(p, q)| (p.0 - q.0).norm() / q.0.norm().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        if discrepancy > opts.axis_agreement {
            return Err(PronyError::InconsistentAxes { axis, discrepancy });
        }
    }

    let points = (0..n)
        .map(|j| per_axis.iter().map(|pairs| pairs[j].1).collect())
        .collect();
    let amplitudes = (0..n)
        .map(|j| per_axis.iter().map(|pairs| pairs[j].0).sum::<Complex64>() / d as f64)
        .collect();
    let mut sol = MDPronySolution { points, amplitudes };
    sol.canonicalize();
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn forward_examples() {
        let s = MDPronySolution::from_real(&[vec![0.0, 0.0]], &[1.0]).unwrap();
        assert_eq!(md_moments(&s, &[0, 0]).unwrap(), c(1.0));
        assert_eq!(md_moments(&s, &[1, 0]).unwrap(), c(0.0));
        assert_eq!(md_moments(&s, &[2, 3]).unwrap(), c(0.0));

        let s = MDPronySolution::from_real(&[vec![0.5, 0.25]], &[2.0]).unwrap();
        assert_eq!(md_moments(&s, &[1, 1]).unwrap(), c(0.25));

        let s = MDPronySolution::from_real(&[vec![0.3, 0.8], vec![0.7, 0.2]], &[1.0, 2.0]).unwrap();
        let v = md_moments(&s, &[2, 1]).unwrap();
        assert!((v.re - 0.268).abs() < 1e-15);
    }

    #[test]
    fn axis_moment_layout() {
        let s = MDPronySolution::from_real(&[vec![0.5, 0.25]], &[1.0]).unwrap();
        let am = axis_moments(&s, 3).unwrap();
        assert_eq!(am.axis(0), &[c(1.0), c(0.5), c(0.25)]);
        assert_eq!(am.axis(1), &[c(1.0), c(0.25), c(0.0625)]);
    }

    #[test]
    fn single_point_recovery() {
        let am = AxisMoments::new(vec![
            vec![c(1.0), c(0.5), c(0.25)],
            vec![c(1.0), c(0.25), c(0.0625)],
        ])
        .unwrap();
        let s = solve_prony_md(&am, 1).unwrap();
        assert!((s.points()[0][0] - c(0.5)).norm() < 1e-14);
        assert!((s.points()[0][1] - c(0.25)).norm() < 1e-14);
        assert!((s.amplitudes()[0] - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn two_point_recovery() {
        let truth =
            MDPronySolution::from_real(&[vec![0.3, 0.8], vec![0.7, 0.2]], &[1.0, 2.0]).unwrap();
        let am = axis_moments(&truth, 4).unwrap();
        let s = solve_prony_md(&am, 2).unwrap();
        for (p, q) in s.points().iter().zip(truth.points()) {
            for (a, b) in p.iter().zip(q) {
                assert!((a - b).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn equal_amplitudes_are_ambiguous() {
        let (x1, x2) = (0.3, 0.7);
        let swapped =
            MDPronySolution::from_real(&[vec![x1, x2], vec![x2, x1]], &[1.0, 1.0]).unwrap();
        let diagonal =
            MDPronySolution::from_real(&[vec![x1, x1], vec![x2, x2]], &[1.0, 1.0]).unwrap();
        let a = axis_moments(&swapped, 4).unwrap();
        let b = axis_moments(&diagonal, 4).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            solve_prony_md(&a, 2),
            Err(PronyError::AmbiguousAmplitudes { .. })
        ));
    }

    #[test]
    fn mismatched_axes_rejected() {
        assert!(matches!(
            AxisMoments::new(vec![vec![c(1.0), c(0.5)], vec![c(2.0), c(0.5)]]),
            Err(PronyError::InconsistentAxes { axis: 1, .. })
        ));
        // Amplitude multisets that disagree across axes.
        let am = AxisMoments::new(vec![
            vec![c(3.0), c(1.0), c(0.7), c(0.55)],
            vec![c(3.0), c(0.2), c(1.0), c(0.3)],
        ])
        .unwrap();
        assert!(solve_prony_md(&am, 2).is_err());
    }
}
