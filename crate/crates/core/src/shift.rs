//! Signals `F(x) = sum_j a_j f(x - x_j)` built from shifts of a known kernel.
//!
//! Moment case: polynomials `psi_k(t) = sum_{l<=k} C_{k,l} t^l` with
//! `int f(t - x) psi_k(t) dt = x^k` turn the measured moments of `F` into
//! generalized moments `M_k = sum_l C_{k,l} m_l = sum_j a_j x_j^k`, a plain
//! Prony system. Expanding `(u + x)^l` gives the triangular system
//!
//! `sum_{l=q}^{k} C_{k,l} binom(l, q) mu_{l-q} = delta_{q,k}`, `q = 0..=k`,
//!
//! in the kernel moments `mu_p = int t^p f(t) dt`, solvable iff `mu_0 != 0`.
//!
//! Fourier case: `c_k(F) = int F(x) e^{ikx} dx = fhat(k) sum_j a_j e^{ikx_j}`,
//! so `c_k / fhat(k)` is a Prony system with nodes on the unit circle.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PronyError, Result};
use crate::polyalg::Polynomial;
use crate::prony::{solve_prony_1d_with, MomentSequence, PronyOptions, PronySolution};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Moments `mu_0..mu_K` of the base kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelMoments {
    values: Vec<Complex64>,
}

impl KernelMoments {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        match values.first() {
            None => Err(PronyError::InvalidInput("kernel moments are empty".into())),
            Some(mu0) if mu0.norm() == 0.0 => Err(PronyError::ZeroMeanKernel),
            Some(_) => Ok(KernelMoments { values }),
        }
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Moments of the indicator of `[0, width]`.
    pub fn box_kernel(width: f64, count: usize) -> Result<Self> {
        Self::from_real(
            &(0..count)
                .map(|p| width.powi(p as i32 + 1) / (p as f64 + 1.0))
                .collect::<Vec<_>>(),
        )
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Highest available moment order.
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }
}

/// Lower-triangular `C_{k,l}`, `0 <= l <= k <= K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualCoefficients {
    rows: Vec<Vec<Complex64>>,
}

impl DualCoefficients {
    pub fn order(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn get(&self, k: usize, l: usize) -> Option<Complex64> {
        self.rows.get(k).and_then(|r| r.get(l)).copied()
    }

    pub fn row(&self, k: usize) -> &[Complex64] {
        &self.rows[k]
    }

    /// The dual polynomial `psi_k`.
    pub fn psi(&self, k: usize) -> Polynomial {
        Polynomial::new(self.rows[k].clone())
    }
}

fn binomial_table(n: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![1.0]];
    for i in 1..=n {
        let prev = &t[i - 1];
        let mut row = vec![1.0; i + 1];
        for j in 1..i {
            row[j] = prev[j - 1] + prev[j];
        }
        t.push(row);
    }
    t
}

/// Solves the triangular coefficient-matching system for every `k <= order`.
pub fn dual_coefficients(km: &KernelMoments, order: usize) -> Result<DualCoefficients> {
    if km.values.len() <= order {
        return Err(PronyError::InsufficientMoments {
            needed: order + 1,
            available: km.values.len(),
        });
    }
    let mu = &km.values;
    if mu[0].norm() == 0.0 {
        return Err(PronyError::ZeroMeanKernel);
    }
    let binom = binomial_table(order);
    let rows = (0..=order)
        .map(|k| {
            let mut c = vec![ZERO; k + 1];
            c[k] = 1.0 / mu[0];
            for q in (0..k).rev() {
                let s: Complex64 = (q + 1..=k).map(|l| c[l] * binom[l][q] * mu[l - q]).sum();
                c[q] = -s / mu[0];
            }
            c
        })
        .collect();
    Ok(DualCoefficients { rows })
}

/// `M_k = sum_{l<=k} C_{k,l} m_l` for every `k` covered by both inputs.
pub fn generalized_moments(c: &DualCoefficients, m: &MomentSequence) -> Result<MomentSequence> {
    let count = (c.order() + 1).min(m.len());
    let v = m.values();
    MomentSequence::new(
        (0..count)
            .map(|k| c.row(k).iter().zip(v).map(|(&ckl, &ml)| ckl * ml).sum())
            .collect(),
    )
}

pub fn recover_shifts_from_moments(
    km: &KernelMoments,
    m: &MomentSequence,
    n: usize,
) -> Result<PronySolution> {
    recover_shifts_from_moments_with(km, m, n, &PronyOptions::default())
}

/// Dual coefficients, generalized moments, then a classical solve on `2n`
/// values.
pub fn recover_shifts_from_moments_with(
    km: &KernelMoments,
    m: &MomentSequence,
    n: usize,
    opts: &PronyOptions,
) -> Result<PronySolution> {
    let needed = 2 * n;
    if m.len() < needed {
        return Err(PronyError::InsufficientMoments {
            needed,
            available: m.len(),
        });
    }
    let c = dual_coefficients(km, needed - 1)?;
    let generalized = generalized_moments(&c, m)?;
    solve_prony_1d_with(&generalized, n, opts)
}

/// Fourier coefficients `c_k(F)` with the kernel transform `fhat(k)`,
/// `k = 0..K-1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierMeasurements {
    coefficients: Vec<Complex64>,
    kernel_transform: Vec<Complex64>,
}

impl FourierMeasurements {
    pub fn new(coefficients: Vec<Complex64>, kernel_transform: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != kernel_transform.len() || coefficients.is_empty() {
            return Err(PronyError::InvalidInput(
                "need one kernel transform value per coefficient".into(),
            ));
        }
        Ok(FourierMeasurements {
            coefficients,
            kernel_transform,
        })
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn kernel_transform(&self) -> &[Complex64] {
        &self.kernel_transform
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

/// Shift recovery from Fourier data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierShiftSolution {
    /// Nodes `e^{i x_j}` projected onto the unit circle.
    pub solution: PronySolution,
    /// `x_j = arg(rho_j)` in `(-pi, pi]`, aligned with `solution.nodes()`.
    pub shifts: Vec<f64>,
    /// Largest `| |rho_j| - 1 |` removed by the projection.
    pub modulus_correction: f64,
}

pub fn recover_shifts_from_fourier(
    fm: &FourierMeasurements,
    n: usize,
) -> Result<FourierShiftSolution> {
    recover_shifts_from_fourier_with(fm, n, &PronyOptions::default())
}

pub fn recover_shifts_from_fourier_with(
    fm: &FourierMeasurements,
    n: usize,
    opts: &PronyOptions,
) -> Result<FourierShiftSolution> {
    let needed = 2 * n;
    if fm.len() < needed {
        return Err(PronyError::InsufficientMoments {
            needed,
            available: fm.len(),
        });
    }
    let mut normalized = Vec::with_capacity(needed);
    for k in 0..needed {
        let f = fm.kernel_transform[k];
        if f.norm() == 0.0 {
            return Err(PronyError::ZeroFourierCoefficient { frequency: k });
        }
        normalized.push(fm.coefficients[k] / f);
    }
    let raw = solve_prony_1d_with(&MomentSequence::new(normalized)?, n, opts)?;

    let modulus_correction = raw
        .nodes()
        .iter()
        .map(|z| (z.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    let projected: Vec<Complex64> = raw
        .nodes()
        .iter()
        .map(|z| Complex64::from_polar(1.0, z.arg()))
        .collect();
    let solution = PronySolution::new_with(projected, raw.amplitudes().to_vec(), opts)?;
    let shifts = solution
        .nodes()
        .iter()
        .map(|z| {
            let t = z.arg();
            if t <= -PI {
                t + 2.0 * PI
            } else {
                t
            }
        })
        .collect();
    Ok(FourierShiftSolution {
        solution,
        shifts,
        modulus_correction,
    })
}
