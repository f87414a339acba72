//! Piecewise D-finite signals: moments of `D f` for a known operator
//! `D = sum_j p_j(x) d^j/dx^j`, jump recovery, and full reconstruction of
//! piecewise-constant signals.
//!
//! `f` is extended by zero outside its support, so boundary discontinuities
//! are ordinary jumps and integration by parts leaves no boundary terms:
//!
//! `m_k(D f) = sum_j sum_i a_{i,j} (-1)^j (k+i)(k+i-1)...(k+i-j+1) m_{k+i-j}(f)`.
//!
//! `D f` is then a combination of `delta^(i)(x - xi_j)`; its moments form a
//! confluent Prony system whose amplitudes are reported exactly as that
//! system defines them. Since `int x^k delta^(i)(x - xi) dx` carries a factor
//! `(-1)^i`, the amplitude of the `i`-th falling-factorial column is
//! `(-1)^i` times the coefficient of `delta^(i)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PronyError, Result};
use crate::polyalg::falling_factorial;
use crate::prony::{
    solve_confluent_prony_with, solve_prony_1d_with, ConfluentPronySolution, MomentSequence,
    PronyOptions,
};

/// `D = sum_{j=0}^{order} (sum_i coefficients[j][i] x^i) d^j/dx^j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferentialOperator {
    coefficients: Vec<Vec<f64>>,
}

impl DifferentialOperator {
    pub fn new(coefficients: Vec<Vec<f64>>) -> Result<Self> {
        match coefficients.last() {
            None => Err(PronyError::InvalidInput("operator has no terms".into())),
            Some(top) if top.iter().all(|&a| a == 0.0) => Err(PronyError::InvalidInput(
                "highest-order coefficient of the operator vanishes".into(),
            )),
            Some(_) => Ok(DifferentialOperator { coefficients }),
        }
    }

    pub fn identity() -> Self {
        DifferentialOperator {
            coefficients: vec![vec![1.0]],
        }
    }

    /// `d^order / dx^order`.
    pub fn derivative(order: usize) -> Self {
        let mut coefficients = vec![vec![]; order + 1];
        coefficients[order] = vec![1.0];
        DifferentialOperator { coefficients }
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coefficients
    }

    /// Number of moments of `f` needed for `count` moments of `D f`.
    pub fn moments_needed(&self, count: usize) -> usize {
        let mut needed = 0;
        for (j, poly) in self.coefficients.iter().enumerate() {
            for (i, &a) in poly.iter().enumerate() {
                if a == 0.0 || count == 0 {
                    continue;
                }
                // Largest k with a nonzero falling factorial is count - 1.
                let top = count - 1 + i;
                if top >= j {
                    needed = needed.max(top - j + 1);
                }
            }
        }
        needed
    }
}

/// The first `count` moments of `D f` from the moments of `f`.
pub fn operator_moment_transform(
    op: &DifferentialOperator,
    m: &MomentSequence,
    count: usize,
) -> Result<MomentSequence> {
    let needed = op.moments_needed(count);
    if m.len() < needed {
        return Err(PronyError::InsufficientMoments {
            needed,
            available: m.len(),
        });
    }
    let v = m.values();
    let out = (0..count)
        .map(|k| {
            let mut s = Complex64::new(0.0, 0.0);
            for (j, poly) in op.coefficients.iter().enumerate() {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                for (i, &a) in poly.iter().enumerate() {
                    let ff = falling_factorial(k + i, j);
                    if a == 0.0 || ff == 0.0 {
                        continue;
                    }
                    s += v[k + i - j] * (a * sign * ff);
                }
            }
            s
        })
        .collect();
    MomentSequence::new(out)
}

/// Generic multiplicity pattern: every jump carries `order` delta terms.
pub fn default_multiplicities(op: &DifferentialOperator, jumps: usize) -> Vec<usize> {
    vec![op.order().max(1); jumps]
}

pub fn recover_jumps_given_operator(
    op: &DifferentialOperator,
    m: &MomentSequence,
    multiplicities: &[usize],
) -> Result<ConfluentPronySolution> {
    recover_jumps_given_operator_with(op, m, multiplicities, &PronyOptions::default())
}

/// Transforms the moments with `op` and solves the confluent system with the
/// given pattern; nodes are the discontinuity locations.
pub fn recover_jumps_given_operator_with(
    op: &DifferentialOperator,
    m: &MomentSequence,
    multiplicities: &[usize],
    opts: &PronyOptions,
) -> Result<ConfluentPronySolution> {
    let total: usize = multiplicities.iter().sum();
    let transformed = operator_moment_transform(op, m, 2 * total)?;
    solve_confluent_prony_with(&transformed, multiplicities, opts)
}

/// Zero-extended piecewise-constant signal described by its jumps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstantSignal {
    jumps: Vec<f64>,
    magnitudes: Vec<f64>,
    /// `values[i]` holds on `(jumps[i], jumps[i+1])`.
    values: Vec<f64>,
}

impl PiecewiseConstantSignal {
    /// Signal equal to `values[i]` on `[breakpoints[i], breakpoints[i+1])`
    /// and zero outside `[breakpoints[0], breakpoints[last]]`.
    pub fn from_pieces(breakpoints: &[f64], values: &[f64]) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 || values.is_empty() {
            return Err(PronyError::InvalidInput(
                "need one more breakpoint than values".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(PronyError::InvalidInput(
                "breakpoints must increase strictly".into(),
            ));
        }
        let mut jumps = Vec::new();
        let mut magnitudes = Vec::new();
        let mut prev = 0.0;
        for (i, &b) in breakpoints.iter().enumerate() {
            let next = values.get(i).copied().unwrap_or(0.0);
            if next != prev {
                jumps.push(b);
                magnitudes.push(next - prev);
            }
            prev = next;
        }
        Self::from_jumps(jumps, magnitudes)
    }

    /// Builds the signal by cumulative summation of the jump magnitudes.
    pub fn from_jumps(jumps: Vec<f64>, magnitudes: Vec<f64>) -> Result<Self> {
        if jumps.len() != magnitudes.len() {
            return Err(PronyError::InvalidInput("one magnitude per jump".into()));
        }
        if jumps.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(PronyError::InvalidInput(
                "jump points must increase strictly".into(),
            ));
        }
        let values = magnitudes
            .iter()
            .scan(0.0, |acc, &a| {
                *acc += a;
                Some(*acc)
            })
            .take(jumps.len().saturating_sub(1))
            .collect();
        Ok(PiecewiseConstantSignal {
            jumps,
            magnitudes,
            values,
        })
    }

    pub fn empty() -> Self {
        PiecewiseConstantSignal {
            jumps: vec![],
            magnitudes: vec![],
            values: vec![],
        }
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        Some((*self.jumps.first()?, *self.jumps.last()?))
    }

    pub fn jump_sum(&self) -> f64 {
        self.magnitudes.iter().sum()
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.jumps.iter().rposition(|&j| j <= x) {
            Some(i) if i < self.values.len() => self.values[i],
            _ => 0.0,
        }
    }

    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .zip(self.jumps.windows(2))
            .map(|(v, w)| v * (w[1] - w[0]))
            .sum()
    }

    /// Closed-form moments `int x^k f(x) dx`.
    pub fn moments(&self, count: usize) -> MomentSequence {
        let m: Vec<f64> = (0..count)
            .map(|k| {
                let p = k as i32 + 1;
                self.values
                    .iter()
                    .zip(self.jumps.windows(2))
                    .map(|(v, w)| v * (w[1].powi(p) - w[0].powi(p)) / p as f64)
                    .sum()
            })
            .collect();
        MomentSequence::from_real(&m).expect("finite moments")
    }

    /// `(int (f - g)^2)^(1/2)` over the union of both supports.
    pub fn l2_distance(&self, other: &PiecewiseConstantSignal) -> f64 {
        let mut pts: Vec<f64> = self.jumps.iter().chain(&other.jumps).copied().collect();
        pts.sort_by(f64::total_cmp);
        pts.windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let d = self.eval(mid) - other.eval(mid);
                d * d * (w[1] - w[0])
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_distance(&PiecewiseConstantSignal::empty())
    }
}

/// Reconstruction with its consistency diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PwcReconstruction {
    pub signal: PiecewiseConstantSignal,
    /// `sum_j a_j`; zero for an exact fit.
    pub jump_sum_residual: f64,
    /// `int f - m_0`.
    pub integral_residual: f64,
    /// `m_k(reconstruction) - m_k` over the supplied moments.
    pub moment_residuals: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PwcOptions {
    pub prony: PronyOptions,
    /// `InconsistentJumps` when `|sum a_j| > jump_sum_tolerance * max |a_j|`.
    pub jump_sum_tolerance: f64,
}

impl Default for PwcOptions {
    fn default() -> Self {
        PwcOptions {
            prony: PronyOptions::default(),
            jump_sum_tolerance: 0.1,
        }
    }
}

pub fn reconstruct_piecewise_constant(
    m: &MomentSequence,
    jump_count: usize,
) -> Result<PwcReconstruction> {
    reconstruct_piecewise_constant_with(m, jump_count, &PwcOptions::default())
}

/// Jumps from the classical Prony system on the moments of `f'`; piece
/// values by cumulative summation from zero.
pub fn reconstruct_piecewise_constant_with(
    m: &MomentSequence,
    jump_count: usize,
    opts: &PwcOptions,
) -> Result<PwcReconstruction> {
    if jump_count == 0 {
        return Ok(PwcReconstruction {
            signal: PiecewiseConstantSignal::empty(),
            jump_sum_residual: 0.0,
            integral_residual: -m.values()[0].re,
            moment_residuals: m.values().iter().map(|z| -z.re).collect(),
        });
    }
    let needed = 2 * jump_count + 1;
    if m.len() < needed {
        return Err(PronyError::InsufficientMoments {
            needed,
            available: m.len(),
        });
    }
    if !m.is_real() {
        return Err(PronyError::InvalidInput(
            "piecewise-constant moments must be real".into(),
        ));
    }
    let transformed =
        operator_moment_transform(&DifferentialOperator::derivative(1), m, 2 * jump_count)?;
    let sol = solve_prony_1d_with(&transformed, jump_count, &opts.prony)?;
    if sol.nodes().iter().any(|z| z.im != 0.0) {
        return Err(PronyError::InvalidInput(
            "recovered complex jump locations".into(),
        ));
    }
    let jumps: Vec<f64> = sol.nodes().iter().map(|z| z.re).collect();
    let magnitudes: Vec<f64> = sol.amplitudes().iter().map(|a| a.re).collect();
    let jump_sum: f64 = magnitudes.iter().sum();
    let largest = magnitudes.iter().map(|a| a.abs()).fold(0.0, f64::max);
    let tolerance = opts.jump_sum_tolerance * largest;
    if jump_sum.abs() > tolerance {
        return Err(PronyError::InconsistentJumps {
            sum: jump_sum,
            tolerance,
        });
    }
    let signal = PiecewiseConstantSignal::from_jumps(jumps, magnitudes)?;
    let fitted = signal.moments(m.len());
    Ok(PwcReconstruction {
        jump_sum_residual: jump_sum,
        integral_residual: signal.integral() - m.values()[0].re,
        moment_residuals: fitted
            .values()
            .iter()
            .zip(m.values())
            .map(|(a, b)| a.re - b.re)
            .collect(),
        signal,
    })
}
