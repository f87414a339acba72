//! Local sensitivity of Prony inversion.
//!
//! The Prony map sends `(a_1, x_1, ..., a_n, x_n)` to the first `P = 2n`
//! moments. Its Jacobian factors as `V * diag(D_1, ..., D_n)` where `V` is
//! the confluent Vandermonde matrix with one derivative column per node and
//! `D_j = [[1, 0], [0, a_j]]`. Inverting the first-order expansion gives
//! `|dx_j| <= C1 eps / |a_j|` and `|da_j| <= C1 eps` with `C1 = ||V^-1||_inf`
//! whenever `max_k |dm_k| < eps`.
//!
//! For the confluent map the parameters of node `j` are
//! `(a_{0,j}, ..., a_{l_j-1,j}, x_j)`, `V` carries derivative columns up to
//! order `l_j`, and `D_j` is the identity on the amplitudes with the `x_j`
//! column `(0, a_{0,j}, ..., a_{l_j-1,j})`.
//!
//! Noise experiments draw perturbations from a ChaCha stream keyed by
//! `(seed, trial)` and consumed in moment order, so every trial is
//! reproducible on its own and the same draws are reused across noise
//! levels. Errors are measured against the reconstruction from the
//! unperturbed moments, which isolates the effect of the noise from the
//! solver's own rounding.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PronyError, Result};
use crate::polyalg::{confluent_vandermonde, gautschi_bound, DenseMatrix};
use crate::prony::{
    confluent_moments, prony_moments, solve_confluent_prony_with, solve_prony_1d_with,
    ConfluentPronySolution, MomentSequence, PronyOptions, PronySolution,
};

/// `V`, `diag(D_j)` and their product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobianFactors {
    pub vandermonde: DenseMatrix,
    pub blocks: DenseMatrix,
    pub product: DenseMatrix,
}

/// Jacobian of the classical Prony map at `sol`, parameters ordered
/// `(a_1, x_1, a_2, x_2, ...)`, rows `m_0 .. m_{2n-1}`.
pub fn prony_jacobian(sol: &PronySolution) -> Result<JacobianFactors> {
    let n = sol.len();
    let vandermonde = confluent_vandermonde(sol.nodes(), &vec![1; n], 2 * n)?;
    let mut blocks = DenseMatrix::zeros(2 * n, 2 * n);
    for (j, &a) in sol.amplitudes().iter().enumerate() {
        blocks[(2 * j, 2 * j)] = Complex64::new(1.0, 0.0);
        blocks[(2 * j + 1, 2 * j + 1)] = a;
    }
    let product = &vandermonde * &blocks;
    Ok(JacobianFactors {
        vandermonde,
        blocks,
        product,
    })
}

/// Jacobian of the confluent Prony map, parameters ordered
/// `(a_{0,1}, ..., a_{l_1-1,1}, x_1, a_{0,2}, ...)`, rows
/// `m_0 .. m_{L+n-1}`.
pub fn confluent_jacobian(sol: &ConfluentPronySolution) -> Result<JacobianFactors> {
    let orders = sol.multiplicities();
    let size: usize = orders.iter().map(|l| l + 1).sum();
    let vandermonde = confluent_vandermonde(sol.nodes(), &orders, size)?;
    let mut blocks = DenseMatrix::zeros(size, size);
    let mut offset = 0;
    for b in sol.amplitudes() {
        let l = b.len();
        for i in 0..l {
            blocks[(offset + i, offset + i)] = Complex64::new(1.0, 0.0);
            blocks[(offset + i + 1, offset + l)] = b[i];
        }
        offset += l + 1;
    }
    let product = &vandermonde * &blocks;
    Ok(JacobianFactors {
        vandermonde,
        blocks,
        product,
    })
}

/// Predicted first-order error bounds, optionally with experiment data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// `||V^-1||_inf` of the square (confluent) Vandermonde matrix.
    pub constant: f64,
    /// A-priori estimate of the constant; only defined when every
    /// multiplicity is one.
    pub gautschi_bound: Option<f64>,
    pub eps: f64,
    pub node_bounds: Vec<f64>,
    /// `amplitude_bounds[j][i]` bounds the error of `a_{i,j}`.
    pub amplitude_bounds: Vec<Vec<f64>>,
    pub experiment: Option<NoiseExperiment>,
}

impl StabilityReport {
    /// Bounds flattened in the order of [`parameter_names`].
    pub fn flat_bounds(&self) -> Vec<f64> {
        self.node_bounds
            .iter()
            .zip(&self.amplitude_bounds)
            .flat_map(|(&x, a)| std::iter::once(x).chain(a.iter().copied()))
            .collect()
    }

    fn scaled(&self, eps: f64) -> StabilityReport {
        let s = if self.eps == 0.0 { 0.0 } else { eps / self.eps };
        StabilityReport {
            constant: self.constant,
            gautschi_bound: self.gautschi_bound,
            eps,
            node_bounds: self.node_bounds.iter().map(|b| b * s).collect(),
            amplitude_bounds: self
                .amplitude_bounds
                .iter()
                .map(|v| v.iter().map(|b| b * s).collect())
                .collect(),
            experiment: None,
        }
    }
}

/// Parameter labels `x{j}` and `a{j}` (classical) or `a{i},{j}` (confluent),
/// per node, node first.
pub fn parameter_names(multiplicities: &[usize]) -> Vec<String> {
    let classical = multiplicities.iter().all(|&l| l == 1);
    let mut names = Vec::new();
    for (j, &l) in multiplicities.iter().enumerate() {
        names.push(format!("x{j}"));
        for i in 0..l {
            names.push(if classical {
                format!("a{j}")
            } else {
                format!("a{i},{j}")
            });
        }
    }
    names
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps >= 0.0 {
        Ok(())
    } else {
        Err(PronyError::InvalidInput(format!(
            "noise level must be nonnegative, got {eps}"
        )))
    }
}

pub fn local_error_bounds(sol: &PronySolution, eps: f64) -> Result<StabilityReport> {
    check_eps(eps)?;
    let n = sol.len();
    let v = confluent_vandermonde(sol.nodes(), &vec![1; n], 2 * n)?;
    let c1 = v.inverse()?.inf_norm();
    Ok(StabilityReport {
        constant: c1,
        gautschi_bound: Some(gautschi_bound(sol.nodes())?),
        eps,
        node_bounds: sol
            .amplitudes()
            .iter()
            .map(|a| c1 * eps / a.norm())
            .collect(),
        amplitude_bounds: vec![vec![c1 * eps]; n],
        experiment: None,
    })
}

pub fn confluent_error_bounds(sol: &ConfluentPronySolution, eps: f64) -> Result<StabilityReport> {
    check_eps(eps)?;
    let orders = sol.multiplicities();
    let size: usize = orders.iter().map(|l| l + 1).sum();
    let v = confluent_vandermonde(sol.nodes(), &orders, size)?;
    let c2 = v.inverse()?.inf_norm();
    let mut node_bounds = Vec::with_capacity(sol.len());
    let mut amplitude_bounds = Vec::with_capacity(sol.len());
    for b in sol.amplitudes() {
        let top = b[b.len() - 1].norm();
        node_bounds.push(c2 * eps / top);
        let mut ab = vec![c2 * eps];
        for i in 1..b.len() {
            ab.push(c2 * eps * (1.0 + b[i - 1].norm() / top));
        }
        amplitude_bounds.push(ab);
    }
    let gautschi = if orders.iter().all(|&l| l == 1) {
        Some(gautschi_bound(sol.nodes())?)
    } else {
        None
    };
    Ok(StabilityReport {
        constant: c2,
        gautschi_bound: gautschi,
        eps,
        node_bounds,
        amplitude_bounds,
        experiment: None,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseDistribution {
    /// Independent draws in `[-eps, eps]`.
    #[default]
    Uniform,
    /// Independent normal draws with standard deviation `eps`.
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSettings {
    pub eps_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub distribution: NoiseDistribution,
    /// A trial violates the bounds when some error exceeds `slack * bound`.
    pub slack: f64,
    pub parallel: bool,
    pub prony: PronyOptions,
}

impl NoiseSettings {
    pub fn new(eps_grid: Vec<f64>, trials: usize, seed: u64) -> Self {
        NoiseSettings {
            eps_grid,
            trials,
            seed,
            distribution: NoiseDistribution::Uniform,
            slack: 2.0,
            parallel: true,
            prony: PronyOptions::default(),
        }
    }
}

/// Problem whose stability is probed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NoiseTarget {
    Classical(PronySolution),
    Confluent(ConfluentPronySolution),
}

impl From<PronySolution> for NoiseTarget {
    fn from(s: PronySolution) -> Self {
        NoiseTarget::Classical(s)
    }
}

impl From<ConfluentPronySolution> for NoiseTarget {
    fn from(s: ConfluentPronySolution) -> Self {
        NoiseTarget::Confluent(s)
    }
}

impl NoiseTarget {
    fn multiplicities(&self) -> Vec<usize> {
        match self {
            NoiseTarget::Classical(s) => vec![1; s.len()],
            NoiseTarget::Confluent(s) => s.multiplicities(),
        }
    }

    fn moments(&self) -> MomentSequence {
        let count = 2 * self.multiplicities().iter().sum::<usize>();
        match self {
            NoiseTarget::Classical(s) => prony_moments(s, count),
            NoiseTarget::Confluent(s) => confluent_moments(s, count),
        }
    }

    /// Solves and flattens to `(x_j, a_{0,j}, ..)` per node.
    fn solve(
        &self,
        m: &MomentSequence,
        opts: &PronyOptions,
    ) -> Result<Vec<(Complex64, Vec<Complex64>)>> {
        match self {
            NoiseTarget::Classical(s) => {
                let r = solve_prony_1d_with(m, s.len(), opts)?;
                Ok(r.nodes()
                    .iter()
                    .zip(r.amplitudes())
                    .map(|(&x, &a)| (x, vec![a]))
                    .collect())
            }
            NoiseTarget::Confluent(s) => {
                let r = solve_confluent_prony_with(m, &s.multiplicities(), opts)?;
                Ok(r.nodes()
                    .iter()
                    .copied()
                    .zip(r.amplitudes().iter().cloned())
                    .collect())
            }
        }
    }

    fn bounds(&self, eps: f64) -> Result<StabilityReport> {
        match self {
            NoiseTarget::Classical(s) => local_error_bounds(s, eps),
            NoiseTarget::Confluent(s) => confluent_error_bounds(s, eps),
        }
    }
}

/// One perturbed solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub eps: f64,
    pub trial: usize,
    /// Absolute parameter errors in [`parameter_names`] order; empty when
    /// the solve failed.
    pub errors: Vec<f64>,
    pub failure: Option<String>,
    pub violates_bounds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseExperiment {
    pub seed: u64,
    pub distribution: NoiseDistribution,
    pub slack: f64,
    pub eps_grid: Vec<f64>,
    pub trials: usize,
    pub parameters: Vec<String>,
    /// Predicted bounds per noise level, flattened like `parameters`.
    pub bounds: Vec<Vec<f64>>,
    pub records: Vec<TrialRecord>,
    /// `max_errors[e][p]` over the successful trials at `eps_grid[e]`.
    pub max_errors: Vec<Vec<f64>>,
    /// Log-log slope of max error against `eps` per parameter.
    pub slopes: Vec<Option<f64>>,
    pub failures: usize,
    pub violations: usize,
}

impl NoiseExperiment {
    /// Fraction of successful trials with every error within
    /// `slack * bound`.
    pub fn contained_fraction(&self) -> f64 {
        let ok = self.records.iter().filter(|r| r.failure.is_none()).count();
        if ok == 0 {
            return 0.0;
        }
        (ok - self.violations) as f64 / ok as f64
    }
}

/// Least-squares slope of `log y` against `log x` over positive pairs.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Unit-scale noise for `len` moments, keyed by `(seed, trial)` and drawn
/// in moment order. Complex draws keep `|d| <= 1` for the uniform model.
pub fn keyed_noise(
    seed: u64,
    trial: usize,
    len: usize,
    distribution: NoiseDistribution,
    complex: bool,
) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let draw = |rng: &mut ChaCha8Rng| match distribution {
        NoiseDistribution::Uniform => rng.random_range(-1.0..=1.0),
        NoiseDistribution::Gaussian => normal.sample(rng),
    };
    (0..len)
        .map(|_| {
            if complex {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                Complex64::new(draw(&mut rng) * s, draw(&mut rng) * s)
            } else {
                Complex64::new(draw(&mut rng), 0.0)
            }
        })
        .collect()
}

/// Pairs every reference node with the nearest unused recovered node and
/// returns the flattened absolute errors.
fn parameter_errors(
    reference: &[(Complex64, Vec<Complex64>)],
    recovered: &[(Complex64, Vec<Complex64>)],
) -> Vec<f64> {
    let mut used = vec![false; recovered.len()];
    let mut errors = Vec::new();
    for (x, a) in reference {
        let best = (0..recovered.len())
            .filter(|&i| !used[i] && recovered[i].1.len() == a.len())
            .min_by(|&i, &j| {
                (recovered[i].0 - x)
                    .norm()
                    .total_cmp(&(recovered[j].0 - x).norm())
            });
        match best {
            Some(i) => {
                used[i] = true;
                errors.push((recovered[i].0 - x).norm());
                errors.extend(a.iter().zip(&recovered[i].1).map(|(p, q)| (p - q).norm()));
            }
            None => errors.extend(std::iter::repeat_n(f64::INFINITY, a.len() + 1)),
        }
    }
    errors
}

/// Perturbs the exact moments of `target` at every noise level, re-solves,
/// and compares errors with the first-order bounds.
///
/// Failed solves are recorded; the experiment aborts when more than half
/// of the trials at some noise level fail.
pub fn noise_experiment(
    target: impl Into<NoiseTarget>,
    settings: &NoiseSettings,
) -> Result<StabilityReport> {
    let target = target.into();
    for &eps in &settings.eps_grid {
        check_eps(eps)?;
    }
    if !(settings.slack >= 1.0) {
        return Err(PronyError::InvalidInput(
            "slack factor must be at least 1".into(),
        ));
    }
    let exact = target.moments();
    let complex = !exact.is_real();
    let reference = target.solve(&exact, &settings.prony)?;
    let parameters = parameter_names(&target.multiplicities());
    let reference_eps = settings.eps_grid.iter().copied().fold(0.0, f64::max);
    let base = target.bounds(reference_eps)?;
    let level_bounds: Vec<StabilityReport> =
        settings.eps_grid.iter().map(|&e| base.scaled(e)).collect();

    let run_trial = |trial: usize| -> Vec<TrialRecord> {
        let noise = keyed_noise(
            settings.seed,
            trial,
            exact.len(),
            settings.distribution,
            complex,
        );
        settings
            .eps_grid
            .iter()
            .zip(&level_bounds)
            .map(|(&eps, bounds)| {
                let values = exact
                    .values()
                    .iter()
                    .zip(&noise)
                    .map(|(m, d)| m + d * eps)
                    .collect();
                let solved =
                    MomentSequence::new(values).and_then(|m| target.solve(&m, &settings.prony));
                match solved {
                    Ok(rec) => {
                        let errors = parameter_errors(&reference, &rec);
                        let violates_bounds = errors
                            .iter()
                            .zip(bounds.flat_bounds())
                            .any(|(&e, b)| !(e <= settings.slack * b));
                        TrialRecord {
                            eps,
                            trial,
                            errors,
                            failure: None,
                            violates_bounds,
                        }
                    }
                    Err(e) => TrialRecord {
                        eps,
                        trial,
                        errors: vec![],
                        failure: Some(e.kind().to_string()),
                        violates_bounds: false,
                    },
                }
            })
            .collect()
    };
    let per_trial: Vec<Vec<TrialRecord>> = if settings.parallel {
        (0..settings.trials)
            .into_par_iter()
            .map(run_trial)
            .collect()
    } else {
        (0..settings.trials).map(run_trial).collect()
    };

    // Records ordered by noise level, then trial.
    let levels = settings.eps_grid.len();
    let mut records = Vec::with_capacity(levels * settings.trials);
    for e in 0..levels {
        records.extend(per_trial.iter().map(|t| t[e].clone()));
    }
    let mut max_errors = vec![vec![0.0; parameters.len()]; levels];
    let mut failures = 0;
    for (e, row) in max_errors.iter_mut().enumerate() {
        let level = &records[e * settings.trials..(e + 1) * settings.trials];
        let failed = level.iter().filter(|r| r.failure.is_some()).count();
        if 2 * failed > settings.trials {
            return Err(PronyError::ExperimentAborted {
                failed,
                trials: settings.trials,
            });
        }
        failures += failed;
        for r in level.iter().filter(|r| r.failure.is_none()) {
            for (m, &v) in row.iter_mut().zip(&r.errors) {
                *m = f64::max(*m, v);
            }
        }
    }
    let slopes = (0..parameters.len())
        .map(|p| {
            let y: Vec<f64> = max_errors.iter().map(|row| row[p]).collect();
            log_log_slope(&settings.eps_grid, &y)
        })
        .collect();
    let violations = records.iter().filter(|r| r.violates_bounds).count();

    let mut report = base;
    report.experiment = Some(NoiseExperiment {
        seed: settings.seed,
        distribution: settings.distribution,
        slack: settings.slack,
        eps_grid: settings.eps_grid.clone(),
        trials: settings.trials,
        parameters,
        bounds: level_bounds
            .iter()
            .map(StabilityReport::flat_bounds)
            .collect(),
        records,
        max_errors,
        slopes,
        failures,
        violations,
    });
    Ok(report)
}

/// Node errors as one amplitude is scaled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSweep {
    pub index: usize,
    pub eps: f64,
    pub scales: Vec<f64>,
    /// `|a_index|` at each sweep point.
    pub magnitudes: Vec<f64>,
    /// `node_errors[s][j]`: root-mean-square `|dx_j|` over the trials.
    pub node_errors: Vec<Vec<f64>>,
    /// Log-log slope of the swept node's error against its amplitude.
    pub slope: Option<f64>,
    /// Max over min of each other node's error across the sweep.
    pub other_node_variation: Vec<f64>,
}

/// Multiplies `a_index` by each entry of `scales` and runs a single-level
/// noise experiment at `eps`.
pub fn amplitude_sweep(
    sol: &PronySolution,
    index: usize,
    scales: &[f64],
    eps: f64,
    settings: &NoiseSettings,
) -> Result<AmplitudeSweep> {
    if index >= sol.len() {
        return Err(PronyError::InvalidInput(format!(
            "no amplitude with index {index}"
        )));
    }
    let mut magnitudes = Vec::with_capacity(scales.len());
    let mut node_errors = Vec::with_capacity(scales.len());
    for &s in scales {
        let mut amplitudes = sol.amplitudes().to_vec();
        amplitudes[index] *= s;
        magnitudes.push(amplitudes[index].norm());
        let scaled = PronySolution::new(sol.nodes().to_vec(), amplitudes)?;
        let mut level = settings.clone();
        level.eps_grid = vec![eps];
        let report = noise_experiment(scaled, &level)?;
        let exp = report.experiment.expect("experiment data");
        let ok: Vec<&TrialRecord> = exp.records.iter().filter(|r| r.failure.is_none()).collect();
        let rms: Vec<f64> = (0..sol.len())
            .map(|j| {
                let sum: f64 = ok.iter().map(|r| r.errors[2 * j].powi(2)).sum();
                (sum / ok.len() as f64).sqrt()
            })
            .collect();
        node_errors.push(rms);
    }
    let swept: Vec<f64> = node_errors.iter().map(|e| e[index]).collect();
    let slope = log_log_slope(&magnitudes, &swept);
    let other_node_variation = (0..sol.len())
        .filter(|&j| j != index)
        .map(|j| {
            let v: Vec<f64> = node_errors.iter().map(|e| e[j]).collect();
            let hi = v.iter().copied().fold(0.0, f64::max);
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            hi / lo
        })
        .collect();
    Ok(AmplitudeSweep {
        index,
        eps,
        scales: scales.to_vec(),
        magnitudes,
        node_errors,
        slope,
        other_node_variation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(m: &DenseMatrix) -> Vec<Vec<f64>> {
        (0..m.rows())
            .map(|r| m.row(r).iter().map(|z| z.re).collect())
            .collect()
    }

    #[test]
    fn single_node_jacobians() {
        let j = prony_jacobian(&PronySolution::from_real(&[0.0], &[1.0]).unwrap()).unwrap();
        assert_eq!(real(&j.product), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let j = prony_jacobian(&PronySolution::from_real(&[0.0], &[3.0]).unwrap()).unwrap();
        assert_eq!(real(&j.product), vec![vec![1.0, 0.0], vec![0.0, 3.0]]);
    }

    #[test]
    fn confluent_jacobian_layout() {
        // m_k = a0 x^k + a1 k x^(k-1) at x = 0.5, a = (1, 2).
        let s = ConfluentPronySolution::from_real(&[0.5], &[vec![1.0, 2.0]]).unwrap();
        let j = confluent_jacobian(&s).unwrap();
        let x: f64 = 0.5;
        for k in 0..3 {
            let kf = k as f64;
            let da0 = x.powi(k);
            let da1 = kf * x.powi(k - 1);
            let dx = kf * x.powi(k - 1) + 2.0 * kf * (kf - 1.0) * x.powi(k - 2);
            let row = j.product.row(k as usize);
            assert!((row[0].re - da0).abs() < 1e-15);
            assert!((row[1].re - da1).abs() < 1e-15);
            assert!((row[2].re - dx).abs() < 1e-15);
        }
    }

    #[test]
    fn bounds_examples() {
        let s = PronySolution::from_real(&[0.0], &[2.0]).unwrap();
        let r = local_error_bounds(&s, 1e-6).unwrap();
        assert_eq!(r.constant, 1.0);
        assert_eq!(r.node_bounds, vec![5e-7]);
        assert_eq!(r.amplitude_bounds, vec![vec![1e-6]]);

        let r = local_error_bounds(&s, 0.0).unwrap();
        assert_eq!(r.flat_bounds(), vec![0.0, 0.0]);

        let s = PronySolution::from_real(&[0.0, 0.5], &[1.0, 2.0]).unwrap();
        let r = local_error_bounds(&s, 1e-6).unwrap();
        assert!((r.constant - 29.0).abs() < 1e-12);
        assert!((r.gautschi_bound.unwrap() - 45.0).abs() < 1e-12);
        assert!((r.node_bounds[0] - 2.9e-5).abs() < 1e-17);
        assert!((r.node_bounds[1] - 1.45e-5).abs() < 1e-17);
        assert!(local_error_bounds(&s, -1.0).is_err());
    }

    #[test]
    fn confluent_bounds_examples() {
        let s = ConfluentPronySolution::from_real(&[0.5], &[vec![1.0, 2.0]]).unwrap();
        let r = confluent_error_bounds(&s, 1e-6).unwrap();
        assert!((r.constant - 1.5).abs() < 1e-14);
        assert!((r.amplitude_bounds[0][0] - 1.5e-6).abs() < 1e-18);
        assert!((r.amplitude_bounds[0][1] - 2.25e-6).abs() < 1e-18);
        assert!((r.node_bounds[0] - 7.5e-7).abs() < 1e-18);
        assert_eq!(r.gautschi_bound, None);

        let classical = PronySolution::from_real(&[0.0, 0.5], &[1.0, 2.0]).unwrap();
        let a = confluent_error_bounds(&classical.to_confluent(), 1e-6).unwrap();
        let b = local_error_bounds(&classical, 1e-6).unwrap();
        assert_eq!(a.flat_bounds(), b.flat_bounds());
    }

    #[test]
    fn names() {
        assert_eq!(parameter_names(&[1, 1]), vec!["x0", "a0", "x1", "a1"]);
        assert_eq!(parameter_names(&[2]), vec!["x0", "a0,0", "a1,0"]);
    }

    #[test]
    fn zero_noise_gives_zero_errors() {
        let s = PronySolution::from_real(&[0.3, 0.7], &[1.0, -1.0]).unwrap();
        let r = noise_experiment(s, &NoiseSettings::new(vec![0.0], 5, 1)).unwrap();
        let e = r.experiment.unwrap();
        assert_eq!(e.records.len(), 5);
        assert!(e.records.iter().all(|r| r.errors.iter().all(|&v| v == 0.0)));
        assert_eq!(e.violations, 0);
    }

    #[test]
    fn serial_and_parallel_agree() {
        let s = PronySolution::from_real(&[0.3, 0.7], &[1.0, -1.0]).unwrap();
        let mut settings = NoiseSettings::new(vec![1e-8, 1e-7], 8, 42);
        let a = noise_experiment(s.clone(), &settings).unwrap();
        settings.parallel = false;
        let b = noise_experiment(s, &settings).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn slope_fit() {
        let x = [1e-9, 1e-8, 1e-7];
        let y = [3e-9, 3e-8, 3e-7];
        assert!((log_log_slope(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(log_log_slope(&[1.0], &[1.0]), None);
        assert_eq!(log_log_slope(&[0.0, 0.0], &[1.0, 2.0]), None);
    }

    #[test]
    fn noise_is_keyed_by_trial() {
        let u = NoiseDistribution::Uniform;
        let a = keyed_noise(7, 3, 6, u, false);
        let b = keyed_noise(7, 3, 6, u, false);
        let other = keyed_noise(7, 4, 6, u, false);
        assert_eq!(a, b);
        assert_ne!(a, other);
        assert!(a.iter().all(|z| z.re.abs() <= 1.0 && z.im == 0.0));
        assert!(keyed_noise(7, 0, 50, u, true)
            .iter()
            .all(|z| z.norm() <= 1.0));
    }
}
