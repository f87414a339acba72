//! Task runners. Each run yields a JSON result document and a CSV table;
//! solver failures are reported inside the document with exit code 2.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::{json, Value};

use prony_core::md::{axis_moments, solve_prony_md, AxisMoments, MDPronySolution};
use prony_core::pwc::{reconstruct_piecewise_constant, PiecewiseConstantSignal};
use prony_core::shift::{
    dual_coefficients, generalized_moments, recover_shifts_from_fourier,
    recover_shifts_from_moments, FourierMeasurements, KernelMoments,
};
use prony_core::stability::{
    amplitude_sweep, confluent_error_bounds, keyed_noise, local_error_bounds, noise_experiment,
    NoiseSettings, NoiseTarget, StabilityReport,
};
use prony_core::{
    confluent_moments, prony_moments, solve_confluent_prony, solve_prony_1d,
    ConfluentPronySolution, MomentSequence, PronySolution,
};

use crate::config::{ExperimentConfig, KernelSpec, MomentFile, TaskKind};
use crate::error::{config_error, CliError};
use crate::quadrature::{compute_moments, Integrand, QuadratureResult, QuadratureSpec, Weight};

pub const SCHEMA_VERSION: u32 = 1;

const PARAMETER_HEADER: [&str; 7] = [
    "trial",
    "param",
    "estimate_re",
    "estimate_im",
    "truth_re",
    "truth_im",
    "error",
];
const STABILITY_HEADER: [&str; 5] = ["eps", "trial", "param", "error", "bound"];
const SWEEP_HEADER: [&str; 4] = ["scale", "magnitude", "param", "error"];

/// Everything a run produces, before it is written to disk.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub task: TaskKind,
    pub result: Value,
    pub csv: String,
    /// Additional `(file name, contents)` tables.
    pub extra: Vec<(String, String)>,
    pub exit_code: u8,
}

struct TaskOutput {
    solution: Value,
    residuals: Value,
    bounds: Value,
    diagnostics: Value,
    csv: String,
    extra: Vec<(String, String)>,
}

/// `{:.16e}`, i.e. 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.16e}")
    }
}

struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Table { writer }
    }

    fn row(&mut self, fields: &[String]) {
        self.writer.write_record(fields).expect("in-memory write");
    }

    fn finish(self) -> String {
        String::from_utf8(self.writer.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

/// One estimated parameter, optionally with its ground truth.
struct Estimate {
    param: String,
    value: Complex64,
    truth: Option<Complex64>,
}

impl Estimate {
    fn new(param: String, value: Complex64, truth: Option<Complex64>) -> Self {
        Estimate {
            param,
            value,
            truth,
        }
    }

    fn error(&self) -> Option<f64> {
        self.truth.map(|t| (self.value - t).norm())
    }
}

fn parameter_rows(table: &mut Table, trial: usize, estimates: &[Estimate]) {
    for e in estimates {
        let (tre, tim) = e.truth.map_or((String::new(), String::new()), |t| {
            (format_float(t.re), format_float(t.im))
        });
        table.row(&[
            trial.to_string(),
            e.param.clone(),
            format_float(e.value.re),
            format_float(e.value.im),
            tre,
            tim,
            e.error().map(format_float).unwrap_or_default(),
        ]);
    }
}

fn max_error(estimates: &[Estimate]) -> Option<f64> {
    estimates
        .iter()
        .map(Estimate::error)
        .try_fold(0.0f64, |acc, e| e.map(|e| acc.max(e)))
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn max_residual(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn bounds_json(report: &StabilityReport) -> Value {
    let mut v = serde_json::to_value(report).expect("serializable report");
    if let Value::Object(map) = &mut v {
        map.remove("experiment");
    }
    v
}

/// Measured data shared by the one-dimensional tasks.
struct Measurements {
    values: Vec<Complex64>,
    /// Noise already present in the data (from the moment file).
    prior_eps: f64,
    source: &'static str,
}

impl Measurements {
    fn acquire(
        cfg: &ExperimentConfig,
        generate: impl FnOnce() -> Result<Option<Vec<Complex64>>, CliError>,
    ) -> Result<Self, CliError> {
        if let Some(path) = &cfg.moments_file {
            let file = MomentFile::load(path)?;
            let mut values = file.complex_values();
            if let Some(k) = cfg.moment_count {
                values.truncate(k);
            }
            return Ok(Measurements {
                values,
                prior_eps: file.noise_eps.unwrap_or(0.0),
                source: "file",
            });
        }
        match generate()? {
            Some(values) => Ok(Measurements {
                values,
                prior_eps: 0.0,
                source: "generated",
            }),
            None => Err(config_error(
                "the model section needs ground truth or a moments_file",
            )),
        }
    }

    fn total_eps(&self, cfg: &ExperimentConfig) -> f64 {
        self.prior_eps + cfg.noise_eps
    }

    /// Measurements for `trial`, perturbed when `noise_eps > 0`.
    fn trial(&self, cfg: &ExperimentConfig, trial: usize) -> Vec<Complex64> {
        perturb(cfg, &self.values, trial)
    }
}

fn perturb(cfg: &ExperimentConfig, values: &[Complex64], trial: usize) -> Vec<Complex64> {
    if cfg.noise_eps == 0.0 {
        return values.to_vec();
    }
    let complex = values.iter().any(|z| z.im != 0.0);
    let seed = cfg.seed.expect("validated: seed present with trials");
    let noise = keyed_noise(seed, trial, values.len(), cfg.noise, complex);
    values
        .iter()
        .zip(noise)
        .map(|(m, d)| m + d * cfg.noise_eps)
        .collect()
}

fn runs(cfg: &ExperimentConfig) -> usize {
    cfg.trials.max(1)
}

fn diagnostics(cfg: &ExperimentConfig, meas: &Measurements) -> Value {
    json!({
        "moment_count": meas.values.len(),
        "noise_eps": cfg.noise_eps,
        "prior_noise_eps": meas.prior_eps,
        "trials": runs(cfg),
        "source": meas.source,
    })
}

fn real_pairs(
    a: &Option<Vec<f64>>,
    b: &Option<Vec<f64>>,
    what: &str,
) -> Result<Option<(Vec<f64>, Vec<f64>)>, CliError> {
    match (a, b) {
        (Some(a), Some(b)) if a.len() == b.len() => Ok(Some((a.clone(), b.clone()))),
        (Some(_), Some(_)) => Err(config_error(format!("{what}: one amplitude per location"))),
        (None, None) => Ok(None),
        _ => Err(config_error(format!(
            "{what}: locations and amplitudes go together"
        ))),
    }
}

fn solve_prony_task(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let model = cfg
        .spikes
        .as_ref()
        .ok_or_else(|| config_error("solve-prony needs a [spikes] section"))?;
    let truth = match real_pairs(&model.nodes, &model.amplitudes, "spikes")? {
        Some((x, a)) => {
            Some(PronySolution::from_real(&x, &a).map_err(|e| config_error(e.to_string()))?)
        }
        None => None,
    };
    let n = model
        .count
        .or(truth.as_ref().map(PronySolution::len))
        .ok_or_else(|| config_error("spikes: give nodes and amplitudes or a count"))?;
    let count = cfg.moment_count.unwrap_or(2 * n);
    let meas = Measurements::acquire(cfg, || {
        Ok(truth
            .as_ref()
            .map(|t| prony_moments(t, count).values().to_vec()))
    })?;

    let mut table = Table::new(&PARAMETER_HEADER);
    let mut first: Option<(PronySolution, Vec<Complex64>)> = None;
    let mut worst = Some(0.0f64);
    for trial in 0..runs(cfg) {
        let m = MomentSequence::new(meas.trial(cfg, trial))?;
        let sol = solve_prony_1d(&m, n)?;
        let mut estimates = Vec::new();
        for j in 0..sol.len() {
            let t = truth.as_ref().filter(|t| t.len() == sol.len());
            estimates.push(Estimate::new(
                format!("x{j}"),
                sol.nodes()[j],
                t.map(|t| t.nodes()[j]),
            ));
            estimates.push(Estimate::new(
                format!("a{j}"),
                sol.amplitudes()[j],
                t.map(|t| t.amplitudes()[j]),
            ));
        }
        parameter_rows(&mut table, trial, &estimates);
        worst = worst.zip(max_error(&estimates)).map(|(a, b)| a.max(b));
        if first.is_none() {
            first = Some((sol, m.values().to_vec()));
        }
    }
    let (sol, m) = first.expect("at least one trial");
    let fitted = prony_moments(&sol, m.len());
    let reference = truth.clone().unwrap_or_else(|| sol.clone());
    Ok(TaskOutput {
        solution: serde_json::to_value(&sol).expect("serializable"),
        residuals: json!({
            "moment_residual_max": max_residual(fitted.values(), &m),
            "parameter_error_max": worst.filter(|_| truth.is_some()),
        }),
        bounds: bounds_json(&local_error_bounds(&reference, meas.total_eps(cfg))?),
        diagnostics: diagnostics(cfg, &meas),
        csv: table.finish(),
        extra: vec![],
    })
}

fn confluent_truth(
    cfg: &ExperimentConfig,
) -> Result<(Option<ConfluentPronySolution>, Vec<usize>), CliError> {
    let model = cfg
        .confluent
        .as_ref()
        .ok_or_else(|| config_error("this task needs a [confluent] section"))?;
    let truth = match (&model.nodes, &model.amplitudes) {
        (Some(x), Some(a)) => {
            Some(ConfluentPronySolution::from_real(x, a).map_err(|e| config_error(e.to_string()))?)
        }
        (None, None) => None,
        _ => return Err(config_error("confluent: nodes and amplitudes go together")),
    };
    let mults = match (&model.multiplicities, &truth) {
        (Some(m), Some(t)) if *m != t.multiplicities() => {
            return Err(config_error(
                "confluent: multiplicities disagree with the amplitudes",
            ))
        }
        (Some(m), _) => m.clone(),
        (None, Some(t)) => t.multiplicities(),
        (None, None) => return Err(config_error("confluent: give amplitudes or multiplicities")),
    };
    Ok((truth, mults))
}

fn solve_confluent_task(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let (truth, mults) = confluent_truth(cfg)?;
    let total: usize = mults.iter().sum();
    let count = cfg.moment_count.unwrap_or(2 * total);
    let meas = Measurements::acquire(cfg, || {
        Ok(truth
            .as_ref()
            .map(|t| confluent_moments(t, count).values().to_vec()))
    })?;

    let mut table = Table::new(&PARAMETER_HEADER);
    let mut first: Option<(ConfluentPronySolution, Vec<Complex64>)> = None;
    let mut worst = Some(0.0f64);
    for trial in 0..runs(cfg) {
        let m = MomentSequence::new(meas.trial(cfg, trial))?;
        let sol = solve_confluent_prony(&m, &mults)?;
        let mut estimates = Vec::new();
        for j in 0..sol.len() {
            let t = truth.as_ref();
            estimates.push(Estimate::new(
                format!("x{j}"),
                sol.nodes()[j],
                t.map(|t| t.nodes()[j]),
            ));
            for (i, &a) in sol.amplitudes()[j].iter().enumerate() {
                estimates.push(Estimate::new(
                    format!("a{i},{j}"),
                    a,
                    t.map(|t| t.amplitudes()[j][i]),
                ));
            }
        }
        parameter_rows(&mut table, trial, &estimates);
        worst = worst.zip(max_error(&estimates)).map(|(a, b)| a.max(b));
        if first.is_none() {
            first = Some((sol, m.values().to_vec()));
        }
    }
    let (sol, m) = first.expect("at least one trial");
    let fitted = confluent_moments(&sol, m.len());
    let reference = truth.clone().unwrap_or_else(|| sol.clone());
    Ok(TaskOutput {
        solution: serde_json::to_value(&sol).expect("serializable"),
        residuals: json!({
            "moment_residual_max": max_residual(fitted.values(), &m),
            "parameter_error_max": worst.filter(|_| truth.is_some()),
        }),
        bounds: bounds_json(&confluent_error_bounds(&reference, meas.total_eps(cfg))?),
        diagnostics: diagnostics(cfg, &meas),
        csv: table.finish(),
        extra: vec![],
    })
}

fn solve_md_task(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let model = cfg
        .md
        .as_ref()
        .ok_or_else(|| config_error("solve-md needs an [md] section"))?;
    if cfg.moments_file.is_some() {
        return Err(config_error(
            "solve-md synthesizes its axis moments; moments_file is not supported",
        ));
    }
    let truth = MDPronySolution::from_real(&model.points, &model.amplitudes)
        .map_err(|e| config_error(e.to_string()))?;
    let (n, d) = (truth.len(), truth.dimension());
    let count = cfg.moment_count.unwrap_or(2 * n);
    if count < 2 {
        return Err(config_error("solve-md needs at least two moments per axis"));
    }
    let exact = axis_moments(&truth, count)?;

    let mut table = Table::new(&PARAMETER_HEADER);
    let mut first: Option<(MDPronySolution, AxisMoments)> = None;
    let mut worst = 0.0f64;
    for trial in 0..runs(cfg) {
        // The shared zeroth moment is perturbed once.
        let flat: Vec<Complex64> = std::iter::once(exact.axis(0)[0])
            .chain(exact.axes().iter().flat_map(|a| a[1..].iter().copied()))
            .collect();
        let noisy = perturb(cfg, &flat, trial);
        let axes = (0..d)
            .map(|axis| {
                std::iter::once(noisy[0])
                    .chain(
                        noisy[1 + axis * (count - 1)..1 + (axis + 1) * (count - 1)]
                            .iter()
                            .copied(),
                    )
                    .collect()
            })
            .collect();
        let am = AxisMoments::new(axes)?;
        let sol = solve_prony_md(&am, n)?;
        let mut estimates = Vec::new();
        for (j, (p, &a)) in sol.points().iter().zip(sol.amplitudes()).enumerate() {
            // Amplitudes identify points.
            let k = (0..n)
                .min_by(|&u, &v| {
                    (truth.amplitudes()[u] - a)
                        .norm()
                        .total_cmp(&(truth.amplitudes()[v] - a).norm())
                })
                .expect("nonempty");
            for (axis, &x) in p.iter().enumerate() {
                estimates.push(Estimate::new(
                    format!("x{j},{axis}"),
                    x,
                    Some(truth.points()[k][axis]),
                ));
            }
            estimates.push(Estimate::new(
                format!("a{j}"),
                a,
                Some(truth.amplitudes()[k]),
            ));
        }
        parameter_rows(&mut table, trial, &estimates);
        worst = worst.max(max_error(&estimates).unwrap_or(0.0));
        if first.is_none() {
            first = Some((sol, am));
        }
    }
    let (sol, am) = first.expect("at least one trial");
    let fitted = axis_moments(&sol, count)?;
    let residual = (0..d)
        .map(|a| max_residual(fitted.axis(a), am.axis(a)))
        .fold(0.0, f64::max);
    Ok(TaskOutput {
        solution: serde_json::to_value(&sol).expect("serializable"),
        residuals: json!({ "moment_residual_max": residual, "parameter_error_max": worst }),
        bounds: Value::Null,
        diagnostics: json!({
            "moment_count": count,
            "dimension": d,
            "noise_eps": cfg.noise_eps,
            "trials": runs(cfg),
            "source": "generated",
        }),
        csv: table.finish(),
        extra: vec![],
    })
}

/// `int t^p exp(-t^2 / (2 sigma^2)) dt` over the line.
fn gaussian_moment(sigma: f64, p: usize) -> f64 {
    if p % 2 == 1 {
        return 0.0;
    }
    let double_factorial: f64 = (1..p).step_by(2).map(|t| t as f64).product();
    sigma.powi(p as i32 + 1) * (2.0 * PI).sqrt() * double_factorial
}

fn quadrature_json(q: Option<&QuadratureResult>) -> Value {
    match q {
        Some(q) => json!({
            "closed_form": q.closed_form,
            "panels": q.panels,
            "error_estimate": q.error_estimate,
        }),
        None => Value::Null,
    }
}

fn shift_truth(
    cfg: &ExperimentConfig,
) -> Result<(KernelSpec, Option<(Vec<f64>, Vec<f64>)>, usize, usize), CliError> {
    let model = cfg
        .shifts
        .as_ref()
        .ok_or_else(|| config_error("shift tasks need a [shifts] section"))?;
    match model.kernel {
        KernelSpec::Box { width } if !(width > 0.0) => {
            return Err(config_error("box width must be positive"))
        }
        KernelSpec::Gaussian { sigma } if !(sigma > 0.0) => {
            return Err(config_error("sigma must be positive"))
        }
        _ => {}
    }
    let truth = real_pairs(&model.shifts, &model.amplitudes, "shifts")?;
    let n = model
        .count
        .or(truth.as_ref().map(|t| t.0.len()))
        .ok_or_else(|| config_error("shifts: give shifts and amplitudes or a count"))?;
    Ok((model.kernel, truth, n, model.panels))
}

fn shift_estimates(
    shifts: &[f64],
    amplitudes: &[Complex64],
    truth: Option<&(Vec<f64>, Vec<f64>)>,
) -> Vec<Estimate> {
    let mut got: Vec<(f64, Complex64)> = shifts
        .iter()
        .copied()
        .zip(amplitudes.iter().copied())
        .collect();
    got.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut want: Option<Vec<(f64, f64)>> = truth
        .filter(|t| t.0.len() == got.len())
        .map(|t| t.0.iter().copied().zip(t.1.iter().copied()).collect());
    if let Some(w) = want.as_mut() {
        w.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let mut out = Vec::new();
    for (j, &(x, a)) in got.iter().enumerate() {
        let t = want.as_ref().map(|w| w[j]);
        out.push(Estimate::new(format!("x{j}"), c(x), t.map(|t| c(t.0))));
        out.push(Estimate::new(format!("a{j}"), a, t.map(|t| c(t.1))));
    }
    out
}

fn shifts_moments_task(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let (kernel, truth, n, panels) = shift_truth(cfg)?;
    let count = cfg.moment_count.unwrap_or(2 * n);
    let km = match kernel {
        KernelSpec::Box { width } => KernelMoments::box_kernel(width, count)?,
        KernelSpec::Gaussian { sigma } => KernelMoments::from_real(
            &(0..count)
                .map(|p| gaussian_moment(sigma, p))
                .collect::<Vec<_>>(),
        )?,
    };
    let mut quad = None;
    let meas = Measurements::acquire(cfg, || {
        let Some((shifts, amplitudes)) = truth.clone() else {
            return Ok(None);
        };
        let lo = shifts.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = shifts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (integrand, interval) = match kernel {
            KernelSpec::Box { width } => (
                Integrand::BoxShifts {
                    width,
                    shifts,
                    amplitudes,
                },
                (lo, hi + width),
            ),
            KernelSpec::Gaussian { sigma } => (
                Integrand::GaussianShifts {
                    sigma,
                    shifts,
                    amplitudes,
                    periodic: false,
                },
                (lo - 12.0 * sigma, hi + 12.0 * sigma),
            ),
        };
        let q = compute_moments(
            &QuadratureSpec {
                integrand,
                weight: Weight::Monomial,
                interval,
                panels,
            },
            count,
        )?;
        let values = q.moments.values().to_vec();
        quad = Some(q);
        Ok(Some(values))
    })?;

    let mut table = Table::new(&PARAMETER_HEADER);
    let mut first: Option<(PronySolution, Vec<Complex64>)> = None;
    let mut worst = Some(0.0f64);
    for trial in 0..runs(cfg) {
        let m = MomentSequence::new(meas.trial(cfg, trial))?;
        let sol = recover_shifts_from_moments(&km, &m, n)?;
        let shifts: Vec<f64> = sol.nodes().iter().map(|z| z.re).collect();
        let estimates = shift_estimates(&shifts, sol.amplitudes(), truth.as_ref());
        parameter_rows(&mut table, trial, &estimates);
        worst = worst.zip(max_error(&estimates)).map(|(a, b)| a.max(b));
        if first.is_none() {
            first = Some((sol, m.values().to_vec()));
        }
    }
    let (sol, m) = first.expect("at least one trial");
    let duals = dual_coefficients(&km, m.len() - 1)?;
    let generalized = generalized_moments(&duals, &MomentSequence::new(m)?)?;
    let fitted = prony_moments(&sol, generalized.len());
    let mut diag = diagnostics(cfg, &meas);
    diag["quadrature"] = quadrature_json(quad.as_ref());
    Ok(TaskOutput {
        solution: serde_json::to_value(&sol).expect("serializable"),
        residuals: json!({
            "generalized_moment_residual_max": max_residual(fitted.values(), generalized.values()),
            "parameter_error_max": worst.filter(|_| truth.is_some()),
        }),
        bounds: Value::Null,
        diagnostics: diag,
        csv: table.finish(),
        extra: vec![],
    })
}

fn kernel_transform(kernel: KernelSpec, k: usize) -> Complex64 {
    let kf = k as f64;
    match kernel {
        KernelSpec::Box { width } if k == 0 => c(width),
        KernelSpec::Box { width } => {
            (Complex64::from_polar(1.0, kf * width) - 1.0) / Complex64::new(0.0, kf)
        }
        KernelSpec::Gaussian { sigma } => {
            c((2.0 * PI).sqrt() * sigma * (-sigma * sigma * kf * kf / 2.0).exp())
        }
    }
}

fn shifts_fourier_task(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let (kernel, truth, n, panels) = shift_truth(cfg)?;
    let count = cfg.moment_count.unwrap_or(2 * n);
    if let (Some((shifts, _)), KernelSpec::Box { width }) = (&truth, kernel) {
        if shifts.iter().any(|&x| x < -PI || x + width > PI) {
            return Err(config_error("box shifts must lie inside [-pi, pi]"));
        }
    }
    let mut quad = None;
    let meas = Measurements::acquire(cfg, || {
        let Some((shifts, amplitudes)) = truth.clone() else {
            return Ok(None);
        };
        let integrand = match kernel {
            KernelSpec::Box { width } => Integrand::BoxShifts {
                width,
                shifts,
                amplitudes,
            },
            KernelSpec::Gaussian { sigma } => Integrand::GaussianShifts {
                sigma,
                shifts,
                amplitudes,
                periodic: true,
            },
        };
        let q = compute_moments(
            &QuadratureSpec {
                integrand,
                weight: Weight::Harmonic,
                interval: (-PI, PI),
                panels,
            },
            count,
        )?;
        let values = q.moments.values().to_vec();
        quad = Some(q);
        Ok(Some(values))
    })?;
    let transform: Vec<Complex64> = (0..meas.values.len())
        .map(|k| kernel_transform(kernel, k))
        .collect();

    let mut table = Table::new(&PARAMETER_HEADER);
    let mut first = None;
    let mut worst = Some(0.0f64);
    for trial in 0..runs(cfg) {
        let fm = FourierMeasurements::new(meas.trial(cfg, trial), transform.clone())?;
        let sol = recover_shifts_from_fourier(&fm, n)?;
        let estimates = shift_estimates(&sol.shifts, sol.solution.amplitudes(), truth.as_ref());
        parameter_rows(&mut table, trial, &estimates);
        worst = worst.zip(max_error(&estimates)).map(|(a, b)| a.max(b));
        if first.is_none() {
            first = Some(sol);
        }
    }
    let sol = first.expect("at least one trial");
    let mut diag = diagnostics(cfg, &meas);
    diag["quadrature"] = quadrature_json(quad.as_ref());
    diag["modulus_correction"] = json!(sol.modulus_correction);
    Ok(TaskOutput {
        solution: serde_json::to_value(&sol).expect("serializable"),
        residuals: json!({ "parameter_error_max": worst.filter(|_| truth.is_some()) }),
        bounds: Value::Null,
        diagnostics: diag,
        csv: table.finish(),
        extra: vec![],
    })
}

fn pwc_task(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let model = cfg
        .pwc
        .as_ref()
        .ok_or_else(|| config_error("pwc needs a [pwc] section"))?;
    let truth = match (&model.breakpoints, &model.values) {
        (Some(b), Some(v)) => Some(
            PiecewiseConstantSignal::from_pieces(b, v).map_err(|e| config_error(e.to_string()))?,
        ),
        (None, None) => None,
        _ => return Err(config_error("pwc: breakpoints and values go together")),
    };
    let n = model
        .jump_count
        .or(truth.as_ref().map(|t| t.jumps().len()))
        .ok_or_else(|| config_error("pwc: give pieces or a jump_count"))?;
    let count = cfg.moment_count.unwrap_or(2 * n + 1);
    let meas = Measurements::acquire(cfg, || {
        let (Some(b), Some(v)) = (&model.breakpoints, &model.values) else {
            return Ok(None);
        };
        let interval = (b[0], b[b.len() - 1]);
        let q = QuadratureSpec {
            integrand: Integrand::PiecewiseConstant {
                breakpoints: b.clone(),
                values: v.clone(),
            },
            weight: Weight::Monomial,
            interval,
            panels: 64,
        };
        Ok(Some(compute_moments(&q, count)?.moments.values().to_vec()))
    })?;

    let mut table = Table::new(&PARAMETER_HEADER);
    let mut first = None;
    let mut worst = Some(0.0f64);
    for trial in 0..runs(cfg) {
        let m = MomentSequence::new(meas.trial(cfg, trial))?;
        let r = reconstruct_piecewise_constant(&m, n)?;
        let s = &r.signal;
        let t = truth
            .as_ref()
            .filter(|t| t.jumps().len() == s.jumps().len());
        let mut estimates = Vec::new();
        for j in 0..s.jumps().len() {
            estimates.push(Estimate::new(
                format!("xi{j}"),
                c(s.jumps()[j]),
                t.map(|t| c(t.jumps()[j])),
            ));
            estimates.push(Estimate::new(
                format!("jump{j}"),
                c(s.magnitudes()[j]),
                t.map(|t| c(t.magnitudes()[j])),
            ));
        }
        for i in 0..s.values().len() {
            estimates.push(Estimate::new(
                format!("value{i}"),
                c(s.values()[i]),
                t.map(|t| c(t.values()[i])),
            ));
        }
        parameter_rows(&mut table, trial, &estimates);
        worst = worst.zip(max_error(&estimates)).map(|(a, b)| a.max(b));
        if first.is_none() {
            first = Some(r);
        }
    }
    let r = first.expect("at least one trial");
    // Moments of f' carry noise amplified by k <= 2n - 1.
    let factor = (2 * n).saturating_sub(1).max(1) as f64;
    let spikes = match &truth {
        Some(t) => PronySolution::from_real(t.jumps(), t.magnitudes()),
        None => PronySolution::from_real(r.signal.jumps(), r.signal.magnitudes()),
    };
    let bounds = match spikes {
        Ok(s) if n > 0 => bounds_json(&local_error_bounds(&s, factor * meas.total_eps(cfg))?),
        _ => Value::Null,
    };
    let mut diag = diagnostics(cfg, &meas);
    diag["derivative_noise_factor"] = json!(factor);
    Ok(TaskOutput {
        residuals: json!({
            "jump_sum_residual": r.jump_sum_residual,
            "integral_residual": r.integral_residual,
            "moment_residual_max": r.moment_residuals.iter().map(|x| x.abs()).fold(0.0, f64::max),
            "parameter_error_max": worst.filter(|_| truth.is_some()),
        }),
        solution: serde_json::to_value(&r.signal).expect("serializable"),
        bounds,
        diagnostics: diag,
        csv: table.finish(),
        extra: vec![],
    })
}

fn stability_task(cfg: &ExperimentConfig, task: TaskKind) -> Result<TaskOutput, CliError> {
    let target: NoiseTarget = if let Some(model) = &cfg.spikes {
        let (x, a) = real_pairs(&model.nodes, &model.amplitudes, "spikes")?
            .ok_or_else(|| config_error("stability-sweep needs ground-truth spikes"))?;
        PronySolution::from_real(&x, &a)
            .map_err(|e| config_error(e.to_string()))?
            .into()
    } else {
        let (truth, _) = confluent_truth(cfg)?;
        truth
            .ok_or_else(|| config_error("stability-sweep needs ground-truth amplitudes"))?
            .into()
    };
    let seed = cfg
        .seed
        .ok_or_else(|| config_error("stability-sweep needs a seed"))?;
    let mut settings = NoiseSettings::new(cfg.eps_grid.clone(), cfg.trials, seed);
    settings.distribution = cfg.noise;
    settings.parallel = !cfg.serial;

    let mut table = Table::new(&STABILITY_HEADER);
    let mut diag =
        json!({ "trials": cfg.trials, "distribution": cfg.noise, "slack": settings.slack });
    let mut bounds = Value::Null;
    if !cfg.eps_grid.is_empty() {
        let report = noise_experiment(target.clone(), &settings)?;
        let e = report.experiment.as_ref().expect("experiment data");
        for r in &e.records {
            let level = e
                .eps_grid
                .iter()
                .position(|&x| x == r.eps)
                .expect("grid level");
            for (p, name) in e.parameters.iter().enumerate() {
                let err = r.errors.get(p).copied().unwrap_or(f64::NAN);
                table.row(&[
                    format_float(r.eps),
                    r.trial.to_string(),
                    name.clone(),
                    format_float(err),
                    format_float(e.bounds[level][p]),
                ]);
            }
        }
        let slopes: serde_json::Map<String, Value> = e
            .parameters
            .iter()
            .cloned()
            .zip(e.slopes.iter().map(|s| json!(s)))
            .collect();
        diag["eps_grid"] = json!(e.eps_grid);
        diag["parameters"] = json!(e.parameters);
        diag["slopes"] = Value::Object(slopes);
        diag["max_errors"] = json!(e.max_errors);
        diag["violations"] = json!(e.violations);
        diag["failures"] = json!(e.failures);
        diag["contained_fraction"] = json!(e.contained_fraction());
        bounds = bounds_json(&report);
    }
    let mut extra = Vec::new();
    if let Some(sweep) = &cfg.sweep {
        let NoiseTarget::Classical(sol) = &target else {
            return Err(config_error("the amplitude sweep needs a [spikes] target"));
        };
        let s = amplitude_sweep(sol, sweep.index, &sweep.scales, sweep.eps, &settings)?;
        let mut t = Table::new(&SWEEP_HEADER);
        for (i, errors) in s.node_errors.iter().enumerate() {
            for (j, &err) in errors.iter().enumerate() {
                t.row(&[
                    format_float(s.scales[i]),
                    format_float(s.magnitudes[i]),
                    format!("x{j}"),
                    format_float(err),
                ]);
            }
        }
        extra.push((format!("{}_sweep.csv", task.name()), t.finish()));
        diag["amplitude_sweep"] = json!({
            "index": s.index,
            "eps": s.eps,
            "slope": s.slope,
            "other_node_variation": s.other_node_variation,
        });
    }
    let solution = match &target {
        NoiseTarget::Classical(s) => serde_json::to_value(s),
        NoiseTarget::Confluent(s) => serde_json::to_value(s),
    }
    .expect("serializable");
    Ok(TaskOutput {
        solution,
        residuals: Value::Null,
        bounds,
        diagnostics: diag,
        csv: table.finish(),
        extra,
    })
}

fn header_only(task: TaskKind) -> String {
    let header: &[&str] = if task == TaskKind::StabilitySweep {
        &STABILITY_HEADER
    } else {
        &PARAMETER_HEADER
    };
    Table::new(header).finish()
}

/// Runs `task`. Configuration and i/o problems are returned as errors;
/// solver failures produce an output with `exit_code` 2.
pub fn run_experiment(cfg: &ExperimentConfig, task: TaskKind) -> Result<RunOutput, CliError> {
    cfg.validate(task)?;
    let outcome = match task {
        TaskKind::SolveProny => solve_prony_task(cfg),
        TaskKind::SolveConfluent => solve_confluent_task(cfg),
        TaskKind::SolveMd => solve_md_task(cfg),
        TaskKind::ShiftsMoments => shifts_moments_task(cfg),
        TaskKind::ShiftsFourier => shifts_fourier_task(cfg),
        TaskKind::Pwc => pwc_task(cfg),
        TaskKind::StabilitySweep => stability_task(cfg, task),
    };
    // Where results go and how trials are scheduled never change them, so
    // they stay out of the echo and reruns stay byte-identical.
    let echo = ExperimentConfig {
        output: None,
        serial: false,
        ..cfg.clone()
    };
    let mut result = json!({
        "schema_version": SCHEMA_VERSION,
        "version": env!("CARGO_PKG_VERSION"),
        "task": task.name(),
        "config": serde_json::to_value(&echo).expect("serializable config"),
        "seed": cfg.seed,
        "solution": Value::Null,
        "residuals": Value::Null,
        "bounds": Value::Null,
        "diagnostics": Value::Null,
        "error": Value::Null,
    });
    match outcome {
        Ok(out) => {
            result["solution"] = out.solution;
            result["residuals"] = out.residuals;
            result["bounds"] = out.bounds;
            result["diagnostics"] = out.diagnostics;
            Ok(RunOutput {
                task,
                result,
                csv: out.csv,
                extra: out.extra,
                exit_code: 0,
            })
        }
        Err(e @ CliError::Solver(_)) => {
            result["error"] = e.to_json()["error"].clone();
            Ok(RunOutput {
                task,
                result,
                csv: header_only(task),
                extra: vec![],
                exit_code: e.exit_code(),
            })
        }
        Err(e) => Err(e),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Writes `<task>.json`, `<task>.csv` and any extra tables into `dir`.
pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    let mut written = Vec::new();
    let json_path = dir.join(format!("{}.json", out.task.name()));
    let mut text = serde_json::to_string_pretty(&out.result).expect("serializable result");
    text.push('\n');
    write_file(&json_path, &text)?;
    written.push(json_path);
    let csv_path = dir.join(format!("{}.csv", out.task.name()));
    write_file(&csv_path, &out.csv)?;
    written.push(csv_path);
    for (name, contents) in &out.extra {
        let p = dir.join(name);
        write_file(&p, contents)?;
        written.push(p);
    }
    Ok(written)
}
