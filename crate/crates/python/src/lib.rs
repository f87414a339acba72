//! Python bindings. Sequences cross the boundary as lists of `complex` (or
//! `float`, which converts); solutions are small read-only classes.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use prony_core::md::{solve_prony_md, AxisMoments, MDPronySolution};
use prony_core::pwc::{reconstruct_piecewise_constant, PiecewiseConstantSignal};
use prony_core::shift::{
    recover_shifts_from_fourier, recover_shifts_from_moments, FourierMeasurements, KernelMoments,
};
use prony_core::stability::{confluent_error_bounds, local_error_bounds, StabilityReport};
use prony_core::{self as core, MomentSequence};

create_exception!(prony_py, PronyError, PyValueError);

fn err(e: core::PronyError) -> PyErr {
    PronyError::new_err(e.to_string())
}

fn sequence(values: Vec<Complex64>) -> PyResult<MomentSequence> {
    MomentSequence::new(values).map_err(err)
}

#[pyclass(name = "PronySolution", frozen, module = "prony_py")]
#[derive(Clone)]
struct PySolution(core::PronySolution);

#[pymethods]
impl PySolution {
    #[new]
    fn new(nodes: Vec<Complex64>, amplitudes: Vec<Complex64>) -> PyResult<Self> {
        core::PronySolution::new(nodes, amplitudes)
            .map(PySolution)
            .map_err(err)
    }

    #[getter]
    fn nodes(&self) -> Vec<Complex64> {
        self.0.nodes().to_vec()
    }

    #[getter]
    fn amplitudes(&self) -> Vec<Complex64> {
        self.0.amplitudes().to_vec()
    }

    /// `m_k = sum_j a_j x_j^k` for `k < count`.
    fn moments(&self, count: usize) -> Vec<Complex64> {
        core::prony_moments(&self.0, count).values().to_vec()
    }

    /// First-order error bounds at noise level `eps`.
    fn error_bounds(&self, eps: f64) -> PyResult<Bounds> {
        local_error_bounds(&self.0, eps)
            .map(Bounds::from)
            .map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "PronySolution(nodes={:?}, amplitudes={:?})",
            self.0.nodes(),
            self.0.amplitudes()
        )
    }
}

#[pyclass(name = "ConfluentPronySolution", frozen, module = "prony_py")]
#[derive(Clone)]
struct PyConfluent(core::ConfluentPronySolution);

#[pymethods]
impl PyConfluent {
    /// `amplitudes[j][i]` multiplies the `i`-th derivative term at node `j`.
    #[new]
    fn new(nodes: Vec<Complex64>, amplitudes: Vec<Vec<Complex64>>) -> PyResult<Self> {
        core::ConfluentPronySolution::new(nodes, amplitudes)
            .map(PyConfluent)
            .map_err(err)
    }

    #[getter]
    fn nodes(&self) -> Vec<Complex64> {
        self.0.nodes().to_vec()
    }

    #[getter]
    fn amplitudes(&self) -> Vec<Vec<Complex64>> {
        self.0.amplitudes().to_vec()
    }

    #[getter]
    fn multiplicities(&self) -> Vec<usize> {
        self.0.multiplicities()
    }

    fn moments(&self, count: usize) -> Vec<Complex64> {
        core::confluent_moments(&self.0, count).values().to_vec()
    }

    fn error_bounds(&self, eps: f64) -> PyResult<Bounds> {
        confluent_error_bounds(&self.0, eps)
            .map(Bounds::from)
            .map_err(err)
    }
}

#[pyclass(name = "MDPronySolution", frozen, module = "prony_py")]
struct PyMd(MDPronySolution);

#[pymethods]
impl PyMd {
    #[getter]
    fn points(&self) -> Vec<Vec<Complex64>> {
        self.0.points().to_vec()
    }

    #[getter]
    fn amplitudes(&self) -> Vec<Complex64> {
        self.0.amplitudes().to_vec()
    }
}

#[pyclass(name = "PiecewiseConstantSignal", frozen, module = "prony_py")]
struct PyPwc {
    signal: PiecewiseConstantSignal,
    #[pyo3(get)]
    jump_sum_residual: f64,
    #[pyo3(get)]
    integral_residual: f64,
}

#[pymethods]
impl PyPwc {
    #[getter]
    fn jumps(&self) -> Vec<f64> {
        self.signal.jumps().to_vec()
    }

    #[getter]
    fn magnitudes(&self) -> Vec<f64> {
        self.signal.magnitudes().to_vec()
    }

    /// Value of each piece between consecutive jumps.
    #[getter]
    fn values(&self) -> Vec<f64> {
        self.signal.values().to_vec()
    }

    fn __call__(&self, x: f64) -> f64 {
        self.signal.eval(x)
    }

    fn moments(&self, count: usize) -> Vec<f64> {
        self.signal.moments(count).real_parts()
    }
}

#[pyclass(name = "ErrorBounds", frozen, module = "prony_py")]
struct Bounds {
    #[pyo3(get)]
    constant: f64,
    #[pyo3(get)]
    gautschi_bound: Option<f64>,
    #[pyo3(get)]
    eps: f64,
    #[pyo3(get)]
    node_bounds: Vec<f64>,
    #[pyo3(get)]
    amplitude_bounds: Vec<Vec<f64>>,
}

impl From<StabilityReport> for Bounds {
    fn from(r: StabilityReport) -> Self {
        Bounds {
            constant: r.constant,
            gautschi_bound: r.gautschi_bound,
            eps: r.eps,
            node_bounds: r.node_bounds,
            amplitude_bounds: r.amplitude_bounds,
        }
    }
}

/// Recovers `n` nodes and amplitudes from the first `2n` moments.
#[pyfunction]
fn solve_prony(moments: Vec<Complex64>, n: usize) -> PyResult<PySolution> {
    core::solve_prony_1d(&sequence(moments)?, n)
        .map(PySolution)
        .map_err(err)
}

/// Confluent solve with the multiplicity pattern given in node order.
#[pyfunction]
fn solve_confluent(moments: Vec<Complex64>, multiplicities: Vec<usize>) -> PyResult<PyConfluent> {
    core::solve_confluent_prony(&sequence(moments)?, &multiplicities)
        .map(PyConfluent)
        .map_err(err)
}

/// `axes[m][r]` is the moment of order `r` along axis `m`.
#[pyfunction]
fn solve_md(axes: Vec<Vec<Complex64>>, n: usize) -> PyResult<PyMd> {
    let am = AxisMoments::new(axes).map_err(err)?;
    solve_prony_md(&am, n).map(PyMd).map_err(err)
}

#[pyfunction]
fn shifts_from_moments(
    kernel_moments: Vec<Complex64>,
    moments: Vec<Complex64>,
    n: usize,
) -> PyResult<PySolution> {
    let km = KernelMoments::new(kernel_moments).map_err(err)?;
    recover_shifts_from_moments(&km, &sequence(moments)?, n)
        .map(PySolution)
        .map_err(err)
}

/// Returns `(shifts, amplitudes)` with shifts in `(-pi, pi]`.
#[pyfunction]
fn shifts_from_fourier(
    coefficients: Vec<Complex64>,
    kernel_transform: Vec<Complex64>,
    n: usize,
) -> PyResult<(Vec<f64>, Vec<Complex64>)> {
    let fm = FourierMeasurements::new(coefficients, kernel_transform).map_err(err)?;
    let r = recover_shifts_from_fourier(&fm, n).map_err(err)?;
    Ok((r.shifts, r.solution.amplitudes().to_vec()))
}

/// `jump_count` counts every jump of the zero-extended signal.
#[pyfunction]
fn reconstruct_pwc(moments: Vec<Complex64>, jump_count: usize) -> PyResult<PyPwc> {
    let r = reconstruct_piecewise_constant(&sequence(moments)?, jump_count).map_err(err)?;
    Ok(PyPwc {
        signal: r.signal,
        jump_sum_residual: r.jump_sum_residual,
        integral_residual: r.integral_residual,
    })
}

#[pymodule]
fn prony_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PronyError", m.py().get_type::<PronyError>())?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyConfluent>()?;
    m.add_class::<PyMd>()?;
    m.add_class::<PyPwc>()?;
    m.add_class::<Bounds>()?;
    m.add_function(wrap_pyfunction!(solve_prony, m)?)?;
    m.add_function(wrap_pyfunction!(solve_confluent, m)?)?;
    m.add_function(wrap_pyfunction!(solve_md, m)?)?;
    m.add_function(wrap_pyfunction!(shifts_from_moments, m)?)?;
    m.add_function(wrap_pyfunction!(shifts_from_fourier, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct_pwc, m)?)?;
    Ok(())
}
