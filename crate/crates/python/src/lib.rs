//! Python bindings: `import lossqfi`.
//!
//! Photon-number states are plain weight lists, losses are `LossModel` objects
//! and strategies, loss modes and preset names are the same strings the CLI accepts.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use lossqfi as core;
use lossqfi::{InputState, LossMode, StateKind, StrategyKind};

fn to_py(e: core::Error) -> PyErr {
    match e {
        core::Error::Contract(_) => PyValueError::new_err(e.to_string()),
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

fn state(weights: Vec<f64>) -> PyResult<InputState> {
    InputState::new(weights).map_err(to_py)
}

fn mode(name: &str) -> PyResult<LossMode> {
    name.parse().map_err(to_py)
}

/// Transmissivities of the two arms.
#[pyclass(name = "LossModel", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyLossModel {
    inner: core::LossModel,
}

#[pymethods]
impl PyLossModel {
    #[new]
    #[pyo3(signature = (eta_a, eta_b = 1.0))]
    fn new(eta_a: f64, eta_b: f64) -> PyResult<Self> {
        let inner = core::LossModel::new(eta_a, eta_b).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn symmetric(eta: f64) -> PyResult<Self> {
        Self::new(eta, eta)
    }

    #[staticmethod]
    fn one_arm(eta: f64) -> PyResult<Self> {
        Self::new(eta, 1.0)
    }

    #[getter]
    fn eta_a(&self) -> f64 {
        self.inner.eta_a
    }

    #[getter]
    fn eta_b(&self) -> f64 {
        self.inner.eta_b
    }

    fn __repr__(&self) -> String {
        format!(
            "LossModel(eta_a={}, eta_b={})",
            self.inner.eta_a, self.inner.eta_b
        )
    }
}

/// Result of a bound maximization.
#[pyclass(name = "OptimizationReport", frozen, get_all)]
struct PyReport {
    weights: Vec<f64>,
    fq: f64,
    fq_exact: Option<f64>,
    iterations: usize,
    converged: bool,
    residual: f64,
}

#[pymethods]
impl PyReport {
    /// `(k, weight)` pairs with weight above `threshold`.
    #[pyo3(signature = (threshold = 1e-9))]
    fn support(&self, threshold: f64) -> Vec<(usize, f64)> {
        self.weights
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, x)| x > threshold)
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "OptimizationReport(n={}, fq={}, converged={})",
            self.weights.len() - 1,
            self.fq,
            if self.converged { "True" } else { "False" }
        )
    }
}

impl From<core::OptimizationReport> for PyReport {
    fn from(r: core::OptimizationReport) -> Self {
        Self {
            fq: r.qfi.value,
            fq_exact: r.refined_exact.map(|q| q.value),
            iterations: r.iterations,
            converged: r.converged,
            residual: r.residual,
            weights: r.optimum.into_weights(),
        }
    }
}

/// Weights of a preset state: noon, unbalanced-noon (p), two-component (m, p),
/// symmetric-two-component (m), twin-fock, fock (m) or uniform.
#[pyfunction]
#[pyo3(signature = (name, n, m = None, p = None))]
fn preset(name: &str, n: usize, m: Option<usize>, p: Option<f64>) -> PyResult<Vec<f64>> {
    let need = |v: Option<f64>, what: &str| {
        v.ok_or_else(|| PyValueError::new_err(format!("{name} needs {what}")))
    };
    let need_m = || m.ok_or_else(|| PyValueError::new_err(format!("{name} needs m")));
    let kind = match name {
        "noon" => StateKind::Noon,
        "unbalanced-noon" => StateKind::UnbalancedNoon { p: need(p, "p")? },
        "two-component" => StateKind::TwoComponent {
            m: need_m()?,
            p: need(p, "p")?,
        },
        "symmetric-two-component" => StateKind::SymmetricTwoComponent { m: need_m()? },
        "twin-fock" => StateKind::TwinFock,
        "fock" => StateKind::Fock { m: need_m()? },
        "uniform" => StateKind::Uniform,
        other => return Err(PyValueError::new_err(format!("unknown preset '{other}'"))),
    };
    Ok(core::preset_state(&kind, n).map_err(to_py)?.into_weights())
}

/// Fisher information of the lossless state.
#[pyfunction]
fn qfi_pure(weights: Vec<f64>) -> PyResult<f64> {
    Ok(core::qfi_pure(&state(weights)?).value)
}

/// Upper bound on the Fisher information under loss (exact when arm b is lossless).
#[pyfunction]
fn qfi_bound(weights: Vec<f64>, loss: PyLossModel) -> PyResult<f64> {
    Ok(core::qfi_bound(&state(weights)?, loss.inner).value)
}

/// Gradient of the bound with respect to the weights.
#[pyfunction]
fn qfi_bound_gradient(weights: Vec<f64>, loss: PyLossModel) -> PyResult<Vec<f64>> {
    Ok(core::qfi_bound_gradient(&state(weights)?, loss.inner))
}

/// Exact Fisher information from the eigendecomposition of the lossy state.
#[pyfunction]
fn qfi_exact(py: Python<'_>, weights: Vec<f64>, loss: PyLossModel) -> PyResult<f64> {
    let s = state(weights)?;
    py.detach(|| core::qfi_exact(&s, loss.inner))
        .map(|q| q.value)
        .map_err(to_py)
}

/// Closed-form Fisher information with loss in arm a only.
#[pyfunction]
fn qfi_one_arm(weights: Vec<f64>, eta: f64) -> PyResult<f64> {
    core::qfi_one_arm(&state(weights)?, eta)
        .map(|q| q.value)
        .map_err(to_py)
}

/// Input state maximizing the bound, from `start` or the uniform state.
#[pyfunction]
#[pyo3(signature = (n, loss, start = None, tolerance = None, max_iter = None, refine_exact = true))]
fn optimize(
    py: Python<'_>,
    n: usize,
    loss: PyLossModel,
    start: Option<Vec<f64>>,
    tolerance: Option<f64>,
    max_iter: Option<usize>,
    refine_exact: bool,
) -> PyResult<PyReport> {
    let defaults = core::OptimizerOptions::default();
    let options = core::OptimizerOptions {
        tolerance: tolerance.unwrap_or(defaults.tolerance),
        max_iter: max_iter.unwrap_or(defaults.max_iter),
        refine_exact,
    };
    if let Some(s) = &start {
        if s.len() != n + 1 {
            return Err(PyValueError::new_err(format!(
                "start needs {} weights, got {}",
                n + 1,
                s.len()
            )));
        }
    }
    py.detach(|| match start {
        Some(s) => core::optimize_from(s, loss.inner, options),
        None => core::optimize(n, loss.inner, options),
    })
    .map(PyReport::from)
    .map_err(to_py)
}

/// Best two-component state; `form` is "anchored" or "symmetric".
#[pyfunction]
fn optimize_two_component(
    py: Python<'_>,
    n: usize,
    loss: PyLossModel,
    form: &str,
) -> PyResult<PyReport> {
    let form = match form {
        "anchored" => core::TwoComponentForm::Anchored,
        "symmetric" => core::TwoComponentForm::Symmetric,
        other => return Err(PyValueError::new_err(format!("unknown form '{other}'"))),
    };
    py.detach(|| core::optimize_two_component(n, loss.inner, form))
        .map(PyReport::from)
        .map_err(to_py)
}

#[pyfunction]
fn heisenberg_limit(n: usize) -> PyResult<f64> {
    core::heisenberg_limit(n).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (n, eta, loss_mode = "both"))]
fn sil(n: usize, eta: f64, loss_mode: &str) -> PyResult<f64> {
    core::sil(n, eta, mode(loss_mode)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (n, eta, loss_mode = "both", balanced = true))]
fn noon_precision(n: usize, eta: f64, loss_mode: &str, balanced: bool) -> PyResult<f64> {
    core::noon_precision(n, eta, mode(loss_mode)?, balanced).map_err(to_py)
}

/// Chopping precision as a dict with precision, regime, n_per_run and eta0.
#[pyfunction]
#[pyo3(signature = (n, eta, loss_mode = "both"))]
fn chopping<'py>(
    py: Python<'py>,
    n: usize,
    eta: f64,
    loss_mode: &str,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let r = core::chopping(n, eta, mode(loss_mode)?).map_err(to_py)?;
    let regime = match r.regime {
        core::ChoppingRegime::SinglePhoton => "single-photon",
        core::ChoppingRegime::Intermediate => "intermediate",
        core::ChoppingRegime::Unchopped => "unchopped",
    };
    let d = pyo3::types::PyDict::new(py);
    d.set_item("precision", r.precision)?;
    d.set_item("regime", regime)?;
    d.set_item("n_per_run", r.n_per_run)?;
    d.set_item("eta0", r.eta0)?;
    Ok(d)
}

fn strategy_list(names: Vec<String>) -> PyResult<Vec<StrategyKind>> {
    names.iter().map(|s| s.parse().map_err(to_py)).collect()
}

/// Precision of each strategy for `n_min..=n_max`, as `{"n": [...], name: [...]}`.
#[pyfunction]
#[pyo3(signature = (strategies, n_min, n_max, eta, loss_mode = "both"))]
fn precision_curve<'py>(
    py: Python<'py>,
    strategies: Vec<String>,
    n_min: usize,
    n_max: usize,
    eta: f64,
    loss_mode: &str,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let kinds = strategy_list(strategies)?;
    let m = mode(loss_mode)?;
    let options = core::OptimizerOptions::default();
    let curve = py
        .detach(|| core::precision_curve(&kinds, n_min..=n_max, eta, m, options))
        .map_err(to_py)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("n", curve.rows.iter().map(|r| r.n).collect::<Vec<_>>())?;
    for &k in &kinds {
        d.set_item(k.name(), curve.column(k))?;
    }
    Ok(d)
}

/// Differential scaling exponent `[(n, s), ...]` of one strategy.
#[pyfunction]
#[pyo3(signature = (strategy, n_min, n_max, eta, loss_mode = "both", window = 4))]
fn differential_scaling(
    py: Python<'_>,
    strategy: &str,
    n_min: usize,
    n_max: usize,
    eta: f64,
    loss_mode: &str,
    window: usize,
) -> PyResult<Vec<(usize, f64)>> {
    let kind: StrategyKind = strategy.parse().map_err(to_py)?;
    let m = mode(loss_mode)?;
    let options = core::OptimizerOptions {
        refine_exact: false,
        ..core::OptimizerOptions::default()
    };
    let scaling = py
        .detach(|| {
            let curve = core::precision_curve(&[kind], n_min..=n_max, eta, m, options)?;
            core::differential_scaling(&curve, kind, window)
        })
        .map_err(to_py)?;
    Ok(scaling.rows.iter().map(|r| (r.n, r.s)).collect())
}

#[pymodule]
#[pyo3(name = "lossqfi")]
fn lossqfi_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLossModel>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    m.add_function(wrap_pyfunction!(qfi_pure, m)?)?;
    m.add_function(wrap_pyfunction!(qfi_bound, m)?)?;
    m.add_function(wrap_pyfunction!(qfi_bound_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(qfi_exact, m)?)?;
    m.add_function(wrap_pyfunction!(qfi_one_arm, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_two_component, m)?)?;
    m.add_function(wrap_pyfunction!(heisenberg_limit, m)?)?;
    m.add_function(wrap_pyfunction!(sil, m)?)?;
    m.add_function(wrap_pyfunction!(noon_precision, m)?)?;
    m.add_function(wrap_pyfunction!(chopping, m)?)?;
    m.add_function(wrap_pyfunction!(precision_curve, m)?)?;
    m.add_function(wrap_pyfunction!(differential_scaling, m)?)?;
    Ok(())
}
