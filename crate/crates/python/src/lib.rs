//! Python bindings for `zoaudit`.
//!
//! Structured results (reports, bound tables, configs) cross the boundary as
//! JSON and come out as plain Python dicts; inputs that are records on the
//! Rust side are accepted as dicts with the same field names.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::de::DeserializeOwned;
use serde::Serialize;

use zoaudit::audit::{self, AcSettings, AuditParams, Bound as CiBound, Theorem};
use zoaudit::descent::{self, DescentConfig};
use zoaudit::estimators::{EstimatorKind, EstimatorSpec, Oracle, ScalarFunction};
use zoaudit::losses::{self, LossSpec, Side};
use zoaudit::stream::TrialRng;
use zoaudit::theory::{self, Thm3Params};

use rand::SeedableRng;

fn to_py_err(e: zoaudit::Error) -> PyErr {
    if e.is_input_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = obj
        .py()
        .import("json")?
        .call_method1("dumps", (obj,))?
        .extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn parse_side(side: &str) -> PyResult<Side> {
    match side {
        "X" | "x" => Ok(Side::X),
        "X'" | "XPRIME" | "xprime" => Ok(Side::XPrime),
        other => Err(PyValueError::new_err(format!(
            "side must be \"X\" or \"XPRIME\", got {other:?}"
        ))),
    }
}

/// A gradient estimator: base kind, radii, averaging and additive noise.
#[pyclass(name = "Estimator", module = "pyzoaudit", from_py_object)]
#[derive(Clone)]
struct PyEstimator {
    spec: EstimatorSpec,
}

#[pymethods]
impl PyEstimator {
    #[new]
    #[pyo3(signature = (kind, xi=None, mu1=None, mu2=None, mean_m=1, additive_sigma=0.0))]
    fn new(
        kind: &str,
        xi: Option<f64>,
        mu1: Option<f64>,
        mu2: Option<f64>,
        mean_m: usize,
        additive_sigma: f64,
    ) -> PyResult<Self> {
        let kind = EstimatorKind::ALL
            .into_iter()
            .find(|k| k.to_string() == kind.to_ascii_uppercase())
            .ok_or_else(|| PyValueError::new_err(format!("unknown estimator kind {kind:?}")))?;
        let mut spec = EstimatorSpec::new(kind);
        if let Some(xi) = xi {
            spec.xi = xi;
        }
        spec.mu1 = mu1.unwrap_or(spec.mu1);
        spec.mu2 = mu2.unwrap_or(spec.mu2);
        spec.mean_m = mean_m;
        spec.additive_sigma = additive_sigma;
        spec.validate().map_err(to_py_err)?;
        Ok(Self { spec })
    }

    #[getter]
    fn label(&self) -> String {
        self.spec.label()
    }

    #[getter]
    fn evals_per_draw(&self) -> u64 {
        self.spec.evals_per_draw()
    }

    /// One draw of the estimator on `loss` (side `side`) at `w`.
    fn draw(&self, loss: &PyLoss, side: &str, w: Vec<f64>, seed: u64) -> PyResult<Vec<f64>> {
        let f = loss.spec.build_loss(parse_side(side)?);
        let mut rng = TrialRng::seed_from_u64(seed);
        Ok(self.spec.draw(&f, &w, &mut rng).map_err(to_py_err)?.value)
    }

    /// `count` draws on the identically-zero function at `w`.
    fn draws_on_zero(&self, w: Vec<f64>, count: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
        let f = ScalarFunction::zero(w.len());
        let mut rng = TrialRng::seed_from_u64(seed);
        (0..count)
            .map(|_| Ok(self.spec.draw(&f, &w, &mut rng).map_err(to_py_err)?.value))
            .collect()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.spec)
    }

    fn __repr__(&self) -> String {
        format!("Estimator({})", self.spec.label())
    }
}

/// A neighboring dataset pair together with its per-side loss.
#[pyclass(name = "Loss", module = "pyzoaudit", from_py_object)]
#[derive(Clone)]
struct PyLoss {
    spec: LossSpec,
}

#[pymethods]
impl PyLoss {
    /// Quadratic pair with `n` records in dimension `k`, model dimension `d`.
    #[staticmethod]
    #[pyo3(signature = (n, k, lipschitz, d=None))]
    fn quadratic(n: usize, k: usize, lipschitz: f64, d: Option<usize>) -> PyResult<Self> {
        let pair = losses::quadratic_pair(n, k, lipschitz).map_err(to_py_err)?;
        let spec = LossSpec::new(pair, d.unwrap_or(k)).map_err(to_py_err)?;
        Ok(Self { spec })
    }

    /// Linear pair differing in zero-based coordinate `i_star`.
    #[staticmethod]
    #[pyo3(signature = (n, d, lipschitz, i_star=0))]
    fn linear(n: usize, d: usize, lipschitz: f64, i_star: usize) -> PyResult<Self> {
        let pair = losses::linear_pair(n, d, lipschitz, i_star).map_err(to_py_err)?;
        let spec = LossSpec::new(pair, d).map_err(to_py_err)?;
        Ok(Self { spec })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.spec.param_dim
    }

    fn evaluate(&self, side: &str, w: Vec<f64>) -> PyResult<f64> {
        let f = self.spec.build_loss(parse_side(side)?);
        if w.len() != f.dim() {
            return Err(PyValueError::new_err(format!(
                "expected a point of dimension {}, got {}",
                f.dim(),
                w.len()
            )));
        }
        Ok(f.evaluate(&w))
    }

    fn gradient(&self, side: &str, w: Vec<f64>) -> PyResult<Vec<f64>> {
        self.spec.true_gradient(parse_side(side)?, &w).map_err(to_py_err)
    }
}

/// Run projected zeroth-order descent; returns the list of iterates.
///
/// `config` is a dict with keys `iterations`, `eta`, `radius`, `projection`
/// ("BALL" or "BOX"), `init` ({"kind": "FIXED", "point": [...]} or
/// {"kind": "GAUSSIAN", "sigma": s}) and optionally `record_trajectory`.
#[pyfunction]
fn run_descent(
    loss: &PyLoss,
    side: &str,
    estimator: &PyEstimator,
    config: &Bound<'_, PyAny>,
    seed: u64,
) -> PyResult<Vec<Vec<f64>>> {
    let cfg: DescentConfig = from_py(config)?;
    let f = loss.spec.build_loss(parse_side(side)?);
    let traj = descent::run_descent_seeded(&f, &estimator.spec, &cfg, seed).map_err(to_py_err)?;
    Ok(traj.iterates)
}

#[pyfunction]
fn project_ball(w: Vec<f64>, radius: f64) -> Vec<f64> {
    descent::project_ball(&w, radius)
}

#[pyfunction]
fn project_box(w: Vec<f64>, radius: f64) -> Vec<f64> {
    descent::project_box(&w, radius)
}

#[pyfunction]
fn gaussian_tail_bound(w: f64, sigma: f64) -> f64 {
    theory::gaussian_tail_bound(w, sigma)
}

#[pyfunction]
fn paley_zygmund_bound(alpha: f64, m1: f64, m2: f64) -> PyResult<f64> {
    theory::paley_zygmund_bound(alpha, m1, m2).map_err(to_py_err)
}

/// Bound table for the Gaussian-start construction, as a dict.
#[pyfunction]
#[pyo3(signature = (n, eta, lipschitz, sigma, radius, c_s, iterations))]
#[allow(clippy::too_many_arguments)]
fn thm3_bounds<'py>(
    py: Python<'py>,
    n: usize,
    eta: f64,
    lipschitz: f64,
    sigma: f64,
    radius: f64,
    c_s: f64,
    iterations: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let p = Thm3Params {
        n,
        eta,
        lipschitz,
        sigma,
        radius,
        c_s,
        iterations,
    };
    to_py(py, &theory::thm3_bounds(&p).map_err(to_py_err)?)
}

#[pyfunction]
fn clopper_pearson(hits: u64, trials: u64, gamma: f64, side: &str) -> PyResult<f64> {
    let side = match side.to_ascii_lowercase().as_str() {
        "lower" => CiBound::Lower,
        "upper" => CiBound::Upper,
        other => return Err(PyValueError::new_err(format!("side must be lower or upper, got {other:?}"))),
    };
    audit::clopper_pearson(hits, trials, gamma, side).map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (estimator, dim=2, trials=10_000, seed=0))]
fn classify_zero_preserving<'py>(
    py: Python<'py>,
    estimator: &PyEstimator,
    dim: usize,
    trials: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let mut rng = TrialRng::seed_from_u64(seed);
    let r = audit::classify_zero_preserving(&estimator.spec, dim, trials, &mut rng)
        .map_err(to_py_err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (estimator, g=-1.0, dim=4, trials=10_000, seed=0))]
fn classify_ac<'py>(
    py: Python<'py>,
    estimator: &PyEstimator,
    g: f64,
    dim: usize,
    trials: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let mut rng = TrialRng::seed_from_u64(seed);
    let r = audit::classify_ac(&estimator.spec, &AcSettings::new(g, dim, trials), &mut rng)
        .map_err(to_py_err)?;
    to_py(py, &r)
}

/// Default audit parameters for `theorem` ("THM1", "THM2" or "THM3") as a
/// dict; edit and pass to [`audit_theorem`].
#[pyfunction]
#[pyo3(signature = (theorem, estimator, dim=2))]
fn audit_params<'py>(
    py: Python<'py>,
    theorem: &str,
    estimator: &PyEstimator,
    dim: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let theorem: Theorem = serde_json::from_value(serde_json::Value::String(theorem.to_ascii_uppercase()))
        .map_err(|_| PyValueError::new_err(format!("unknown theorem {theorem:?}")))?;
    to_py(py, &AuditParams::new(theorem, estimator.spec.clone(), dim))
}

/// Run a distinguishing audit; takes and returns dicts.
#[pyfunction]
fn audit_theorem<'py>(py: Python<'py>, params: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let params: AuditParams = from_py(params)?;
    let report = py
        .detach(|| audit::audit_theorem(&params))
        .map_err(to_py_err)?;
    let out = to_py(py, &report)?;
    if let Ok(dict) = out.cast::<PyDict>() {
        dict.set_item("csv_row", report.csv_row())?;
    }
    Ok(out)
}

#[pyfunction]
fn csv_header() -> Vec<&'static str> {
    audit::CSV_HEADER.to_vec()
}

#[pymodule]
fn pyzoaudit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEstimator>()?;
    m.add_class::<PyLoss>()?;
    m.add_function(wrap_pyfunction!(run_descent, m)?)?;
    m.add_function(wrap_pyfunction!(project_ball, m)?)?;
    m.add_function(wrap_pyfunction!(project_box, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_tail_bound, m)?)?;
    m.add_function(wrap_pyfunction!(paley_zygmund_bound, m)?)?;
    m.add_function(wrap_pyfunction!(thm3_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(clopper_pearson, m)?)?;
    m.add_function(wrap_pyfunction!(classify_zero_preserving, m)?)?;
    m.add_function(wrap_pyfunction!(classify_ac, m)?)?;
    m.add_function(wrap_pyfunction!(audit_params, m)?)?;
    m.add_function(wrap_pyfunction!(audit_theorem, m)?)?;
    m.add_function(wrap_pyfunction!(csv_header, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn module_round_trips_through_the_interpreter() {
        Python::initialize();
        Python::attach(|py| {
            let m = PyModule::new(py, "pyzoaudit").unwrap();
            pyzoaudit(&m).unwrap();
            let est = m.getattr("Estimator").unwrap().call1(("fd",)).unwrap();
            assert_eq!(est.getattr("label").unwrap().extract::<String>().unwrap(), "FD");
            let bounds = m
                .getattr("thm3_bounds")
                .unwrap()
                .call1((100usize, 0.01, 100.0, 1.0 / 1020.0, 1.0, 3.0, 8usize))
                .unwrap();
            let c1: f64 = bounds.get_item("c1").unwrap().extract().unwrap();
            assert_eq!(c1, 1.0 / 96.0);
            let params = m
                .getattr("audit_params")
                .unwrap()
                .call1(("THM2", est))
                .unwrap();
            params.set_item("trials", 1000).unwrap();
            let report = m.getattr("audit_theorem").unwrap().call1((params,)).unwrap();
            let verdict: String = report.get_item("verdict").unwrap().extract().unwrap();
            assert_eq!(verdict, "VIOLATION");
        });
    }
}
