//! Python bindings. Vectors cross the boundary as lists of floats and
//! reports come back as plain dictionaries.

use graded_norms::cli::{l0_report, parse_source, sequence_report};
use graded_norms::gradedness::{self, Direction};
use graded_norms::properties::{self, CheckConfig};
use graded_norms::topk::{self, KSupportMethod};
use graded_norms::{norms, Error, IndexSet, NormSpec as CoreSpec, Vector as CoreVector};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(graded_norms, NonConvergenceError, PyException);

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::NonConvergence { .. } => NonConvergenceError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn vector(xs: Vec<f64>) -> PyResult<CoreVector> {
    CoreVector::new(xs).map_err(to_py_err)
}

/// Round-trips a serializable report through JSON into Python objects.
fn to_python<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A source norm: `NormSpec("lp:2")`, `NormSpec("wlp:1:[1,2,3]")`,
/// `NormSpec("atomic:[[2,1],[1,2]]")` or a JSON specification.
#[pyclass(name = "NormSpec", module = "graded_norms", frozen)]
struct NormSpec {
    inner: CoreSpec,
}

#[pymethods]
impl NormSpec {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        parse_source(spec).map(|inner| NormSpec { inner }).map_err(to_py_err)
    }

    /// ℓp norm; pass `float("inf")` for the max norm.
    #[staticmethod]
    fn lp(p: f64) -> PyResult<Self> {
        let inner = if p == f64::INFINITY { Ok(CoreSpec::lp_inf()) } else { CoreSpec::lp(p) };
        inner.map(|inner| NormSpec { inner }).map_err(to_py_err)
    }

    #[staticmethod]
    fn weighted_lp(p: f64, w: Vec<f64>) -> PyResult<Self> {
        CoreSpec::weighted_lp(p, vector(w)?).map(|inner| NormSpec { inner }).map_err(to_py_err)
    }

    /// Gauge of the symmetric convex hull of `atoms`.
    #[staticmethod]
    fn atomic(atoms: Vec<Vec<f64>>) -> PyResult<Self> {
        let atoms = atoms.into_iter().map(vector).collect::<PyResult<Vec<_>>>()?;
        CoreSpec::atomic(atoms).map(|inner| NormSpec { inner }).map_err(to_py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!("NormSpec('{}')", self.inner)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn eval(&self, x: Vec<f64>) -> PyResult<f64> {
        norms::eval(&self.inner, &vector(x)?).map_err(to_py_err)
    }

    fn dual(&self, y: Vec<f64>) -> PyResult<f64> {
        norms::dual_eval(&self.inner, &vector(y)?).map_err(to_py_err)
    }

    fn topk(&self, k: usize, x: Vec<f64>) -> PyResult<f64> {
        topk::topk_eval(&self.inner, k, &vector(x)?).map_err(to_py_err)
    }

    /// `method` is one of `analytic`, `dual_opt`, `gauge_decomp`; the default
    /// picks the closed form when there is one.
    #[pyo3(signature = (k, y, tol = norms::DEFAULT_TOL, method = None))]
    fn ksupport(&self, k: usize, y: Vec<f64>, tol: f64, method: Option<&str>) -> PyResult<f64> {
        let method = match method {
            Some(m) => m.parse::<KSupportMethod>().map_err(to_py_err)?,
            None => topk::default_method(&self.inner),
        };
        topk::ksupport_eval_with(&self.inner, k, &vector(y)?, tol, method).map_err(to_py_err)
    }
}

/// Top-k and k-support sequences of `x` with their stationarity indices.
#[pyfunction]
#[pyo3(signature = (source, x, tol = norms::DEFAULT_TOL))]
fn sequence<'py>(py: Python<'py>, source: &NormSpec, x: Vec<f64>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let report = sequence_report(&source.inner, &vector(x)?, tol).map_err(to_py_err)?;
    to_python(py, &report)
}

/// ℓ0 recovered from the top-k sequence.
#[pyfunction]
#[pyo3(signature = (source, x, tol = norms::DEFAULT_TOL))]
fn l0_from_topk(source: &NormSpec, x: Vec<f64>, tol: f64) -> PyResult<usize> {
    gradedness::l0_from_topk(&source.inner, &vector(x)?, tol).map_err(to_py_err)
}

/// ℓ0 recovered from the k-support sequence.
#[pyfunction]
#[pyo3(signature = (source, y, tol = norms::DEFAULT_TOL))]
fn l0_from_ksupport(source: &NormSpec, y: Vec<f64>, tol: f64) -> PyResult<usize> {
    gradedness::l0_from_ksupport(&source.inner, &vector(y)?, tol).map_err(to_py_err)
}

/// Full recovery report: both routes and the difference-of-norms test.
#[pyfunction]
#[pyo3(signature = (source, x, tol = norms::DEFAULT_TOL))]
fn l0<'py>(py: Python<'py>, source: &NormSpec, x: Vec<f64>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let report = l0_report(&source.inner, &vector(x)?, tol).map_err(to_py_err)?;
    to_python(py, &report)
}

/// Runs a property checker and returns its report.
///
/// `property` is one of `monotonic`, `om`, `osm`, `birkhoff`,
/// `dual_pair_support`, `restriction_duality`, `om_rotund_osm`,
/// `sphere_identity`, `gradedness`.
#[pyfunction]
#[pyo3(signature = (
    property, source, dim, trials = properties::DEFAULT_TRIALS, seed = properties::DEFAULT_SEED,
    tol = properties::DEFAULT_CHECK_TOL, margin = properties::DEFAULT_MARGIN, k = None, index_set = None,
    strict = false, decreasing = false,
))]
#[allow(clippy::too_many_arguments)]
fn check<'py>(
    py: Python<'py>,
    property: &str,
    source: &NormSpec,
    dim: usize,
    trials: usize,
    seed: u64,
    tol: f64,
    margin: f64,
    k: Option<usize>,
    index_set: Option<Vec<usize>>,
    strict: bool,
    decreasing: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = CheckConfig::new(dim).trials(trials).seed(seed).tol(tol).margin(margin);
    let spec = &source.inner;
    let property = property.replace('-', "_");
    let report = py.detach(|| -> Result<serde_json::Value, Error> {
        let json = |r: &dyn erased::Report| r.to_value();
        Ok(match property.as_str() {
            "monotonic" => json(&properties::check_monotonic(spec, &cfg)?),
            "om" | "orthant_monotonic" => json(&properties::check_orthant_monotonic(spec, &cfg)?),
            "osm" | "orthant_strictly_monotonic" => json(&properties::check_orthant_strictly_monotonic(spec, &cfg)?),
            "birkhoff" => {
                let set = IndexSet::from_one_based(index_set.as_deref().unwrap_or(&[1]), dim)?;
                json(&properties::check_birkhoff(spec, &set, strict, &cfg)?)
            }
            "dual_pair_support" => json(&properties::check_dual_pair_support(spec, &cfg)?),
            "restriction_duality" => json(&properties::check_restriction_duality(spec, &cfg)?),
            "om_rotund_osm" => json(&properties::check_om_rotund_implies_osm(spec, &cfg)?),
            "sphere_identity" => {
                let k = k.ok_or_else(|| Error::InvalidArgument("sphere_identity needs k".into()))?;
                json(&properties::check_level_set_sphere_identity(spec, k, &cfg)?)
            }
            "gradedness" => {
                let direction = if decreasing { Direction::Decreasing } else { Direction::Increasing };
                json(&gradedness::classify_gradedness(spec, direction, strict, &cfg)?)
            }
            other => return Err(Error::InvalidArgument(format!("unknown property '{other}'"))),
        })
    });
    to_python(py, &report.map_err(to_py_err)?)
}

mod erased {
    /// Object-safe view of the serializable reports.
    pub trait Report {
        fn to_value(&self) -> serde_json::Value;
    }

    impl<T: serde::Serialize> Report for T {
        fn to_value(&self) -> serde_json::Value {
            serde_json::to_value(self).expect("reports serialize")
        }
    }
}

#[pymodule(name = "graded_norms")]
fn graded_norms_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<NormSpec>()?;
    m.add("NonConvergenceError", m.py().get_type::<NonConvergenceError>())?;
    m.add_function(wrap_pyfunction!(sequence, m)?)?;
    m.add_function(wrap_pyfunction!(l0_from_topk, m)?)?;
    m.add_function(wrap_pyfunction!(l0_from_ksupport, m)?)?;
    m.add_function(wrap_pyfunction!(l0, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    Ok(())
}
