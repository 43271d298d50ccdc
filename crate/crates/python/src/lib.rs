//! Python bindings for `radmax`.
//!
//! Densities and certificates are classes; reports come back as plain dicts.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use radmax::certificate::{self as cert, Construction, CriticalBase};
use radmax::{oracle, radial, specfun, Error};

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Oracle(_) | Error::Io(_) => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Radially decreasing density on R^d.
#[pyclass(name = "RadialDensity", frozen, skip_from_py_object)]
struct PyDensity(radial::RadialDensity);

#[pymethods]
impl PyDensity {
    #[staticmethod]
    fn lebesgue(d: u64) -> PyResult<Self> {
        radial::RadialDensity::lebesgue(d).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn restricted_lebesgue(d: u64) -> PyResult<Self> {
        radial::RadialDensity::restricted_lebesgue(d).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn power(d: u64, t: f64) -> PyResult<Self> {
        radial::RadialDensity::power(d, t).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn truncated_power(d: u64, t: f64) -> PyResult<Self> {
        radial::RadialDensity::truncated_power(d, t).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn log_singularity(d: u64) -> PyResult<Self> {
        radial::RadialDensity::log_singularity(d).map(Self).map_err(to_py)
    }

    /// Parse `family=power t=0.5 d=10` style text.
    #[staticmethod]
    #[pyo3(signature = (text, d=None))]
    fn parse(text: &str, d: Option<u64>) -> PyResult<Self> {
        radial::RadialDensity::from_kv_str(text, d).map(Self).map_err(to_py)
    }

    #[getter]
    fn dim(&self) -> u64 {
        self.0.dim()
    }

    #[getter]
    fn id(&self) -> String {
        self.0.id()
    }

    fn density(&self, rho: f64) -> f64 {
        self.0.density(rho)
    }

    fn ln_density(&self, rho: f64) -> f64 {
        self.0.ln_density(rho)
    }

    /// `ln mu(B(0, r))`.
    fn ln_ball(&self, r: f64) -> PyResult<f64> {
        radial::log_ball_at_origin(&self.0, r).map(|x| x.ln()).map_err(to_py)
    }

    /// `ln mu(B(c e1, r))`.
    fn ln_ball_offcenter(&self, c: f64, r: f64) -> PyResult<f64> {
        radial::log_ball_offcenter(&self.0, c, r).map(|x| x.ln()).map_err(to_py)
    }

    fn ln_growth(&self, u: f64, r: f64) -> PyResult<f64> {
        radial::growth_h(&self.0, u, r).map(|x| x.ln()).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("RadialDensity({})", self.0.to_kv())
    }
}

/// Lower bound on the weak-type constant, in log space.
#[pyclass(name = "Certificate", frozen)]
struct PyCertificate(cert::Certificate);

#[pymethods]
impl PyCertificate {
    #[getter]
    fn log_lower_bound(&self) -> f64 {
        self.0.log_lower_bound
    }

    #[getter]
    fn rate_per_dim(&self) -> f64 {
        self.0.rate_per_dim()
    }

    #[getter]
    fn log_alpha(&self) -> f64 {
        self.0.log_alpha()
    }

    #[getter]
    fn p(&self) -> f64 {
        self.0.p
    }

    #[getter]
    fn v(&self) -> f64 {
        self.0.v
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.0.radius
    }

    #[getter]
    fn construction(&self) -> &'static str {
        self.0.construction.name()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &self.0)
    }

    fn __repr__(&self) -> String {
        format!(
            "Certificate({}, p={}, log_lower_bound={})",
            self.0.construction.name(),
            self.0.p,
            self.0.log_lower_bound
        )
    }
}

#[pyfunction]
#[pyo3(signature = (density, p, v=0.5, radius=1.0))]
fn lemma_certificate(density: &PyDensity, p: f64, v: f64, radius: f64) -> PyResult<PyCertificate> {
    cert::lemma_certificate(&density.0, p, v, radius).map(PyCertificate).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (density, p, epsilon=cert::DEFAULT_EPSILON))]
fn decp_certificate<'py>(py: Python<'py>, density: &PyDensity, p: f64, epsilon: f64) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &cert::decp_certificate(&density.0, p, epsilon).map_err(to_py)?)
}

#[pyfunction]
fn decp_generalized_certificate<'py>(
    py: Python<'py>,
    density: &PyDensity,
    p: f64,
    t0: f64,
    t1: f64,
) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &cert::decp_generalized_certificate(&density.0, p, t0, t1).map_err(to_py)?)
}

#[pyfunction]
#[pyo3(signature = (t, d, p, c, p0_budget=None))]
fn doubling_certificate<'py>(
    py: Python<'py>,
    t: f64,
    d: u64,
    p: f64,
    c: f64,
    p0_budget: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let rep = cert::doubling_certificate(t, d, p, p0_budget.unwrap_or(p), c).map_err(to_py)?;
    to_dict(py, &rep)
}

#[pyfunction]
fn lebesgue_ball_certificate<'py>(py: Python<'py>, d: u64, p: f64) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &cert::lebesgue_ball_certificate(d, p).map_err(to_py)?)
}

#[pyfunction]
#[pyo3(signature = (density, p, radius=1.0))]
fn optimize_v<'py>(py: Python<'py>, density: &PyDensity, p: f64, radius: f64) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &cert::optimize_v(&density.0, p, radius).map_err(to_py)?)
}

/// Exponent where the construction's per-dimension base reaches 1.
#[pyfunction]
fn critical_p(base: &str) -> PyResult<f64> {
    let base: CriticalBase = base.parse().map_err(to_py)?;
    Ok(cert::critical_p(base))
}

#[pyfunction]
fn besicovitch_upper(d: u64, p: f64) -> PyResult<f64> {
    cert::besicovitch_upper(d, p).map_err(to_py)
}

#[pyfunction]
fn proxy_g(v: f64, q: f64) -> f64 {
    cert::proxy_g(v, q)
}

#[pyfunction]
fn construction_names() -> Vec<&'static str> {
    [
        Construction::LemmaDirect,
        Construction::Decp,
        Construction::DecpGeneralized,
        Construction::Doubling,
        Construction::LebesgueBall,
    ]
    .iter()
    .map(|c| c.name())
    .collect()
}

/// `(ln exact, ln lower, ln upper)` for the normalized cap `{x_1 >= s}`.
#[pyfunction]
fn cap_area(d: u64, s: f64) -> PyResult<(f64, f64, f64)> {
    let cap = specfun::CapSpec::from_cos(d, s).map_err(to_py)?;
    let (lo, up) = specfun::cap_area_bounds(&cap).map_err(to_py)?;
    Ok((specfun::cap_area_exact(&cap).ln(), lo.ln(), up.ln()))
}

#[pyfunction]
fn log_gamma(x: f64) -> PyResult<f64> {
    specfun::log_gamma(x).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (density, p, v=0.5, radius=1.0, samples=200, seed=42, grid=oracle::DEFAULT_GRID))]
#[allow(clippy::too_many_arguments)]
fn oracle_report<'py>(
    py: Python<'py>,
    density: &PyDensity,
    p: f64,
    v: f64,
    radius: f64,
    samples: usize,
    seed: u64,
    grid: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let rep = py
        .detach(|| oracle::oracle_report(&density.0, p, v, radius, samples, seed, grid))
        .map_err(to_py)?;
    to_dict(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (density, v=0.5, radius=1.0, samples=200, seed=42))]
fn verify_level_set<'py>(
    py: Python<'py>,
    density: &PyDensity,
    v: f64,
    radius: f64,
    samples: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let rep = py
        .detach(|| oracle::verify_level_set(&density.0, v, radius, samples, seed))
        .map_err(to_py)?;
    to_dict(py, &rep)
}

#[pymodule]
fn radmax_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensity>()?;
    m.add_class::<PyCertificate>()?;
    m.add_function(wrap_pyfunction!(lemma_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(decp_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(decp_generalized_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(doubling_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(lebesgue_ball_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_v, m)?)?;
    m.add_function(wrap_pyfunction!(critical_p, m)?)?;
    m.add_function(wrap_pyfunction!(besicovitch_upper, m)?)?;
    m.add_function(wrap_pyfunction!(proxy_g, m)?)?;
    m.add_function(wrap_pyfunction!(construction_names, m)?)?;
    m.add_function(wrap_pyfunction!(cap_area, m)?)?;
    m.add_function(wrap_pyfunction!(log_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_report, m)?)?;
    m.add_function(wrap_pyfunction!(verify_level_set, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
