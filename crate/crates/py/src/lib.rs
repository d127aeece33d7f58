//! Python bindings: plain floats and lists in, plain floats and tuples out.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use rdc_core::binary_info::{self, Probability, SourceModel};
use rdc_core::dc_region::{self, RepresentationChannel};
use rdc_core::error::Error;
use rdc_core::oneshot::{self, OperatingPoint};
use rdc_core::universal;
use rdc_core::verify::{run_verification, VerifyScope};

create_exception!(rdc, InfeasibleError, PyException, "No admissible solution exists for the given budgets.");

fn py_err(e: Error) -> PyErr {
    if e.is_infeasible() {
        return InfeasibleError::new_err(e.to_string());
    }
    match e {
        Error::Convergence { .. } | Error::SolverDisagreement(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn model(q_x: f64, q_s1: f64) -> PyResult<SourceModel> {
    SourceModel::new(q_x, q_s1).map_err(py_err)
}

/// Binary entropy in bits.
#[pyfunction]
fn binary_entropy(p: f64) -> PyResult<f64> {
    Ok(binary_info::binary_entropy(Probability::new(p).map_err(py_err)?).get())
}

/// The `p` in `[0, 1/2]` with `binary_entropy(p) == h`.
#[pyfunction]
fn inverse_binary_entropy(h: f64) -> PyResult<f64> {
    binary_info::inverse_binary_entropy(h).map(|p| p.get()).map_err(py_err)
}

/// One-shot minimum rate at distortion `d` and classification budget `c`.
#[pyfunction]
fn oneshot_rdc(q_x: f64, q_s1: f64, d: f64, c: f64) -> PyResult<f64> {
    let m = model(q_x, q_s1)?;
    let p = OperatingPoint::new(d, c).map_err(py_err)?;
    oneshot::oneshot_rdc(&m, &p).map(|s| s.rate.get()).map_err(py_err)
}

/// One-shot minimum distortion at rate `r` and classification budget `c`.
#[pyfunction]
fn oneshot_drc(q_x: f64, q_s1: f64, r: f64, c: f64) -> PyResult<f64> {
    let m = model(q_x, q_s1)?;
    oneshot::oneshot_drc(&m, r, c).map(|s| s.distortion.get()).map_err(py_err)
}

#[pyfunction]
fn asymptotic_rdc(q_x: f64, q_s1: f64, d: f64, c: f64) -> PyResult<f64> {
    let m = model(q_x, q_s1)?;
    let p = OperatingPoint::new(d, c).map_err(py_err)?;
    oneshot::asymptotic_rdc(&m, &p).map(|r| r.get()).map_err(py_err)
}

#[pyfunction]
fn asymptotic_drc(q_x: f64, q_s1: f64, r: f64, c: f64) -> PyResult<f64> {
    let m = model(q_x, q_s1)?;
    oneshot::asymptotic_drc(&m, r, c).map(|d| d.get()).map_err(py_err)
}

/// `(D, profile)` on the lower boundary of the achievable region.
#[pyfunction]
fn dc_lower_boundary(q: Vec<f64>, eps: Vec<f64>, q_s1: f64, c: f64) -> PyResult<(f64, Vec<f64>)> {
    let channel = RepresentationChannel::new(q, eps).map_err(py_err)?;
    let q_s1 = Probability::named("q_s1", q_s1).map_err(py_err)?;
    let pt = dc_region::dc_lower_boundary(&channel, q_s1, c).map_err(py_err)?;
    Ok((pt.distortion.get(), pt.profile.p))
}

/// `(r_lb, r_ub)`: the lower and upper universal rates at rate `r`.
#[pyfunction]
fn rate_penalty_bounds(py: Python<'_>, q_x: f64, q_s1: f64, r: f64) -> PyResult<(f64, f64)> {
    let m = model(q_x, q_s1)?;
    let b = py.detach(|| universal::rate_penalty_bounds(&m, r)).map_err(py_err)?;
    Ok((b.r_lb.get(), b.r_ub.get()))
}

/// Runs the oracle suite; returns `(passed, report)`.
#[pyfunction]
#[pyo3(signature = (scope = "all", resolution = None))]
fn verify(py: Python<'_>, scope: &str, resolution: Option<usize>) -> PyResult<(bool, String)> {
    let scope: VerifyScope = scope.parse().map_err(py_err)?;
    let report = py.detach(|| run_verification(scope, resolution)).map_err(py_err)?;
    Ok((report.passed(), report.to_string()))
}

#[pymodule]
fn rdc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    m.add_function(wrap_pyfunction!(binary_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_binary_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(oneshot_rdc, m)?)?;
    m.add_function(wrap_pyfunction!(oneshot_drc, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_rdc, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_drc, m)?)?;
    m.add_function(wrap_pyfunction!(dc_lower_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(rate_penalty_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
