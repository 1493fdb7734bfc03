//! Python bindings: the profile, the transport oracle and the run harness.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use wavebreak::harness::checks::profile_check as run_profile_check;
use wavebreak::harness::{parse_overrides, run_single, RunConfig};
use wavebreak::profile::{profile_derivatives, rescaled_profile, MAX_DERIVATIVE};
use wavebreak::solver::{burgers_exact, OracleData};

fn to_py(e: wavebreak::Error) -> PyErr {
    match e {
        wavebreak::Error::Argument(_) | wavebreak::Error::Domain(_) | wavebreak::Error::Config(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn json<T: serde::Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Stable profile value at `y`.
#[pyfunction]
fn profile(y: f64) -> PyResult<f64> {
    Ok(profile_derivatives(y).map_err(to_py)?[0])
}

/// Profile derivatives of orders 0..=5 at `y`.
#[pyfunction]
fn profile_derivatives_at(y: f64) -> PyResult<Vec<f64>> {
    Ok(profile_derivatives(y).map_err(to_py)?.to_vec())
}

/// Rescaled profile with third derivative `nu` at the origin.
#[pyfunction]
fn rescaled(y: f64, nu: f64) -> PyResult<f64> {
    rescaled_profile(y, nu).map_err(to_py)
}

/// Exact transport solution for `kappa - amplitude sin x` with constant `z`.
#[pyfunction]
#[pyo3(signature = (x, t, kappa=3.0, amplitude=0.1, z=0.0))]
fn burgers_sine(x: f64, t: f64, kappa: f64, amplitude: f64, z: f64) -> PyResult<f64> {
    burgers_exact(&OracleData::Sine { kappa, amplitude }, z, x, t).map_err(to_py)
}

/// Profile identity report as a JSON string.
#[pyfunction]
#[pyo3(signature = (half_points=5000, y_max=1e6))]
fn profile_check(half_points: usize, y_max: f64) -> PyResult<String> {
    json(&run_profile_check(half_points, y_max).map_err(to_py)?)
}

/// Runs a preset with `key=value` overrides below `out`, returning the
/// verdict as a JSON string.
#[pyfunction]
#[pyo3(signature = (preset, out, overrides=Vec::new()))]
fn simulate(py: Python<'_>, preset: &str, out: PathBuf, overrides: Vec<String>) -> PyResult<String> {
    let mut pairs = vec![("preset".to_string(), preset.to_string())];
    pairs.extend(parse_overrides(&overrides).map_err(to_py)?);
    let cfg = RunConfig::resolve(None, &pairs).map_err(to_py)?;
    let verdict = py.detach(|| run_single(&cfg, &out).map(|o| o.verdict)).map_err(to_py)?;
    json(&verdict)
}

#[pymodule]
fn wavebreak_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MAX_DERIVATIVE", MAX_DERIVATIVE)?;
    m.add_function(wrap_pyfunction!(profile, m)?)?;
    m.add_function(wrap_pyfunction!(profile_derivatives_at, m)?)?;
    m.add_function(wrap_pyfunction!(rescaled, m)?)?;
    m.add_function(wrap_pyfunction!(burgers_sine, m)?)?;
    m.add_function(wrap_pyfunction!(profile_check, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
