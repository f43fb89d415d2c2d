//! Python bindings: exact null supports, per-variable P-values, pi0
//! estimators, q-values and the Monte Carlo harness.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dqvalue_core::exact::{JiConfig, TestEngine, TestKind};
use dqvalue_core::io::parse_support;
use dqvalue_core::pi0::{estimate_pi0, Correction, Method, Pi0Estimate, Pi0Options, RandParams};
use dqvalue_core::qvalue::{adaptive_bh_reject, qvalues as core_qvalues};
use dqvalue_core::sim::run_monte_carlo_with_threads;
use dqvalue_core::{PValueSample, Rational, Support};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn test_kind(name: &str) -> PyResult<TestKind> {
    name.parse().map_err(value_error)
}

fn fraction(r: Rational) -> (i64, i64) {
    (*r.numer(), *r.denom())
}

/// Support points of a test's exact null as `(numerator, denominator)` pairs.
#[pyfunction]
#[pyo3(signature = (test, n1, n2 = 0))]
fn exact_support(test: &str, n1: usize, n2: usize) -> PyResult<Vec<(i64, i64)>> {
    let support = test_kind(test)?
        .support(n1, n2)
        .map_err(value_error)?
        .ok_or_else(|| PyValueError::new_err(format!("test {test} has continuous P-values")))?;
    Ok(support.points().iter().copied().map(fraction).collect())
}

/// P-value of one variable; the exact fraction is `None` for continuous tests.
#[pyfunction]
#[pyo3(signature = (test, x, y = Vec::new(), bandwidth = 1.0))]
fn pvalue(test: &str, x: Vec<f64>, y: Vec<f64>, bandwidth: f64) -> PyResult<(f64, Option<(i64, i64)>)> {
    let kind = test_kind(test)?;
    let ji = JiConfig::new(bandwidth).map_err(value_error)?;
    let engine = TestEngine::new(kind, x.len(), y.len(), ji).map_err(value_error)?;
    let p = engine.pvalue(&x, &y).map_err(value_error)?;
    Ok((p.value, engine.exact(&p).map(fraction)))
}

fn sample(pvalues: Vec<f64>, support: Option<&str>) -> PyResult<PValueSample> {
    match support {
        Some(spec) => {
            let s: Support = parse_support(spec).map_err(|e| PyValueError::new_err(format!("{e:#}")))?;
            PValueSample::with_support(&pvalues, s)
        }
        None => PValueSample::new(pvalues),
    }
    .map_err(value_error)
}

fn correction(name: &str) -> PyResult<Correction> {
    match name {
        "pseudo_count" => Ok(Correction::PseudoCount),
        "omitted" => Ok(Correction::Omitted),
        _ => Err(PyValueError::new_err(format!("unknown correction '{name}'"))),
    }
}

fn estimate(
    pvalues: Vec<f64>,
    method: &str,
    support: Option<&str>,
    seed: u64,
    corr: &str,
) -> PyResult<(PValueSample, Pi0Estimate)> {
    let method: Method = method.parse().map_err(value_error)?;
    let s = sample(pvalues, support)?;
    let options = Pi0Options {
        rand: RandParams {
            seed,
            ..RandParams::default()
        },
        correction: correction(corr)?,
        ..Pi0Options::default()
    };
    let est = estimate_pi0(method, &s, &options).map_err(value_error)?;
    Ok((s, est))
}

/// pi0 estimate as a dict with `value`, `raw`, `method`, `lambda_chosen` and
/// `warning`. `support` is a fraction list (`"1/35,8/35,27/35,1"`) or a test
/// null (`"ks:4:4"`).
#[pyfunction]
#[pyo3(signature = (pvalues, method = "SS", support = None, seed = 0, correction = "pseudo_count"))]
fn pi0<'py>(
    py: Python<'py>,
    pvalues: Vec<f64>,
    method: &str,
    support: Option<&str>,
    seed: u64,
    correction: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let (_, est) = estimate(pvalues, method, support, seed, correction)?;
    let d = PyDict::new(py);
    d.set_item("value", est.value)?;
    d.set_item("raw", est.raw)?;
    d.set_item("method", est.method.name())?;
    d.set_item("lambda_chosen", est.lambda_chosen)?;
    d.set_item("warning", est.warning)?;
    Ok(d)
}

/// q-values under a known pi0 (or one estimated with `method` when `pi0` is None).
#[pyfunction]
#[pyo3(signature = (pvalues, pi0 = None, method = "SS", support = None, seed = 0))]
fn qvalues(pvalues: Vec<f64>, pi0: Option<f64>, method: &str, support: Option<&str>, seed: u64) -> PyResult<Vec<f64>> {
    let (s, est) = match pi0 {
        Some(v) => (sample(pvalues, support)?, Pi0Estimate::known(v).map_err(value_error)?),
        None => estimate(pvalues, method, support, seed, "pseudo_count")?,
    };
    Ok(core_qvalues(&s, &est).qvalues)
}

/// Indices rejected by Benjamini-Hochberg at level `min(alpha / pi0, 1)`.
#[pyfunction]
#[pyo3(signature = (pvalues, alpha, pi0 = 1.0))]
fn adaptive_bh(pvalues: Vec<f64>, alpha: f64, pi0: f64) -> PyResult<Vec<usize>> {
    let s = PValueSample::new(pvalues).map_err(value_error)?;
    let est = Pi0Estimate::known(pi0).map_err(value_error)?;
    Ok(adaptive_bh_reject(&s, &est, alpha).map_err(value_error)?.rejected)
}

/// Runs a Monte Carlo study from a JSON config and returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (config, threads = None))]
fn simulate(py: Python<'_>, config: &str, threads: Option<usize>) -> PyResult<String> {
    let cfg = dqvalue_core::io::parse_config(config).map_err(|e| PyValueError::new_err(format!("{e:#}")))?;
    let report = py
        .detach(|| run_monte_carlo_with_threads(&cfg, threads))
        .map_err(value_error)?;
    serde_json::to_string(&report).map_err(value_error)
}

#[pymodule]
fn dqvalue(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(exact_support, m)?)?;
    m.add_function(wrap_pyfunction!(pvalue, m)?)?;
    m.add_function(wrap_pyfunction!(pi0, m)?)?;
    m.add_function(wrap_pyfunction!(qvalues, m)?)?;
    m.add_function(wrap_pyfunction!(adaptive_bh, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
