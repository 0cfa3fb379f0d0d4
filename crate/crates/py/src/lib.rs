//! Python bindings.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use scenery_core::cli::batch::collect_batch;
use scenery_core::cli::config::{BatchMode, ExperimentConfig};
use scenery_core::cli::oracles::{verify_oracles as run_oracles, ForwardEvolver};
use scenery_core::paths::DeltaPaths;
use scenery_core::reconstruct::chain::StationaryDistribution;
use scenery_core::reconstruct::params::parse_delta;
use scenery_core::reconstruct::point::margin as point_margin;
use scenery_core::scenery::{equivalent as windows_equivalent, Scenery};
use scenery_core::walk::{self, IncrementDistribution, StateDistribution};
use scenery_core::Interval;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn config(text: &str) -> PyResult<ExperimentConfig> {
    ExperimentConfig::parse(text).map_err(err)
}

/// Law of `S_t` for the lazy simple walk from 0, as `(x, p)` pairs.
#[pyfunction]
fn state_distribution(epsilon: f64, t: usize) -> PyResult<Vec<(i64, f64)>> {
    let d = IncrementDistribution::lazy_simple(epsilon).map_err(err)?;
    let law = walk::state_distribution(&d, &StateDistribution::point(0), t, None).map_err(err)?;
    Ok(law.iter().filter(|(_, m)| **m > 0.0).map(|(x, m)| (x, *m)).collect())
}

/// `(P(S_r = n + 1) - P(S_r not in [-n, n + 1])) / 2` from `mu` on `[-n, n]`.
#[pyfunction]
fn margin(mu: Vec<(i64, f64)>, n: usize, r: usize, epsilon: f64) -> PyResult<f64> {
    let d = IncrementDistribution::lazy_simple(epsilon).map_err(err)?;
    let mu = StationaryDistribution::from_points(Interval::symmetric(n as i64), &mu).map_err(err)?;
    Ok(point_margin(&mu, &d, n, r))
}

/// Number of δ-paths of length `n` with jumps up to `max_jump`.
#[pyfunction]
fn delta_path_count(n: usize, delta: &str, max_jump: i64) -> PyResult<u128> {
    let delta = parse_delta(delta).map_err(err)?;
    Ok(DeltaPaths::new(n, delta, 0, max_jump).map_err(err)?.count())
}

/// Whether two digit strings centred at 0 are equal up to reflection.
#[pyfunction]
fn equivalent(a: &str, b: &str) -> PyResult<bool> {
    let parse = |s: &str| Scenery::from_digits(-((s.len() / 2) as i64), s).map_err(err);
    windows_equivalent(&parse(a)?, &parse(b)?).map_err(err)
}

/// Runs the batch described by a config text; returns JSON records and the JSON summary.
#[pyfunction]
#[pyo3(signature = (config_text, mode = "point"))]
fn run_batch(py: Python<'_>, config_text: &str, mode: &str) -> PyResult<(Vec<String>, String)> {
    let mut cfg = config(config_text)?;
    cfg.mode = match mode {
        "point" => BatchMode::Point,
        "whole" => BatchMode::Whole,
        other => return Err(err(format!("unknown mode {other:?}"))),
    };
    let (recs, summary) = py.detach(|| collect_batch(&cfg)).map_err(err)?;
    let lines = recs.iter().map(|r| r.to_line().trim_end().to_string()).collect();
    Ok((lines, serde_json::to_string(&summary).map_err(err)?))
}

/// Exact checks as `(name, expected, computed, passed)` tuples.
#[pyfunction]
fn verify_oracles() -> Vec<(String, String, String, bool)> {
    run_oracles(&ForwardEvolver)
        .checks
        .into_iter()
        .map(|c| (c.name, c.expected, c.computed, c.pass))
        .collect()
}

#[pymodule]
fn scenery_rs(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(state_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(margin, m)?)?;
    m.add_function(wrap_pyfunction!(delta_path_count, m)?)?;
    m.add_function(wrap_pyfunction!(equivalent, m)?)?;
    m.add_function(wrap_pyfunction!(run_batch, m)?)?;
    m.add_function(wrap_pyfunction!(verify_oracles, m)?)?;
    Ok(())
}
