//! Python bindings. Privacy levels are plain floats (`float("inf")` for a
//! public user); categorical records are 1-indexed ints.

use hetdp::evaluation::{self, DataShape, SyntheticSpec};
use hetdp::mechanisms;
use hetdp::weights::{self, LdpTask, Objective, ObjectiveParams, SubgradientConfig};
use hetdp::{
    Dataset, Estimator, EstimatorSpec, Metric, PrivacyDemand, RandomSource, Setting, Task,
    WeightVector,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(err: hetdp::Error) -> PyErr {
    match err {
        hetdp::Error::NotConverged { .. } => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn demand(eps: Vec<f64>) -> PyResult<PrivacyDemand> {
    PrivacyDemand::new(eps).map_err(to_py)
}

fn weight_vector(w: Vec<f64>) -> PyResult<WeightVector> {
    WeightVector::new(w).map_err(to_py)
}

fn setting(name: &str) -> PyResult<Setting> {
    match name {
        "correlated" => Ok(Setting::Correlated),
        "uncorrelated" => Ok(Setting::Uncorrelated),
        other => Err(PyValueError::new_err(format!("unknown setting `{other}`"))),
    }
}

fn metric(beta: Option<f64>) -> PyResult<Metric> {
    match beta {
        Some(b) => Metric::pac(b).map_err(to_py),
        None => Ok(Metric::Mse),
    }
}

fn params(eps: Vec<f64>, k_eff: f64, beta: f64) -> PyResult<ObjectiveParams> {
    ObjectiveParams::new(k_eff, beta, demand(eps)?).map_err(to_py)
}

/// Categorical if `k` is given, otherwise scalar values in `[0, 1]`.
fn dataset(records: &Bound<'_, PyAny>, k: Option<usize>) -> PyResult<Dataset> {
    match k {
        Some(k) => Dataset::categorical(k, records.extract()?),
        None => Dataset::scalar(records.extract()?),
    }
    .map_err(to_py)
}

#[pyclass(name = "SolverReport", frozen, get_all)]
struct PySolverReport {
    weights: Vec<f64>,
    objective_value: f64,
    iterations: usize,
    converged: bool,
}

#[pymethods]
impl PySolverReport {
    fn __repr__(&self) -> String {
        format!(
            "SolverReport(objective_value={}, iterations={}, converged={})",
            self.objective_value,
            self.iterations,
            if self.converged { "True" } else { "False" }
        )
    }
}

impl From<weights::SolverReport> for PySolverReport {
    fn from(r: weights::SolverReport) -> Self {
        Self {
            weights: r.weights.into_vec(),
            objective_value: r.objective_value,
            iterations: r.iterations,
            converged: r.converged,
        }
    }
}

#[pyclass(name = "TrialReport", frozen, get_all)]
struct PyTrialReport {
    errors: Vec<f64>,
    beta: f64,
    pac_quantile: f64,
    mse: f64,
    noise_scale: f64,
    seed: u64,
    trials: usize,
}

#[pymethods]
impl PyTrialReport {
    fn __repr__(&self) -> String {
        format!(
            "TrialReport(trials={}, pac_quantile={}, mse={})",
            self.trials, self.pac_quantile, self.mse
        )
    }
}

/// Weights minimizing the correlated or uncorrelated error bound.
///
/// `method` is `"exact"`, `"turbo"` or `"subgradient"`.
#[pyfunction]
#[pyo3(signature = (eps, k_eff, beta, setting = "correlated", method = "exact"))]
fn solve_weights(
    eps: Vec<f64>,
    k_eff: f64,
    beta: f64,
    setting: &str,
    method: &str,
) -> PyResult<PySolverReport> {
    let objective = Objective::from(self::setting(setting)?);
    let p = params(eps, k_eff, beta)?;
    let report = match method {
        "exact" => weights::solve_weights_exact(objective, &p),
        "turbo" => weights::turbo_objective_weights(objective, &p),
        "subgradient" => weights::solve_weights_subgradient(objective, &p, &SubgradientConfig::default()),
        other => return Err(PyValueError::new_err(format!("unknown method `{other}`"))),
    };
    report.map(Into::into).map_err(to_py)
}

/// Minimizer of `||w||^2 + c ||w / eps||_inf^2` over the simplex.
#[pyfunction]
fn solve_weights_turbo(c: f64, eps: Vec<f64>) -> PyResult<PySolverReport> {
    weights::solve_weights_turbo(c, &demand(eps)?)
        .map(Into::into)
        .map_err(to_py)
}

/// Error bound of `w` in the given setting.
#[pyfunction]
#[pyo3(signature = (w, eps, k_eff, beta, setting = "correlated"))]
fn objective(w: Vec<f64>, eps: Vec<f64>, k_eff: f64, beta: f64, setting: &str) -> PyResult<f64> {
    let objective = Objective::from(self::setting(setting)?);
    weights::evaluate(objective, &weight_vector(w)?, &params(eps, k_eff, beta)?).map_err(to_py)
}

#[pyfunction]
fn hpfa_weights(eps: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(weights::hpfa_weights(&demand(eps)?).into_vec())
}

#[pyfunction]
fn prop_weights(eps: Vec<f64>) -> PyResult<Vec<f64>> {
    weights::prop_weights(&demand(eps)?)
        .map(WeightVector::into_vec)
        .map_err(to_py)
}

/// Server weights for the local pipelines; `task` is `"frequency"` or `"mean"`.
#[pyfunction]
#[pyo3(signature = (eps, k_eff, beta, setting = "correlated", task = "frequency"))]
fn ldp_weights(
    eps: Vec<f64>,
    k_eff: f64,
    beta: f64,
    setting: &str,
    task: &str,
) -> PyResult<PySolverReport> {
    let task = match task {
        "frequency" => LdpTask::Frequency,
        "mean" => LdpTask::Mean,
        other => return Err(PyValueError::new_err(format!("unknown task `{other}`"))),
    };
    weights::ldp_weights(self::setting(setting)?, &params(eps, k_eff, beta)?, task)
        .map(Into::into)
        .map_err(to_py)
}

/// Per-user worst-case log density ratio of the central release.
#[pyfunction]
#[pyo3(signature = (w, eps, k = None))]
fn dp_ratio_audit(w: Vec<f64>, eps: Vec<f64>, k: Option<usize>) -> PyResult<Vec<f64>> {
    let task = k.map_or(Task::Mean, |k| Task::Frequency { k });
    mechanisms::dp_ratio_audit(&weight_vector(w)?, &demand(eps)?, task).map_err(to_py)
}

#[pyfunction]
fn free_privacy_audit(w: Vec<f64>, eps: Vec<f64>) -> PyResult<Vec<f64>> {
    mechanisms::free_privacy_audit(&weight_vector(w)?, &demand(eps)?).map_err(to_py)
}

/// One weighted release: a clamped histogram if `k` is given, else a mean.
#[pyfunction]
#[pyo3(signature = (records, w, eps, seed, k = None))]
fn release(
    records: &Bound<'_, PyAny>,
    w: Vec<f64>,
    eps: Vec<f64>,
    seed: u64,
    k: Option<usize>,
) -> PyResult<Vec<f64>> {
    let data = dataset(records, k)?;
    let mut rng = RandomSource::new(seed);
    let out = mechanisms::weighted_release(&data, &weight_vector(w)?, &demand(eps)?, &mut rng)
        .map_err(to_py)?;
    Ok(out.estimate.components().to_vec())
}

/// Synthetic `(records, eps)`. Give `k` for categories or `bins` for scalars.
#[pyfunction]
#[pyo3(signature = (n, seed, k = None, bins = None, setting = "correlated"))]
fn generate(
    n: usize,
    seed: u64,
    k: Option<usize>,
    bins: Option<usize>,
    setting: &str,
    py: Python<'_>,
) -> PyResult<(Py<PyAny>, Vec<f64>)> {
    let shape = match (k, bins) {
        (Some(k), None) => DataShape::Categorical { k },
        (None, Some(bins)) => DataShape::Scalar { bins },
        _ => return Err(PyValueError::new_err("give exactly one of k or bins")),
    };
    let spec = match self::setting(setting)? {
        Setting::Correlated => SyntheticSpec::correlated(n, shape),
        Setting::Uncorrelated => SyntheticSpec::uncorrelated(n, shape),
    };
    let (data, eps) = evaluation::generate(&spec, &mut RandomSource::new(seed)).map_err(to_py)?;
    let records = match data {
        Dataset::Categorical { records, .. } => records.into_pyobject(py)?.into_any().unbind(),
        Dataset::Scalar { records } => records.into_pyobject(py)?.into_any().unbind(),
    };
    Ok((records, eps.as_slice().to_vec()))
}

/// Seeded Monte-Carlo trials of one estimator. `beta=None` selects MSE
/// weights (the PAC column then uses beta = 0.05).
#[pyfunction]
#[pyo3(signature = (records, eps, estimator, trials, seed, k = None, setting = "correlated", beta = Some(0.05)))]
#[allow(clippy::too_many_arguments)]
fn run_trials(
    records: &Bound<'_, PyAny>,
    eps: Vec<f64>,
    estimator: &str,
    trials: usize,
    seed: u64,
    k: Option<usize>,
    setting: &str,
    beta: Option<f64>,
    py: Python<'_>,
) -> PyResult<PyTrialReport> {
    let data = dataset(records, k)?;
    let eps = demand(eps)?;
    let estimator: Estimator = estimator.parse().map_err(to_py)?;
    let spec = EstimatorSpec::new(self::setting(setting)?, metric(beta)?, estimator).map_err(to_py)?;
    let report = py
        .detach(|| evaluation::run_trials(&data, &eps, &spec, trials, &RandomSource::new(seed)))
        .map_err(to_py)?;
    Ok(PyTrialReport {
        errors: report.errors,
        beta: report.beta,
        pac_quantile: report.pac_quantile,
        mse: report.mse,
        noise_scale: report.noise_scale,
        seed: report.seed,
        trials: report.trials,
    })
}

#[pyfunction]
fn pac_quantile(errors: Vec<f64>, beta: f64) -> PyResult<f64> {
    evaluation::pac_quantile(&errors, beta).map_err(to_py)
}

#[pyfunction]
fn mse(errors: Vec<f64>) -> PyResult<f64> {
    evaluation::mse(&errors).map_err(to_py)
}

#[pymodule]
fn pyhetdp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySolverReport>()?;
    m.add_class::<PyTrialReport>()?;
    m.add_function(wrap_pyfunction!(solve_weights, m)?)?;
    m.add_function(wrap_pyfunction!(solve_weights_turbo, m)?)?;
    m.add_function(wrap_pyfunction!(objective, m)?)?;
    m.add_function(wrap_pyfunction!(hpfa_weights, m)?)?;
    m.add_function(wrap_pyfunction!(prop_weights, m)?)?;
    m.add_function(wrap_pyfunction!(ldp_weights, m)?)?;
    m.add_function(wrap_pyfunction!(dp_ratio_audit, m)?)?;
    m.add_function(wrap_pyfunction!(free_privacy_audit, m)?)?;
    m.add_function(wrap_pyfunction!(release, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(run_trials, m)?)?;
    m.add_function(wrap_pyfunction!(pac_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(mse, m)?)?;
    Ok(())
}
