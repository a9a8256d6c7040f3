use hetdp::evaluation::{default_trials, generate, resolve_weights, run_trials, SyntheticSpec};
use hetdp::mechanisms::free_privacy_audit;
use hetdp::weights::SolverReport;
use hetdp::{
    Dataset, Estimator, EstimatorSpec, Metric, PrivacyDemand, RandomSource, Task, WeightVector,
};
use serde::{Deserialize, Serialize};

use crate::config::{BenchmarkConfig, DataSource};
use crate::dataset_csv::ingest_csv;
use crate::error::{CliError, Result};
use crate::real::{reals, Real};

/// Bumped whenever a report field changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;

/// Substream of the root seed that generates synthetic data. Estimator
/// trials use `1 + ` their position in [`Estimator::ALL`].
const DATA_STREAM: u64 = 0;

fn estimator_stream(e: Estimator) -> u64 {
    1 + Estimator::ALL.iter().position(|&x| x == e).expect("registered") as u64
}

/// The dataset and demand named by the config.
pub fn load_data(config: &BenchmarkConfig, seed: u64) -> Result<(Dataset, PrivacyDemand)> {
    match &config.data {
        DataSource::File { path } => ingest_csv(path, config.task),
        DataSource::Synthetic { .. } => {
            let spec = config.synthetic_spec()?.expect("synthetic source");
            cmd_gen(&spec, seed)
        }
    }
}

pub fn cmd_gen(spec: &SyntheticSpec, seed: u64) -> Result<(Dataset, PrivacyDemand)> {
    let mut rng = RandomSource::new(seed).substream(DATA_STREAM);
    Ok(generate(spec, &mut rng)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsEntry {
    pub estimator: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub weights: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub noise_scale: Option<Real>,
    /// Level each user actually receives, `w_i / max_j (w_j / eps_j)`.
    pub effective_privacy: Option<Vec<Real>>,
    /// Demanded minus effective level.
    pub slack: Option<Vec<Real>>,
    pub solver: Option<SolverDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsReport {
    pub schema_version: u32,
    pub config: BenchmarkConfig,
    pub n: usize,
    pub epsilon: Vec<Real>,
    pub estimators: Vec<WeightsEntry>,
}

impl WeightsReport {
    pub fn all_ok(&self) -> bool {
        self.estimators.iter().all(|e| e.error.is_none())
    }
}

fn noise_scale(task: Task, w: &WeightVector, eps: &PrivacyDemand) -> hetdp::Result<f64> {
    let r = w.max_ratio(eps)?;
    Ok(match task {
        Task::Frequency { .. } => 2.0 * r,
        Task::Mean => r,
    })
}

fn weights_entry(
    config: &BenchmarkConfig,
    estimator: Estimator,
    eps: &PrivacyDemand,
) -> hetdp::Result<WeightsEntry> {
    let mut entry = WeightsEntry {
        estimator: estimator.to_string(),
        label: estimator.label(config.task).to_owned(),
        error: None,
        weights: None,
        objective: None,
        noise_scale: None,
        effective_privacy: None,
        slack: None,
        solver: None,
    };
    let spec = EstimatorSpec::new(config.setting, config.metric, estimator)?;
    let resolved: Option<(WeightVector, PrivacyDemand, Option<SolverReport>)> = match estimator {
        Estimator::Sm => None,
        Estimator::Uni => Some((
            WeightVector::uniform(eps.len())?,
            PrivacyDemand::homogeneous(eps.len(), eps.min())?,
            None,
        )),
        _ => {
            let report = resolve_weights(config.task, &spec, eps)?.expect("weighted estimator");
            Some((report.weights.clone(), eps.clone(), Some(report)))
        }
    };
    let Some((w, enforced, report)) = resolved else {
        return Ok(entry);
    };

    let effective = if estimator == Estimator::Ldp {
        // each client randomizes at exactly its own level
        eps.as_slice().to_vec()
    } else {
        entry.noise_scale = Some(Real(noise_scale(config.task, &w, &enforced)?));
        free_privacy_audit(&w, &enforced)?
    };
    let slack: Vec<f64> = eps
        .as_slice()
        .iter()
        .zip(&effective)
        .map(|(&e, &f)| if e.is_infinite() { f64::INFINITY } else { e - f })
        .collect();
    entry.objective = report.as_ref().map(|r| r.objective_value);
    entry.solver = report.as_ref().map(|r| SolverDiagnostics {
        iterations: r.iterations,
        converged: r.converged,
    });
    entry.weights = Some(w.into_vec());
    entry.effective_privacy = Some(reals(&effective));
    entry.slack = Some(reals(&slack));
    Ok(entry)
}

/// Weights, objective and per-user privacy accounting for every requested
/// estimator. A failing estimator is reported in its own entry.
pub fn cmd_weights(config: &BenchmarkConfig, seed: u64) -> Result<WeightsReport> {
    let estimators = config.parsed_estimators()?;
    let (_, eps) = load_data(config, seed)?;
    let mut echo = config.clone();
    echo.seed = Some(seed);
    let entries = estimators
        .into_iter()
        .map(|e| {
            weights_entry(config, e, &eps).unwrap_or_else(|err| WeightsEntry {
                estimator: e.to_string(),
                label: e.label(config.task).to_owned(),
                error: Some(err.to_string()),
                weights: None,
                objective: None,
                noise_scale: None,
                effective_privacy: None,
                slack: None,
                solver: None,
            })
        })
        .collect();
    Ok(WeightsReport {
        schema_version: SCHEMA_VERSION,
        config: echo,
        n: eps.len(),
        epsilon: reals(eps.as_slice()),
        estimators: entries,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub estimator: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub noise_scale: Option<f64>,
    pub pac_quantile: Option<f64>,
    pub mse: Option<f64>,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    pub value: Option<f64>,
}

/// One row per estimator holding the configured metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub metric: Metric,
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub config: BenchmarkConfig,
    pub n: usize,
    pub results: Vec<BenchEntry>,
    pub table: ComparisonTable,
}

impl BenchReport {
    pub fn all_ok(&self) -> bool {
        self.results.iter().all(|e| e.error.is_none())
    }
}

/// One line of the per-trial CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub estimator: String,
    pub linf_error: f64,
}

#[derive(Debug, Clone, Default)]
pub struct BenchOptions {
    /// Worker threads for the trials; `None` uses rayon's default pool.
    pub threads: Option<usize>,
    /// Echo each estimator's weight vector in the report.
    pub include_weights: bool,
}

pub struct BenchOutput {
    pub report: BenchReport,
    pub trial_rows: Vec<TrialRow>,
}

/// Runs every requested estimator on the same data and demand. Each
/// estimator's trials draw from their own substream of `seed`, so results do
/// not depend on the estimator list or on the thread count.
pub fn cmd_bench(config: &BenchmarkConfig, seed: u64, options: &BenchOptions) -> Result<BenchOutput> {
    match options.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(|| bench(config, seed, options)),
        None => bench(config, seed, options),
    }
}

fn bench(config: &BenchmarkConfig, seed: u64, options: &BenchOptions) -> Result<BenchOutput> {
    let estimators = config.parsed_estimators()?;
    let (data, eps) = load_data(config, seed)?;
    let trials = config
        .trials
        .unwrap_or_else(|| default_trials(config.setting, data.len()));
    let mut echo = config.clone();
    echo.seed = Some(seed);
    echo.trials = Some(trials);

    let root = RandomSource::new(seed);
    let mut results = Vec::new();
    let mut trial_rows = Vec::new();
    for estimator in estimators {
        let outcome = EstimatorSpec::new(config.setting, config.metric, estimator).and_then(|spec| {
            let report = run_trials(&data, &eps, &spec, trials, &root.substream(estimator_stream(estimator)))?;
            let weights = if options.include_weights {
                resolve_weights(config.task, &spec, &eps)?.map(|r| r.weights.into_vec())
            } else {
                None
            };
            Ok((report, weights))
        });
        let mut entry = BenchEntry {
            estimator: estimator.to_string(),
            label: estimator.label(config.task).to_owned(),
            error: None,
            weights: None,
            noise_scale: None,
            pac_quantile: None,
            mse: None,
            trials,
            seed,
        };
        match outcome {
            Ok((report, weights)) => {
                trial_rows.extend(report.errors.iter().enumerate().map(|(t, &e)| TrialRow {
                    trial: t,
                    estimator: estimator.to_string(),
                    linf_error: e,
                }));
                entry.weights = weights;
                entry.noise_scale = Some(report.noise_scale);
                entry.pac_quantile = Some(report.pac_quantile);
                entry.mse = Some(report.mse);
            }
            Err(err) => entry.error = Some(err.to_string()),
        }
        results.push(entry);
    }

    let rows = results
        .iter()
        .map(|r| TableRow {
            label: r.label.clone(),
            value: match config.metric {
                Metric::Pac { .. } => r.pac_quantile,
                Metric::Mse => r.mse,
            },
        })
        .collect();
    Ok(BenchOutput {
        report: BenchReport {
            schema_version: SCHEMA_VERSION,
            config: echo,
            n: data.len(),
            results,
            table: ComparisonTable {
                metric: config.metric,
                rows,
            },
        },
        trial_rows,
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_trial_csv(out: impl std::io::Write, rows: &[TrialRow]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(out);
    for row in rows {
        csv.serialize(row)?;
    }
    if rows.is_empty() {
        csv.write_record(["trial", "estimator", "linf_error"])?;
    }
    csv.flush().map_err(crate::error::io_error("<trial csv>"))?;
    Ok(())
}

/// Text rendering of the comparison table for terminals.
pub fn render_table(report: &BenchReport) -> String {
    let metric = match report.table.metric {
        Metric::Pac { beta } => format!("PAC quantile (beta = {beta})"),
        Metric::Mse => "MSE".to_owned(),
    };
    let mut out = format!("{metric}\n");
    for row in &report.table.rows {
        let value = row
            .value
            .map(|v| format!("{v:.4}"))
            .unwrap_or_else(|| "failed".to_owned());
        out.push_str(&format!("  {:<8} {value}\n", row.label));
    }
    out
}
