//! Experiment manifests.
//!
//! ```toml
//! seed = 7
//! setting = "correlated"
//! estimators = ["hpf", "hpf-a", "uni", "sm"]
//!
//! [task]
//! kind = "frequency"
//! k = 5
//!
//! [metric]
//! kind = "pac"
//! beta = 0.05
//!
//! [data]
//! source = "synthetic"
//! n = 10000
//! ```

use std::path::{Path, PathBuf};

use hetdp::evaluation::{DataShape, Occupancy, PrivacyLaw, SyntheticSpec};
use hetdp::{Estimator, Metric, Setting, Task};
use serde::{Deserialize, Serialize};

use crate::error::{io_error, CliError, Result};

/// Environment variable consulted when neither `--seed` nor the config sets one.
pub const SEED_ENV: &str = "HETDP_SEED";

/// Bins used to tie scalar records to privacy levels when none are given.
pub const DEFAULT_SCALAR_BINS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub task: Task,
    pub setting: Setting,
    pub metric: Metric,
    pub estimators: Vec<String>,
    pub data: DataSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Where reports go. Not echoed into the report itself.
    #[serde(default, skip_serializing)]
    pub output: OutputPaths,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub json: Option<PathBuf>,
    pub trials_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataSource {
    Synthetic {
        n: usize,
        /// Scalar tasks only: how many slices of `[0, 1]` the laws act on.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bins: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        privacy: Option<PrivacyLaw>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        occupancy: Option<Occupancy>,
    },
    File {
        path: PathBuf,
    },
}

impl BenchmarkConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        let mut config: Self =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        // data files are resolved relative to the manifest
        if let DataSource::File { path: data } = &mut config.data {
            if data.is_relative() {
                if let Some(dir) = path.parent() {
                    *data = dir.join(&*data);
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.parsed_estimators()?;
        if self.estimators.is_empty() {
            return Err(CliError::Config("no estimators requested".into()));
        }
        if let Metric::Pac { beta } = self.metric {
            Metric::pac(beta)?;
        }
        if self.trials == Some(0) {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        match &self.data {
            DataSource::File { path } if !path.exists() => Err(CliError::Config(format!(
                "data file {} does not exist",
                path.display()
            ))),
            DataSource::Synthetic { .. } => self.synthetic_spec().map(|_| ()),
            _ => Ok(()),
        }
    }

    pub fn parsed_estimators(&self) -> Result<Vec<Estimator>> {
        self.estimators
            .iter()
            .map(|s| s.parse::<Estimator>().map_err(CliError::from))
            .collect()
    }

    /// The synthetic generator spec, with per-setting defaults filled in.
    pub fn synthetic_spec(&self) -> Result<Option<SyntheticSpec>> {
        let DataSource::Synthetic {
            n,
            bins,
            privacy,
            occupancy,
        } = &self.data
        else {
            return Ok(None);
        };
        let shape = match self.task {
            Task::Frequency { k } => {
                if bins.is_some() {
                    return Err(CliError::Config("`bins` applies to mean tasks only".into()));
                }
                DataShape::Categorical { k }
            }
            Task::Mean => DataShape::Scalar {
                bins: bins.unwrap_or(DEFAULT_SCALAR_BINS),
            },
        };
        let mut spec = match self.setting {
            Setting::Correlated => SyntheticSpec::correlated(*n, shape),
            Setting::Uncorrelated => SyntheticSpec::uncorrelated(*n, shape),
        };
        if let Some(law) = privacy {
            spec.privacy = *law;
        }
        if let Some(occ) = occupancy {
            spec.occupancy = occ.clone();
        }
        if spec.n == 0 {
            return Err(CliError::Config("synthetic data needs n >= 1".into()));
        }
        Ok(Some(spec))
    }
}

/// `--seed` wins, then the config, then the environment, then 0.
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag.or(config) {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{SEED_ENV}={v} is not a 64-bit seed"))),
        Err(_) => Ok(0),
    }
}
