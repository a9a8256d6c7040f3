use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hetdp::evaluation::{DataShape, SyntheticSpec};
use hetdp_cli::error::io_error;
use hetdp_cli::{
    cmd_bench, cmd_gen, cmd_weights, resolve_seed, to_json, write_dataset, write_trial_csv,
    BenchOptions, BenchmarkConfig, CliError, Result,
};

#[derive(Parser)]
#[command(name = "hetdp", version, about = "Estimators under per-user privacy levels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for each estimator's weights and report per-user privacy.
    Weights {
        #[arg(short, long)]
        config: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        /// JSON destination (stdout if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run seeded Monte-Carlo trials for each estimator.
    Bench {
        #[arg(short, long)]
        config: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        threads: Option<usize>,
        /// JSON destination; overrides the config (stdout if neither is set).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Per-trial `trial,estimator,linf_error` CSV; overrides the config.
        #[arg(long)]
        trials_csv: Option<PathBuf>,
        /// Include every estimator's weight vector in the report.
        #[arg(long)]
        with_weights: bool,
    },
    /// Write a synthetic `value,epsilon` dataset.
    Gen {
        /// Take task, setting and data law from a manifest's synthetic source.
        #[arg(short, long, conflicts_with_all = ["k", "bins"])]
        config: Option<PathBuf>,
        #[arg(short, long)]
        n: Option<usize>,
        /// Number of categories (frequency data).
        #[arg(short, long)]
        k: Option<usize>,
        /// Scalar data in `[0, 1]` grouped into this many bins.
        #[arg(long, conflicts_with = "k")]
        bins: Option<usize>,
        #[arg(long, value_enum, default_value_t = SettingArg::Correlated)]
        setting: SettingArg,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct SeedArg {
    /// Root seed; falls back to the config, then $HETDP_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SettingArg {
    Correlated,
    Uncorrelated,
}

fn output_writer(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).map_err(io_error(p))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_text(path: Option<&PathBuf>, text: &str) -> Result<()> {
    let mut out = output_writer(path)?;
    out.write_all(text.as_bytes())
        .map_err(io_error(path.cloned().unwrap_or_else(|| "<stdout>".into())))
}

/// Ok(true) when every estimator produced a report.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Weights {
            config,
            seed,
            output,
        } => {
            let config = BenchmarkConfig::load(&config)?;
            let seed = resolve_seed(seed.seed, config.seed)?;
            let report = cmd_weights(&config, seed)?;
            write_text(output.as_ref().or(config.output.json.as_ref()), &to_json(&report)?)?;
            for e in report.estimators.iter().filter(|e| e.error.is_some()) {
                eprintln!("{}: {}", e.label, e.error.as_deref().unwrap_or_default());
            }
            Ok(report.all_ok())
        }
        Command::Bench {
            config,
            seed,
            trials,
            threads,
            output,
            trials_csv,
            with_weights,
        } => {
            let mut config = BenchmarkConfig::load(&config)?;
            if trials.is_some() {
                config.trials = trials;
            }
            let seed = resolve_seed(seed.seed, config.seed)?;
            let options = BenchOptions {
                threads,
                include_weights: with_weights,
            };
            let out = cmd_bench(&config, seed, &options)?;
            let json_path = output.as_ref().or(config.output.json.as_ref());
            write_text(json_path, &to_json(&out.report)?)?;
            if let Some(path) = trials_csv.as_ref().or(config.output.trials_csv.as_ref()) {
                write_trial_csv(File::create(path).map_err(io_error(path))?, &out.trial_rows)?;
            }
            if json_path.is_some() {
                eprint!("{}", hetdp_cli::commands::render_table(&out.report));
            }
            for e in out.report.results.iter().filter(|e| e.error.is_some()) {
                eprintln!("{}: {}", e.label, e.error.as_deref().unwrap_or_default());
            }
            Ok(out.report.all_ok())
        }
        Command::Gen {
            config,
            n,
            k,
            bins,
            setting,
            seed,
            output,
        } => {
            let (spec, config_seed) = match config {
                Some(path) => {
                    let config = BenchmarkConfig::load(&path)?;
                    let mut spec = config.synthetic_spec()?.ok_or_else(|| {
                        CliError::Config("gen needs a synthetic data source".into())
                    })?;
                    if let Some(n) = n {
                        spec.n = n;
                    }
                    (spec, config.seed)
                }
                None => {
                    let n = n.ok_or_else(|| CliError::Config("--n is required".into()))?;
                    let shape = match (k, bins) {
                        (Some(k), None) => DataShape::Categorical { k },
                        (None, Some(bins)) => DataShape::Scalar { bins },
                        _ => {
                            return Err(CliError::Config("give exactly one of --k or --bins".into()))
                        }
                    };
                    let spec = match setting {
                        SettingArg::Correlated => SyntheticSpec::correlated(n, shape),
                        SettingArg::Uncorrelated => SyntheticSpec::uncorrelated(n, shape),
                    };
                    (spec, None)
                }
            };
            let seed = resolve_seed(seed.seed, config_seed)?;
            let (data, eps) = cmd_gen(&spec, seed)?;
            write_dataset(output_writer(output.as_ref())?, &data, &eps)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
