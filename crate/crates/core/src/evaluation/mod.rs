//! Synthetic data, trial protocols and error aggregation.

mod synthetic;
mod trials;

pub use synthetic::{
    gen_correlated, gen_uncorrelated, generate, DataShape, Occupancy, PrivacyLaw, SyntheticSpec,
};
pub use trials::{
    default_trials, estimate_once, mse, pac_quantile, resolve_weights, run_trials, TrialReport,
    REPORTING_BETA,
};
