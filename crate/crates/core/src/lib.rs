//! Frequency and mean estimation when every user picks their own privacy
//! level.
//!
//! The central mechanism releases a weighted histogram (or weighted mean)
//! plus Laplace noise scaled by `max_i w_i / eps_i`. The [`weights`] module
//! chooses the weights; [`baselines`] holds the comparison mechanisms and
//! [`evaluation`] runs seeded Monte-Carlo trials over them.

// `!(x > 0.0)` style checks are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod evaluation;
pub mod mechanisms;
pub mod rng;
pub mod stats;
pub mod types;
pub mod weights;

pub use error::{Error, Result};
pub use rng::{laplace_sample, RandomSource};
pub use types::{
    Dataset, EmpiricalStatistic, Estimator, EstimatorSpec, Metric, PrivacyDemand, Setting, Task,
    WeightVector,
};
