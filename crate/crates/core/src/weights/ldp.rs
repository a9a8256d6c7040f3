//! Server-side weights for the local-DP baselines.
//!
//! For k-RAPPOR reports the per-user noise variance scales with
//! `coth(eps_i / 4) / eps_i`. Replacing the l1 deviation by `n` times the l2
//! deviation gives the separable surrogate
//!
//! ```text
//! n ||w - 1/n||_2^2 + L sum_i a_i w_i^2,   a_i = coth(eps_i / 4) / eps_i
//! ```
//!
//! whose simplex minimizer is `w_i ∝ 1 / (n + L a_i)`. The uncorrelated variant
//! also considers `L ||w||_2^2 + L sum_i a_i w_i^2`, minimized by
//! `w_i ∝ 1 / (1 + a_i)`, and keeps the better branch. Here `L = ln(k / beta)`.
//!
//! Local Laplace reports for the mean use the same weights as the central
//! mean estimator's PAC variants.

use super::{solve_weights_exact, Objective, ObjectiveParams, SolverReport};
use crate::error::Result;
use crate::types::{Setting, WeightVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdpTask {
    Frequency,
    Mean,
}

/// `coth(eps / 4) / eps`, zero for a public user.
pub fn ldp_coefficient(eps: f64) -> f64 {
    if eps.is_infinite() {
        0.0
    } else {
        1.0 / ((eps / 4.0).tanh() * eps)
    }
}

pub fn ldp_weights(setting: Setting, p: &ObjectiveParams, task: LdpTask) -> Result<SolverReport> {
    match task {
        LdpTask::Mean => {
            let mean_params = ObjectiveParams::new(1.0, p.beta, p.eps.clone())?;
            solve_weights_exact(Objective::from(setting), &mean_params)
        }
        LdpTask::Frequency => frequency_weights(setting, p),
    }
}

fn frequency_weights(setting: Setting, p: &ObjectiveParams) -> Result<SolverReport> {
    let n = p.n() as f64;
    let l = p.log_factor();
    let coef: Vec<f64> = p.eps.as_slice().iter().map(|&e| ldp_coefficient(e)).collect();
    let noise = |w: &WeightVector| -> f64 {
        w.as_slice().iter().zip(&coef).map(|(x, a)| a * x * x).sum::<f64>() * l
    };
    let l2_sq = |w: &WeightVector| -> f64 { w.as_slice().iter().map(|x| x * x).sum() };

    let a = WeightVector::normalized(coef.iter().map(|c| 1.0 / (n + l * c)).collect())?;
    let a_value = n * l2_sq(&a) - 1.0 + noise(&a);
    let (weights, objective_value) = match setting {
        Setting::Correlated => (a, a_value),
        Setting::Uncorrelated => {
            let b = WeightVector::normalized(coef.iter().map(|c| 1.0 / (1.0 + c)).collect())?;
            let b_value = l * l2_sq(&b) + noise(&b);
            if a_value <= b_value {
                (a, a_value)
            } else {
                (b, b_value)
            }
        }
    };
    Ok(SolverReport {
        weights,
        objective_value: objective_value.max(0.0),
        iterations: 1,
        converged: true,
    })
}
