//! Weight selection.
//!
//! The exact solvers minimize the error bounds
//!
//! ```text
//! r_C(w)^2 = ||w - 1/n||_1^2 + L^2 ||w / eps||_inf^2
//! r_U(w)^2 = min(||w - 1/n||_1^2, L ||w||_2^2) + L^2 ||w / eps||_inf^2
//! ```
//!
//! over the probability simplex, with `L = max(0, ln(k_eff / beta))`.

mod closed_form;
mod exact;
mod ldp;
mod subgradient;
mod turbo;

use serde::{Deserialize, Serialize};

pub use closed_form::{hpfa_weights, prop_weights};
pub use exact::solve_weights_exact;
pub use ldp::{ldp_coefficient, ldp_weights, LdpTask};
pub use subgradient::{project_onto_simplex, solve_weights_subgradient, SubgradientConfig};
pub use turbo::{solve_weights_turbo, turbo_objective_weights, turbo_sequence};

use crate::error::{check_len, invalid, Result};
use crate::types::{ratio, Metric, PrivacyDemand, Task, WeightVector};

/// Which error bound a solver targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// `r_C`
    Correlated,
    /// `r_U`
    Uncorrelated,
}

impl From<crate::types::Setting> for Objective {
    fn from(s: crate::types::Setting) -> Self {
        match s {
            crate::types::Setting::Correlated => Self::Correlated,
            crate::types::Setting::Uncorrelated => Self::Uncorrelated,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveParams {
    pub k_eff: f64,
    pub beta: f64,
    pub eps: PrivacyDemand,
}

impl ObjectiveParams {
    pub fn new(k_eff: f64, beta: f64, eps: PrivacyDemand) -> Result<Self> {
        if !(k_eff >= 1.0 && k_eff.is_finite()) {
            return Err(invalid(format!("k_eff must be a real >= 1, got {k_eff}")));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(invalid(format!("beta must lie in (0, 1], got {beta}")));
        }
        Ok(Self { k_eff, beta, eps })
    }

    /// Parameters matching a task and error metric:
    ///
    /// | task      | PAC(beta)   | MSE      |
    /// |-----------|-------------|----------|
    /// | frequency | `(k, beta)` | `(k, 1)` |
    /// | mean      | `(1, beta)` | `(e, 1)` |
    pub fn for_task(task: Task, metric: Metric, eps: PrivacyDemand) -> Result<Self> {
        let (k_eff, beta) = match (task, metric) {
            (Task::Frequency { k }, Metric::Pac { beta }) => (k as f64, beta),
            (Task::Frequency { k }, Metric::Mse) => (k as f64, 1.0),
            (Task::Mean, Metric::Pac { beta }) => (1.0, beta),
            (Task::Mean, Metric::Mse) => (std::f64::consts::E, 1.0),
        };
        Self::new(k_eff, beta, eps)
    }

    /// `ln(k_eff / beta)`, clamped at zero.
    pub fn log_factor(&self) -> f64 {
        (self.k_eff / self.beta).ln().max(0.0)
    }

    pub fn n(&self) -> usize {
        self.eps.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub weights: WeightVector,
    pub objective_value: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct Terms {
    l1_sq: f64,
    l2_sq: f64,
    ratio_sq: f64,
}

fn terms(w: &WeightVector, eps: &PrivacyDemand) -> Result<Terms> {
    check_len(eps.len(), w.len())?;
    let u = 1.0 / w.len() as f64;
    let mut l1 = 0.0;
    let mut l2_sq = 0.0;
    let mut max_ratio = 0.0f64;
    for (&wi, &ei) in w.as_slice().iter().zip(eps.as_slice()) {
        l1 += (wi - u).abs();
        l2_sq += wi * wi;
        max_ratio = max_ratio.max(ratio(wi, ei));
    }
    Ok(Terms {
        l1_sq: l1 * l1,
        l2_sq,
        ratio_sq: max_ratio * max_ratio,
    })
}

/// Correlated-setting error bound `r_C(w, k, beta, eps)`.
pub fn r_c(w: &WeightVector, p: &ObjectiveParams) -> Result<f64> {
    let t = terms(w, &p.eps)?;
    let l = p.log_factor();
    Ok((t.l1_sq + l * l * t.ratio_sq).sqrt())
}

/// Uncorrelated-setting error bound `r_U(w, k, beta, eps)`.
pub fn r_u(w: &WeightVector, p: &ObjectiveParams) -> Result<f64> {
    let t = terms(w, &p.eps)?;
    let l = p.log_factor();
    Ok((t.l1_sq.min(l * t.l2_sq) + l * l * t.ratio_sq).sqrt())
}

pub fn evaluate(objective: Objective, w: &WeightVector, p: &ObjectiveParams) -> Result<f64> {
    match objective {
        Objective::Correlated => r_c(w, p),
        Objective::Uncorrelated => r_u(w, p),
    }
}

/// Puts values computed for sorted users back into user order.
pub(crate) fn unsort(sorted_values: &[f64], order: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; order.len()];
    for (j, &user) in order.iter().enumerate() {
        out[user] = sorted_values[j];
    }
    out
}
