//! The O(n log n) solver for `min_{w in simplex} ||w||_2^2 + c ||w / eps||_inf^2`.
//!
//! With levels sorted non-decreasing, build
//!
//! ```text
//! r_1     = eps_1
//! r_{j+1} = min((sum_{i<=j} r_i^2 + c) / sum_{i<=j} r_i, eps_{j+1})
//! ```
//!
//! and normalize `r` onto the simplex.
//!
//! The l2-relaxed error bounds reduce to this form. On the simplex
//! `n ||w - 1/n||_2^2 = n ||w||_2^2 - 1`, so
//! `n ||w - 1/n||_2^2 + L^2 t^2 = n (||w||_2^2 + (L^2 / n) t^2) - 1` and the
//! minimizer is the one for `c = L^2 / n`. Likewise
//! `L ||w||_2^2 + L^2 t^2 = L (||w||_2^2 + L t^2)` is minimized at `c = L`.

use super::{unsort, Objective, ObjectiveParams, SolverReport};
use crate::error::{invalid, Result};
use crate::types::{PrivacyDemand, WeightVector};

/// Unnormalized sequence `r` for levels sorted non-decreasing.
///
/// All-public input yields a constant sequence.
pub fn turbo_sequence(c: f64, sorted_eps: &[f64]) -> Vec<f64> {
    let Some(&first) = sorted_eps.first() else {
        return Vec::new();
    };
    if first.is_infinite() {
        return vec![1.0; sorted_eps.len()];
    }
    let mut r = Vec::with_capacity(sorted_eps.len());
    r.push(first);
    let mut sum = first;
    let mut sum_sq = first * first;
    for (j, &e) in sorted_eps.iter().enumerate().skip(1) {
        let candidate = (sum_sq + c) / sum;
        if candidate < e {
            // appending the candidate leaves (sum_sq + c) / sum unchanged and
            // later levels are no smaller, so the rest of the sequence is flat
            r.resize(sorted_eps.len(), candidate.max(r[j - 1]));
            break;
        }
        sum += e;
        sum_sq += e * e;
        r.push(e);
    }
    r
}

pub fn solve_weights_turbo(c: f64, eps: &PrivacyDemand) -> Result<SolverReport> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(invalid(format!("c must be a finite non-negative real, got {c}")));
    }
    let (sorted, order) = eps.sorted_view();
    let r = turbo_sequence(c, &sorted);
    let weights = WeightVector::normalized(unsort(&r, &order))?;
    let objective_value = l2_sq(&weights) + c * weights.max_ratio(eps)?.powi(2);
    Ok(SolverReport {
        weights,
        objective_value,
        iterations: eps.len(),
        converged: true,
    })
}

/// Weights minimizing the l2-relaxed bound of the given setting.
///
/// The reported objective is the relaxed squared bound:
/// `n ||w - 1/n||_2^2 + L^2 t^2` for the correlated setting and
/// `min(n ||w - 1/n||_2^2, L ||w||_2^2) + L^2 t^2` for the uncorrelated one,
/// where the branch with the smaller value wins.
pub fn turbo_objective_weights(objective: Objective, p: &ObjectiveParams) -> Result<SolverReport> {
    let n = p.n() as f64;
    let l = p.log_factor();
    let spread_branch = |w: &WeightVector| -> Result<f64> {
        Ok(n * centered_l2_sq(w) + (l * w.max_ratio(&p.eps)?).powi(2))
    };

    let a = solve_weights_turbo(l * l / n, &p.eps)?;
    let a_value = spread_branch(&a.weights)?;
    match objective {
        Objective::Correlated => Ok(SolverReport {
            objective_value: a_value,
            ..a
        }),
        Objective::Uncorrelated => {
            let b = solve_weights_turbo(l, &p.eps)?;
            let b_value = l * l2_sq(&b.weights) + (l * b.weights.max_ratio(&p.eps)?).powi(2);
            let iterations = a.iterations + b.iterations;
            let (weights, objective_value) = if a_value <= b_value {
                (a.weights, a_value)
            } else {
                (b.weights, b_value)
            };
            Ok(SolverReport {
                weights,
                objective_value,
                iterations,
                converged: true,
            })
        }
    }
}

fn l2_sq(w: &WeightVector) -> f64 {
    w.as_slice().iter().map(|x| x * x).sum()
}

fn centered_l2_sq(w: &WeightVector) -> f64 {
    let u = 1.0 / w.len() as f64;
    w.as_slice().iter().map(|x| (x - u).powi(2)).sum()
}
