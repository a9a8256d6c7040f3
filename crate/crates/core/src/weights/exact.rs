//! Exact minimization of `r_C` and `r_U`.
//!
//! Fix the noise level `t = ||w / eps||_inf`. Users with `t * eps_i < 1/n`
//! must give up at least `1/n - t * eps_i` of weight, so the closest feasible
//! point to uniform is at l1 distance `2 D(t)` with
//! `D(t) = sum_i max(0, 1/n - t * eps_i)`. The squared objective becomes the
//! one-dimensional convex function `4 D(t)^2 + L^2 t^2`, which is quadratic
//! between consecutive breakpoints `1 / (n * eps_i)`; its minimum is found by
//! checking the clamped stationary point on every segment.
//!
//! For `r_U` the minimum of the two first-term branches is taken branch by
//! branch: the l1 branch is the problem above, the `L ||w||_2^2` branch is the
//! water-filling problem solved by [`super::solve_weights_turbo`] with `c = L`.

use super::{r_c, r_u, solve_weights_turbo, Objective, ObjectiveParams, SolverReport};
use crate::error::Result;
use crate::types::{PrivacyDemand, WeightVector};

pub fn solve_weights_exact(objective: Objective, p: &ObjectiveParams) -> Result<SolverReport> {
    let l = p.log_factor();
    let (capped, segments) = capped_l1_minimizer(&p.eps, l)?;
    match objective {
        Objective::Correlated => Ok(SolverReport {
            objective_value: r_c(&capped, p)?,
            weights: capped,
            iterations: segments,
            converged: true,
        }),
        Objective::Uncorrelated => {
            let spread = solve_weights_turbo(l, &p.eps)?;
            let a = r_u(&capped, p)?;
            let b = r_u(&spread.weights, p)?;
            let iterations = segments + spread.iterations;
            let (weights, objective_value) = if a <= b {
                (capped, a)
            } else {
                (spread.weights, b)
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

/// Minimizer of `||w - 1/n||_1^2 + l^2 ||w / eps||_inf^2` and the number of
/// segments examined.
fn capped_l1_minimizer(eps: &PrivacyDemand, l: f64) -> Result<(WeightVector, usize)> {
    let n = eps.len();
    let u = 1.0 / n as f64;
    let (sorted, _) = eps.sorted_view();
    let finite = sorted.iter().take_while(|e| e.is_finite()).count();
    if finite == 0 {
        return Ok((WeightVector::uniform(n)?, 0));
    }
    let has_public = finite < n;
    let t_min = if has_public {
        0.0
    } else {
        1.0 / sorted.iter().sum::<f64>()
    };

    // t at or above 1 / (n * eps_min): nobody is capped
    let mut best_t = u / sorted[0];
    let mut best = (l * best_t).powi(2);
    let mut segments = 1;
    let mut capped_eps = 0.0;
    for j in 1..=finite {
        capped_eps += sorted[j - 1];
        let capped_mass = j as f64 * u;
        let hi = u / sorted[j - 1];
        let lo = if j < finite { u / sorted[j] } else { 0.0 }.max(t_min);
        if lo > hi {
            continue;
        }
        segments += 1;
        let denom = 4.0 * capped_eps * capped_eps + l * l;
        let t = (4.0 * capped_eps * capped_mass / denom).clamp(lo, hi);
        let deficit = (capped_mass - capped_eps * t).max(0.0);
        let value = 4.0 * deficit * deficit + (l * t).powi(2);
        if value < best {
            best = value;
            best_t = t;
        }
    }
    Ok((weights_at_level(eps, best_t)?, segments))
}

/// Closest point to uniform (in l1) with `w_i <= t * eps_i`.
///
/// Capped users sit at their cap; the removed mass goes to public users in
/// equal shares or, when there are none, to the others in proportion to their
/// spare capacity.
fn weights_at_level(eps: &PrivacyDemand, t: f64) -> Result<WeightVector> {
    let n = eps.len();
    let u = 1.0 / n as f64;
    let mut w = vec![u; n];
    let mut spare = vec![0.0; n];
    let mut deficit = 0.0;
    let mut public = 0usize;
    for (i, &e) in eps.as_slice().iter().enumerate() {
        if e.is_infinite() {
            public += 1;
            continue;
        }
        let cap = t * e;
        if cap < u {
            w[i] = cap;
            deficit += u - cap;
        } else {
            spare[i] = cap - u;
        }
    }
    if deficit > 0.0 {
        if public > 0 {
            let share = deficit / public as f64;
            for (wi, &e) in w.iter_mut().zip(eps.as_slice()) {
                if e.is_infinite() {
                    *wi += share;
                }
            }
        } else {
            let total: f64 = spare.iter().sum();
            if total > 0.0 {
                for (wi, s) in w.iter_mut().zip(&spare) {
                    *wi += deficit * s / total;
                }
            }
        }
    }
    WeightVector::normalized(w)
}
