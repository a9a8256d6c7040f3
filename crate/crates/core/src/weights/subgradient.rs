//! Projected subgradient descent on the simplex.
//!
//! A general first-order route to the same minimizers as
//! [`super::solve_weights_exact`]. It only needs objective values and
//! subgradients, so it doubles as an independent cross-check of the
//! breakpoint search.

use super::{evaluate, Objective, ObjectiveParams, SolverReport};
use crate::error::{Error, Result};
use crate::types::{ratio, WeightVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubgradientConfig {
    /// Step numerator `a` in `a / sqrt(t)`, applied to the normalized subgradient.
    pub step: f64,
    pub max_iterations: usize,
    /// Convergence is declared when the best value improves by less than
    /// `tolerance` over `window` iterations.
    pub window: usize,
    pub tolerance: f64,
    /// Return `Err(NotConverged)` instead of a report flagged unconverged.
    pub strict: bool,
}

impl Default for SubgradientConfig {
    fn default() -> Self {
        Self {
            step: 0.1,
            max_iterations: 200_000,
            window: 20_000,
            tolerance: 1e-12,
            strict: false,
        }
    }
}

/// Euclidean projection onto the probability simplex (sort and threshold).
pub fn project_onto_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &x) in sorted.iter().enumerate() {
        cumsum += x;
        let candidate = (cumsum - 1.0) / (j + 1) as f64;
        if x - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

#[derive(Clone, Copy)]
enum Branch {
    /// `||w - 1/n||_1^2 + L^2 t^2`
    Deviation,
    /// `L ||w||_2^2 + L^2 t^2`
    Norm,
}

pub fn solve_weights_subgradient(
    objective: Objective,
    p: &ObjectiveParams,
    config: &SubgradientConfig,
) -> Result<SolverReport> {
    let first = descend(Branch::Deviation, p, config)?;
    let report = match objective {
        Objective::Correlated => SolverReport {
            objective_value: evaluate(objective, &first.weights, p)?,
            ..first
        },
        Objective::Uncorrelated => {
            let second = descend(Branch::Norm, p, config)?;
            let a = evaluate(objective, &first.weights, p)?;
            let b = evaluate(objective, &second.weights, p)?;
            let iterations = first.iterations + second.iterations;
            let converged = first.converged && second.converged;
            let (weights, objective_value) = if a <= b {
                (first.weights, a)
            } else {
                (second.weights, b)
            };
            SolverReport {
                weights,
                objective_value,
                iterations,
                converged,
            }
        }
    };
    if config.strict && !report.converged {
        return Err(Error::NotConverged {
            iterations: report.iterations,
        });
    }
    Ok(report)
}

fn descend(branch: Branch, p: &ObjectiveParams, config: &SubgradientConfig) -> Result<SolverReport> {
    let n = p.n();
    let u = 1.0 / n as f64;
    let l = p.log_factor();
    let eps = p.eps.as_slice();

    let value_and_subgradient = |w: &[f64], g: &mut [f64]| -> f64 {
        // lowest index wins ties in the max ratio
        let mut arg = None;
        let mut t = 0.0;
        for (i, (&wi, &ei)) in w.iter().zip(eps).enumerate() {
            if ei.is_finite() && (arg.is_none() || ratio(wi, ei) > t) {
                t = ratio(wi, ei);
                arg = Some(i);
            }
        }
        let first = match branch {
            Branch::Deviation => {
                let l1: f64 = w.iter().map(|x| (x - u).abs()).sum();
                for (gi, &wi) in g.iter_mut().zip(w) {
                    let d = wi - u;
                    *gi = if d > 0.0 {
                        2.0 * l1
                    } else if d < 0.0 {
                        -2.0 * l1
                    } else {
                        0.0
                    };
                }
                l1 * l1
            }
            Branch::Norm => {
                for (gi, &wi) in g.iter_mut().zip(w) {
                    *gi = 2.0 * l * wi;
                }
                l * w.iter().map(|x| x * x).sum::<f64>()
            }
        };
        if let Some(i) = arg {
            g[i] += 2.0 * l * l * t / eps[i];
        }
        first + (l * t).powi(2)
    };

    let mut w = vec![u; n];
    let mut g = vec![0.0; n];
    let mut best_w = w.clone();
    let mut best = f64::INFINITY;
    let mut checkpoint = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=config.max_iterations {
        iterations = it;
        let value = value_and_subgradient(&w, &mut g);
        if value < best {
            best = value;
            best_w.copy_from_slice(&w);
        }
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            converged = true;
            break;
        }
        if it % config.window == 0 {
            if checkpoint - best < config.tolerance {
                converged = true;
                break;
            }
            checkpoint = best;
        }
        let step = config.step / (it as f64).sqrt() / norm;
        let moved: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi - step * gi).collect();
        w = project_onto_simplex(&moved);
    }

    Ok(SolverReport {
        weights: WeightVector::normalized(best_w)?,
        objective_value: best.sqrt(),
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::PrivacyDemand;
    use crate::weights::solve_weights_exact;
    use proptest::prelude::*;

    #[test]
    fn projection_examples() {
        assert_eq!(project_onto_simplex(&[0.5, 0.5]), vec![0.5, 0.5]);
        assert_eq!(project_onto_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let p = project_onto_simplex(&[1.0, 1.0, -5.0]);
        assert_eq!(p, vec![0.5, 0.5, 0.0]);
    }

    proptest! {
        #[test]
        fn projection_lands_on_simplex_and_is_idempotent(
            v in prop::collection::vec(-3.0f64..3.0, 1..10),
        ) {
            let p = project_onto_simplex(&v);
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let q = project_onto_simplex(&p);
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn agrees_with_breakpoint_search() {
        let cases = [
            vec![0.2, 1.0, 3.0],
            vec![0.05, 0.5, f64::INFINITY, 2.0],
            vec![1.0, 1.0, 1.0],
        ];
        for eps in cases {
            let p = ObjectiveParams::new(5.0, 0.05, PrivacyDemand::new(eps).unwrap()).unwrap();
            for obj in [Objective::Correlated, Objective::Uncorrelated] {
                let exact = solve_weights_exact(obj, &p).unwrap();
                let sg = solve_weights_subgradient(obj, &p, &SubgradientConfig::default()).unwrap();
                assert!(sg.objective_value >= exact.objective_value - 1e-9);
                assert!(
                    sg.objective_value - exact.objective_value < 2e-3,
                    "{obj:?} {:?}: {} vs {}",
                    p.eps,
                    sg.objective_value,
                    exact.objective_value
                );
            }
        }
    }

    #[test]
    fn strict_mode_reports_non_convergence() {
        let p = ObjectiveParams::new(5.0, 0.05, PrivacyDemand::new(vec![0.2, 3.0]).unwrap())
            .unwrap();
        let config = SubgradientConfig {
            max_iterations: 10,
            strict: true,
            ..SubgradientConfig::default()
        };
        assert!(matches!(
            solve_weights_subgradient(Objective::Correlated, &p, &config),
            Err(Error::NotConverged { .. })
        ));
    }
}
