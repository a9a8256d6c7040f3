use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{ldp_frequency, ldp_mean, sm_estimate, uni_estimate};
use crate::error::{invalid, Error, Result};
use crate::mechanisms::{weighted_release, MechanismOutput};
use crate::rng::RandomSource;
use crate::stats::{exact_statistic, linf_error, permute_uniform};
use crate::types::{Dataset, Estimator, EstimatorSpec, Metric, PrivacyDemand, Setting, Task};
use crate::weights::{
    hpfa_weights, ldp_weights, prop_weights, solve_weights_exact, turbo_objective_weights,
    LdpTask, Objective, ObjectiveParams, SolverReport,
};

/// Quantile level used for the PAC column of MSE runs.
pub const REPORTING_BETA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub errors: Vec<f64>,
    pub beta: f64,
    pub pac_quantile: f64,
    pub mse: f64,
    /// Mean Laplace scale over trials (0 for local pipelines).
    pub noise_scale: f64,
    pub seed: u64,
    pub trials: usize,
}

/// The `ceil((1 - beta) T)`-th smallest error.
pub fn pac_quantile(errors: &[f64], beta: f64) -> Result<f64> {
    if errors.is_empty() {
        return Err(invalid("PAC quantile of an empty error list"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid(format!("beta must lie in (0, 1), got {beta}")));
    }
    let t = errors.len();
    let raw = (1.0 - beta) * t as f64;
    // guard against (1 - beta) T landing a hair above an integer
    let rank = if (raw - raw.round()).abs() < 1e-9 {
        raw.round()
    } else {
        raw.ceil()
    };
    let rank = (rank as usize).clamp(1, t);
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[rank - 1])
}

pub fn mse(errors: &[f64]) -> Result<f64> {
    if errors.is_empty() {
        return Err(invalid("MSE of an empty error list"));
    }
    Ok(errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64)
}

/// `10^4` for correlated runs, `ceil(10 n ln n)` (at least 1) for uncorrelated.
pub fn default_trials(setting: Setting, n: usize) -> usize {
    match setting {
        Setting::Correlated => 10_000,
        Setting::Uncorrelated => ((10.0 * n as f64 * (n as f64).ln()).ceil() as usize).max(1),
    }
}

/// Weights for estimators that use them; `None` for UNI and SM.
pub fn resolve_weights(
    task: Task,
    spec: &EstimatorSpec,
    eps: &PrivacyDemand,
) -> Result<Option<SolverReport>> {
    let params = || ObjectiveParams::for_task(task, spec.metric, eps.clone());
    let objective = Objective::from(spec.setting);
    let report = match spec.estimator {
        Estimator::Uni | Estimator::Sm => return Ok(None),
        Estimator::Optimal => solve_weights_exact(objective, &params()?)?,
        Estimator::Turbo => turbo_objective_weights(objective, &params()?)?,
        Estimator::Heuristic => closed_form_report(hpfa_weights(eps), objective, &params()?)?,
        Estimator::Prop => closed_form_report(prop_weights(eps)?, objective, &params()?)?,
        Estimator::Ldp => {
            let ldp_task = match task {
                Task::Frequency { .. } => LdpTask::Frequency,
                Task::Mean => LdpTask::Mean,
            };
            ldp_weights(spec.setting, &params()?, ldp_task)?
        }
    };
    if !report.converged {
        return Err(Error::NotConverged {
            iterations: report.iterations,
        });
    }
    Ok(Some(report))
}

fn closed_form_report(
    weights: crate::types::WeightVector,
    objective: Objective,
    p: &ObjectiveParams,
) -> Result<SolverReport> {
    Ok(SolverReport {
        objective_value: crate::weights::evaluate(objective, &weights, p)?,
        weights,
        iterations: 0,
        converged: true,
    })
}

/// One release of `data` by the estimator, with weights already resolved.
pub fn estimate_once(
    data: &Dataset,
    eps: &PrivacyDemand,
    estimator: Estimator,
    weights: Option<&SolverReport>,
    rng: &mut RandomSource,
) -> Result<MechanismOutput> {
    let need = || weights.ok_or_else(|| invalid(format!("estimator {estimator} needs weights")));
    match estimator {
        Estimator::Uni => uni_estimate(data, eps, rng),
        Estimator::Sm => sm_estimate(data, eps, rng),
        Estimator::Ldp => match data {
            Dataset::Categorical { .. } => ldp_frequency(data, eps, &need()?.weights, rng),
            Dataset::Scalar { .. } => ldp_mean(data, eps, &need()?.weights, rng),
        },
        _ => weighted_release(data, &need()?.weights, eps, rng),
    }
}

/// Runs `trials` independent releases. Trial `t` draws only from
/// `rng.substream(t)`, so the report does not depend on thread count.
///
/// In the uncorrelated setting the records are shuffled across users before
/// every release while the demand stays attached to user positions.
pub fn run_trials(
    data: &Dataset,
    eps: &PrivacyDemand,
    spec: &EstimatorSpec,
    trials: usize,
    rng: &RandomSource,
) -> Result<TrialReport> {
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    crate::error::check_len(eps.len(), data.len())?;
    let truth = exact_statistic(data)?;
    let weights = resolve_weights(data.task(), spec, eps)?;

    let outcomes: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut stream = rng.substream(t as u64);
            let out = match spec.setting {
                Setting::Correlated => {
                    estimate_once(data, eps, spec.estimator, weights.as_ref(), &mut stream)?
                }
                Setting::Uncorrelated => {
                    let shuffled = permute_uniform(data, &mut stream);
                    estimate_once(&shuffled, eps, spec.estimator, weights.as_ref(), &mut stream)?
                }
            };
            Ok((linf_error(&out.estimate, &truth)?, out.noise_scale))
        })
        .collect::<Result<_>>()?;

    let errors: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    let beta = match spec.metric {
        Metric::Pac { beta } => beta,
        Metric::Mse => REPORTING_BETA,
    };
    Ok(TrialReport {
        pac_quantile: pac_quantile(&errors, beta)?,
        mse: mse(&errors)?,
        noise_scale: outcomes.iter().map(|o| o.1).sum::<f64>() / trials as f64,
        beta,
        errors,
        seed: rng.seed(),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::WeightVector;

    fn spec(setting: Setting, estimator: Estimator) -> EstimatorSpec {
        EstimatorSpec::new(setting, Metric::pac(0.05).unwrap(), estimator).unwrap()
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(pac_quantile(&[0.3; 7], 0.05).unwrap(), 0.3);
        let tenths: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        assert_eq!(pac_quantile(&tenths, 0.05).unwrap(), 1.0);
        assert_eq!(pac_quantile(&[4.0, 2.0, 3.0, 1.0], 0.5).unwrap(), 2.0);
        assert!(pac_quantile(&[], 0.05).is_err());
        assert!(pac_quantile(&[1.0], 1.0).is_err());
    }

    #[test]
    fn quantile_is_950th_of_1000() {
        let errors: Vec<f64> = (0..1000).rev().map(|i| i as f64).collect();
        // 0.95 * 1000 is 950.0000000000001 in floating point
        assert_eq!(pac_quantile(&errors, 0.05).unwrap(), 949.0);
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(mse(&[1.0]).unwrap(), 1.0);
        assert!((mse(&[0.1, 0.3]).unwrap() - 0.05).abs() < 1e-15);
        assert!(mse(&[]).is_err());
    }

    #[test]
    fn default_trial_counts() {
        assert_eq!(default_trials(Setting::Correlated, 50), 10_000);
        assert_eq!(default_trials(Setting::Uncorrelated, 100), 4606);
        assert_eq!(default_trials(Setting::Uncorrelated, 1), 1);
    }

    #[test]
    fn public_data_has_zero_error() {
        let data = Dataset::categorical(3, vec![1, 2, 3, 3]).unwrap();
        let eps = PrivacyDemand::new(vec![f64::INFINITY; 4]).unwrap();
        for est in [Estimator::Optimal, Estimator::Uni, Estimator::Heuristic] {
            let r = run_trials(&data, &eps, &spec(Setting::Correlated, est), 50, &RandomSource::new(1))
                .unwrap();
            assert!(r.errors.iter().all(|&e| e == 0.0), "{est}");
        }
    }

    #[test]
    fn rerun_reproduces_report() {
        let data = Dataset::categorical(3, vec![1, 2, 3, 3, 1, 2]).unwrap();
        let eps = PrivacyDemand::new(vec![0.5, 1.0, 2.0, 0.1, 3.0, f64::INFINITY]).unwrap();
        for setting in [Setting::Correlated, Setting::Uncorrelated] {
            let s = spec(setting, Estimator::Optimal);
            let a = run_trials(&data, &eps, &s, 1000, &RandomSource::new(8)).unwrap();
            let b = run_trials(&data, &eps, &s, 1000, &RandomSource::new(8)).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.pac_quantile, pac_quantile(&a.errors, 0.05).unwrap());
            assert_eq!(a.mse, mse(&a.errors).unwrap());
            let max = a.errors.iter().cloned().fold(0.0, f64::max);
            assert!(a.errors.iter().all(|e| (0.0..=1.0).contains(e)));
            assert!(a.mse <= max * max && a.pac_quantile <= max);
        }
    }

    #[test]
    fn permutation_leaves_symmetric_estimator_unchanged_in_law() {
        let records: Vec<usize> = (0..40).map(|i| i % 4 + 1).collect();
        let data = Dataset::categorical(4, records).unwrap();
        let eps = PrivacyDemand::new((0..40).map(|i| 0.2 + 0.05 * i as f64).collect()).unwrap();
        let trials = 10_000;
        let mut a = run_trials(&data, &eps, &spec(Setting::Correlated, Estimator::Uni), trials, &RandomSource::new(3))
            .unwrap()
            .errors;
        let mut b = run_trials(&data, &eps, &spec(Setting::Uncorrelated, Estimator::Uni), trials, &RandomSource::new(4))
            .unwrap()
            .errors;
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        // two-sample KS statistic; clamping leaves atoms, so ties step together
        let (mut i, mut j, mut ks) = (0usize, 0usize, 0.0f64);
        while i < trials && j < trials {
            let x = a[i].min(b[j]);
            while i < trials && a[i] == x {
                i += 1;
            }
            while j < trials && b[j] == x {
                j += 1;
            }
            ks = ks.max((i as f64 - j as f64).abs() / trials as f64);
        }
        assert!(ks < 0.05, "KS {ks}");
    }

    #[test]
    fn weights_resolve_per_estimator() {
        let eps = PrivacyDemand::new(vec![0.5, 2.0, f64::INFINITY]).unwrap();
        let task = Task::Frequency { k: 4 };
        let s = spec(Setting::Correlated, Estimator::Uni);
        assert!(resolve_weights(task, &s, &eps).unwrap().is_none());
        let s = spec(Setting::Correlated, Estimator::Prop);
        assert!(resolve_weights(task, &s, &eps).is_err());
        let s = spec(Setting::Uncorrelated, Estimator::Heuristic);
        let r = resolve_weights(task, &s, &eps).unwrap().unwrap();
        assert_eq!(r.weights, hpfa_weights(&eps));
        let w = WeightVector::uniform(3).unwrap();
        assert!(estimate_once(
            &Dataset::categorical(4, vec![1, 2, 3]).unwrap(),
            &eps,
            Estimator::Optimal,
            None,
            &mut RandomSource::new(0)
        )
        .is_err());
        drop(w);
    }
}
