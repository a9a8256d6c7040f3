//! Weighted Laplace mechanisms and their privacy audits.
//!
//! Changing user `i`'s record moves the weighted histogram by at most `2 w_i`
//! in l1 (the weighted mean by `w_i`). Laplace noise of scale
//! `2 ||w / eps||_inf` (resp. `||w / eps||_inf`) therefore limits the log
//! density ratio for user `i` to `w_i / ||w / eps||_inf <= eps_i`.

use crate::error::{check_len, invalid, Result};
use crate::rng::{laplace_sample, RandomSource};
use crate::types::{Dataset, EmpiricalStatistic, PrivacyDemand, Task, WeightVector};

#[derive(Debug, Clone, PartialEq)]
pub struct MechanismOutput {
    pub estimate: EmpiricalStatistic,
    pub noise_scale: f64,
    pub weights_used: WeightVector,
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Weighted frequency release: weighted histogram plus i.i.d.
/// `Laplace(2 ||w / eps||_inf)` on every bin, each bin clamped to `[0, 1]`.
pub fn hpf(
    data: &Dataset,
    w: &WeightVector,
    eps: &PrivacyDemand,
    rng: &mut RandomSource,
) -> Result<MechanismOutput> {
    let (noisy, noise_scale) = unclamped::hpf_with_scale(data, w, eps, rng)?;
    Ok(MechanismOutput {
        estimate: EmpiricalStatistic::Frequency(noisy.into_iter().map(clamp_unit).collect()),
        noise_scale,
        weights_used: w.clone(),
    })
}

/// Weighted mean release with one `Laplace(||w / eps||_inf)` draw, clamped.
pub fn hpm(
    data: &Dataset,
    w: &WeightVector,
    eps: &PrivacyDemand,
    rng: &mut RandomSource,
) -> Result<MechanismOutput> {
    let (noisy, noise_scale) = unclamped::hpm_with_scale(data, w, eps, rng)?;
    Ok(MechanismOutput {
        estimate: EmpiricalStatistic::Mean(clamp_unit(noisy)),
        noise_scale,
        weights_used: w.clone(),
    })
}

/// Runs [`hpf`] or [`hpm`] according to the dataset kind.
pub fn weighted_release(
    data: &Dataset,
    w: &WeightVector,
    eps: &PrivacyDemand,
    rng: &mut RandomSource,
) -> Result<MechanismOutput> {
    match data {
        Dataset::Categorical { .. } => hpf(data, w, eps, rng),
        Dataset::Scalar { .. } => hpm(data, w, eps, rng),
    }
}

/// `sum_i w_i [X_i = j]` for every bin `j`.
pub fn weighted_histogram(k: usize, records: &[usize], w: &WeightVector) -> Result<Vec<f64>> {
    check_len(records.len(), w.len())?;
    let mut hist = vec![0.0; k];
    for (&r, &wi) in records.iter().zip(w.as_slice()) {
        hist[r - 1] += wi;
    }
    Ok(hist)
}

pub fn weighted_mean(records: &[f64], w: &WeightVector) -> Result<f64> {
    check_len(records.len(), w.len())?;
    Ok(records.iter().zip(w.as_slice()).map(|(x, wi)| x * wi).sum())
}

/// Pre-clamp outputs, for testing unbiasedness. The clamped releases above
/// are built on these and consume randomness identically.
#[doc(hidden)]
pub mod unclamped {
    use super::*;

    pub fn hpf(
        data: &Dataset,
        w: &WeightVector,
        eps: &PrivacyDemand,
        rng: &mut RandomSource,
    ) -> Result<Vec<f64>> {
        hpf_with_scale(data, w, eps, rng).map(|(v, _)| v)
    }

    pub fn hpm(
        data: &Dataset,
        w: &WeightVector,
        eps: &PrivacyDemand,
        rng: &mut RandomSource,
    ) -> Result<f64> {
        hpm_with_scale(data, w, eps, rng).map(|(v, _)| v)
    }

    pub(crate) fn hpf_with_scale(
        data: &Dataset,
        w: &WeightVector,
        eps: &PrivacyDemand,
        rng: &mut RandomSource,
    ) -> Result<(Vec<f64>, f64)> {
        let Dataset::Categorical { k, records } = data else {
            return Err(invalid("frequency release needs categorical data"));
        };
        check_len(records.len(), eps.len())?;
        let scale = 2.0 * w.max_ratio(eps)?;
        let mut y = weighted_histogram(*k, records, w)?;
        for yj in &mut y {
            *yj += laplace_sample(scale, rng)?;
        }
        Ok((y, scale))
    }

    pub(crate) fn hpm_with_scale(
        data: &Dataset,
        w: &WeightVector,
        eps: &PrivacyDemand,
        rng: &mut RandomSource,
    ) -> Result<(f64, f64)> {
        let Dataset::Scalar { records } = data else {
            return Err(invalid("mean release needs scalar data"));
        };
        check_len(records.len(), eps.len())?;
        let scale = w.max_ratio(eps)?;
        Ok((weighted_mean(records, w)? + laplace_sample(scale, rng)?, scale))
    }
}

/// Worst-case log density ratio per user: sensitivity over noise scale.
///
/// Users with positive weight but no noise (every weighted user public) get
/// `+inf`, which is only admissible because their own level is `+inf`.
pub fn dp_ratio_audit(w: &WeightVector, eps: &PrivacyDemand, task: Task) -> Result<Vec<f64>> {
    let max_ratio = w.max_ratio(eps)?;
    let (sensitivity_factor, scale) = match task {
        Task::Frequency { .. } => (2.0, 2.0 * max_ratio),
        Task::Mean => (1.0, max_ratio),
    };
    Ok(w.as_slice()
        .iter()
        .map(|&wi| {
            let sensitivity = sensitivity_factor * wi;
            if sensitivity == 0.0 {
                0.0
            } else if scale == 0.0 {
                f64::INFINITY
            } else {
                sensitivity / scale
            }
        })
        .collect())
}

/// Privacy level each user actually receives, `w_i / ||w / eps||_inf`.
///
/// When the noise term vanishes every user is reported at 0.
pub fn free_privacy_audit(w: &WeightVector, eps: &PrivacyDemand) -> Result<Vec<f64>> {
    let max_ratio = w.max_ratio(eps)?;
    Ok(w.as_slice()
        .iter()
        .map(|&wi| if max_ratio == 0.0 { 0.0 } else { wi / max_ratio })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::exact_statistic;

    const INF: f64 = f64::INFINITY;

    fn demand(v: Vec<f64>) -> PrivacyDemand {
        PrivacyDemand::new(v).unwrap()
    }

    #[test]
    fn public_data_is_released_exactly() {
        let data = Dataset::categorical(3, vec![1, 2, 2, 3, 3, 3]).unwrap();
        let w = WeightVector::uniform(6).unwrap();
        let mut rng = RandomSource::new(5);
        let out = hpf(&data, &w, &demand(vec![INF; 6]), &mut rng).unwrap();
        assert_eq!(out.noise_scale, 0.0);
        assert_eq!(out.estimate, exact_statistic(&data).unwrap());
    }

    #[test]
    fn weighted_counts() {
        let data = Dataset::categorical(2, vec![1, 1, 2, 2]).unwrap();
        let w = WeightVector::new(vec![0.4, 0.4, 0.1, 0.1]).unwrap();
        let mut rng = RandomSource::new(5);
        let out = hpf(&data, &w, &demand(vec![INF; 4]), &mut rng).unwrap();
        let EmpiricalStatistic::Frequency(v) = out.estimate else { panic!() };
        assert!((v[0] - 0.8).abs() < 1e-15 && (v[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn seeded_release_replays_laplace_draws() {
        let data = Dataset::categorical(2, vec![1, 2]).unwrap();
        let w = WeightVector::uniform(2).unwrap();
        let eps = demand(vec![1.0, 1.0]);
        let out = hpf(&data, &w, &eps, &mut RandomSource::new(99)).unwrap();
        assert_eq!(out.noise_scale, 1.0);

        let mut replay = RandomSource::new(99);
        let n1 = laplace_sample(1.0, &mut replay).unwrap();
        let n2 = laplace_sample(1.0, &mut replay).unwrap();
        let expect = [(0.5 + n1).clamp(0.0, 1.0), (0.5 + n2).clamp(0.0, 1.0)];
        assert_eq!(out.estimate, EmpiricalStatistic::Frequency(expect.to_vec()));
    }

    #[test]
    fn mean_examples() {
        let data = Dataset::scalar(vec![0.0, 1.0]).unwrap();
        let w = WeightVector::new(vec![0.3, 0.7]).unwrap();
        let mut rng = RandomSource::new(1);
        let out = hpm(&data, &w, &demand(vec![INF, INF]), &mut rng).unwrap();
        assert_eq!(out.estimate, EmpiricalStatistic::Mean(0.7));

        let uniform = WeightVector::uniform(2).unwrap();
        let out = hpm(&data, &uniform, &demand(vec![INF, INF]), &mut rng).unwrap();
        assert_eq!(out.estimate, EmpiricalStatistic::Mean(0.5));

        for seed in 0..200 {
            let out = hpm(&data, &uniform, &demand(vec![0.01, 0.01]), &mut RandomSource::new(seed))
                .unwrap();
            let EmpiricalStatistic::Mean(m) = out.estimate else { panic!() };
            assert!((0.0..=1.0).contains(&m));
        }
    }

    #[test]
    fn wrong_shapes_rejected() {
        let data = Dataset::categorical(2, vec![1, 2, 1]).unwrap();
        let w = WeightVector::uniform(2).unwrap();
        let mut rng = RandomSource::new(1);
        assert!(hpf(&data, &w, &demand(vec![1.0, 1.0]), &mut rng).is_err());
        let scalar = Dataset::scalar(vec![0.1, 0.2]).unwrap();
        assert!(hpf(&scalar, &w, &demand(vec![1.0, 1.0]), &mut rng).is_err());
        assert!(hpm(&data, &w, &demand(vec![1.0, 1.0]), &mut rng).is_err());
    }

    #[test]
    fn audit_examples() {
        let eps = demand(vec![0.8; 4]);
        let w = WeightVector::uniform(4).unwrap();
        for task in [Task::Frequency { k: 3 }, Task::Mean] {
            for b in dp_ratio_audit(&w, &eps, task).unwrap() {
                assert!((b - 0.8).abs() < 1e-15);
            }
        }
        let w = WeightVector::new(vec![0.0, 1.0]).unwrap();
        let bounds = dp_ratio_audit(&w, &demand(vec![1.0, INF]), Task::Frequency { k: 2 }).unwrap();
        assert_eq!(bounds[0], 0.0);
        assert!(bounds[0] <= 1.0);
        assert_eq!(bounds[1], INF);
    }

    #[test]
    fn free_privacy_examples() {
        let eps = demand(vec![0.5, 1.0, 2.5]);
        let w = WeightVector::normalized(eps.as_slice().to_vec()).unwrap();
        for (e, want) in free_privacy_audit(&w, &eps).unwrap().iter().zip(eps.as_slice()) {
            assert!((e - want).abs() < 1e-12);
        }
        let eps = demand(vec![0.3; 3]);
        let w = WeightVector::uniform(3).unwrap();
        for e in free_privacy_audit(&w, &eps).unwrap() {
            assert!((e - 0.3).abs() < 1e-12);
        }
        let all_public = free_privacy_audit(&w, &demand(vec![INF; 3])).unwrap();
        assert_eq!(all_public, vec![0.0; 3]);
    }
}
