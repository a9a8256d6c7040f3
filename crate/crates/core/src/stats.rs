use rand::seq::SliceRandom;

use crate::error::{check_len, invalid, Result};
use crate::rng::RandomSource;
use crate::types::{Dataset, EmpiricalStatistic};

/// Normalized histogram (categorical) or mean (scalar) of the records.
pub fn exact_statistic(data: &Dataset) -> Result<EmpiricalStatistic> {
    if data.is_empty() {
        return Err(invalid("cannot take the statistic of an empty dataset"));
    }
    let n = data.len() as f64;
    Ok(match data {
        Dataset::Categorical { k, records } => {
            let mut counts = vec![0usize; *k];
            for &r in records {
                counts[r - 1] += 1;
            }
            EmpiricalStatistic::Frequency(counts.into_iter().map(|c| c as f64 / n).collect())
        }
        Dataset::Scalar { records } => {
            // summed in sorted order so the result does not depend on user order
            let mut sorted = records.clone();
            sorted.sort_by(f64::total_cmp);
            EmpiricalStatistic::Mean(sorted.iter().sum::<f64>() / n)
        }
    })
}

/// Largest absolute componentwise difference.
pub fn linf_error(est: &EmpiricalStatistic, truth: &EmpiricalStatistic) -> Result<f64> {
    match (est, truth) {
        (EmpiricalStatistic::Frequency(a), EmpiricalStatistic::Frequency(b)) => {
            check_len(b.len(), a.len())?;
            Ok(a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max))
        }
        (EmpiricalStatistic::Mean(a), EmpiricalStatistic::Mean(b)) => Ok((a - b).abs()),
        _ => Err(invalid("cannot compare a frequency with a mean")),
    }
}

/// A uniformly random permutation `perm` of `0..n` (Fisher-Yates).
pub fn uniform_permutation(n: usize, rng: &mut RandomSource) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

/// The dataset as seen by users after a uniformly random reassignment.
pub fn permute_uniform(data: &Dataset, rng: &mut RandomSource) -> Dataset {
    let perm = uniform_permutation(data.len(), rng);
    data.permuted(&perm).expect("permutation has dataset length")
}
