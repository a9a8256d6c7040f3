//! Comparison mechanisms: uniform enforcement of the strictest level (UNI),
//! the sampling mechanism (SM), and local-DP pipelines (k-RAPPOR for
//! frequencies, client-side Laplace for means).
//!
//! Proportional weighting needs no code of its own: it is
//! [`crate::weights::prop_weights`] fed to the weighted releases.

use crate::error::{check_len, invalid, Result};
use crate::mechanisms::{weighted_release, MechanismOutput};
use crate::rng::{laplace_sample, RandomSource};
use crate::types::{Dataset, EmpiricalStatistic, PrivacyDemand, WeightVector};

/// Runs the weighted release with uniform weights and every user held to the
/// smallest demanded level.
pub fn uni_estimate(
    data: &Dataset,
    eps: &PrivacyDemand,
    rng: &mut RandomSource,
) -> Result<MechanismOutput> {
    let n = eps.len();
    check_len(n, data.len())?;
    let strictest = PrivacyDemand::homogeneous(n, eps.min())?;
    weighted_release(data, &WeightVector::uniform(n)?, &strictest, rng)
}

/// Inclusion probabilities `(e^{eps_i} - 1) / (e^t - 1)` with `t = max eps`.
///
/// With a public user, `t = inf` and the limit keeps only public users.
pub fn sm_inclusion_probabilities(eps: &PrivacyDemand) -> Vec<f64> {
    let t = eps.max();
    if t.is_infinite() {
        return eps
            .as_slice()
            .iter()
            .map(|e| if e.is_infinite() { 1.0 } else { 0.0 })
            .collect();
    }
    let log_t = ln_exp_m1(t);
    eps.as_slice()
        .iter()
        .map(|&e| (ln_exp_m1(e) - log_t).exp().min(1.0))
        .collect()
}

/// `ln(e^x - 1)` without overflow.
fn ln_exp_m1(x: f64) -> f64 {
    if x > 30.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

/// Sampling mechanism: Bernoulli subsampling, then the homogeneous `t`-DP
/// release on the sample (uniform weights, noise scaled by the realized
/// sample size). An empty sample returns 1/2 in every coordinate; this
/// cannot happen for a valid demand since the user holding `t` is always kept.
pub fn sm_estimate(
    data: &Dataset,
    eps: &PrivacyDemand,
    rng: &mut RandomSource,
) -> Result<MechanismOutput> {
    let n = eps.len();
    check_len(n, data.len())?;
    let t = eps.max();
    let kept: Vec<usize> = sm_inclusion_probabilities(eps)
        .into_iter()
        .enumerate()
        .filter_map(|(i, p)| rng.bernoulli(p).then_some(i))
        .collect();

    if kept.is_empty() {
        let estimate = match data {
            Dataset::Categorical { k, .. } => EmpiricalStatistic::Frequency(vec![0.5; *k]),
            Dataset::Scalar { .. } => EmpiricalStatistic::Mean(0.5),
        };
        return Ok(MechanismOutput {
            estimate,
            noise_scale: 0.0,
            weights_used: WeightVector::uniform(n)?,
        });
    }

    let m = kept.len();
    let sample = data.select(&kept);
    let out = weighted_release(
        &sample,
        &WeightVector::uniform(m)?,
        &PrivacyDemand::homogeneous(m, t)?,
        rng,
    )?;
    let mut weights = vec![0.0; n];
    for &i in &kept {
        weights[i] = 1.0 / m as f64;
    }
    Ok(MechanismOutput {
        weights_used: WeightVector::normalized(weights)?,
        ..out
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum LdpClientReport {
    Frequency { bits: Vec<bool> },
    Mean { value: f64 },
}

/// k-RAPPOR bit flip probability `1 / (1 + e^{eps/2})`.
pub fn flip_probability(eps: f64) -> f64 {
    1.0 / (1.0 + (eps / 2.0).exp())
}

/// One-hot encodes `record` (1-indexed) and flips each bit independently.
/// One uniform is drawn per bit, flipped or not.
pub fn ldp_freq_client(
    record: usize,
    k: usize,
    eps_i: f64,
    rng: &mut RandomSource,
) -> Result<LdpClientReport> {
    if !(1..=k).contains(&record) {
        return Err(invalid(format!("record {record} outside bins 1..={k}")));
    }
    if !(eps_i > 0.0) {
        return Err(invalid(format!("privacy level must be positive, got {eps_i}")));
    }
    let q = flip_probability(eps_i);
    let bits = (1..=k)
        .map(|j| (j == record) ^ (rng.uniform() < q))
        .collect();
    Ok(LdpClientReport::Frequency { bits })
}

/// Log-probability that a client holding `record` sends `bits`.
pub fn rappor_log_probability(bits: &[bool], record: usize, eps_i: f64) -> f64 {
    // ln q = -ln(1 + e^{eps/2}),  ln(1 - q) = eps/2 - ln(1 + e^{eps/2})
    let half = eps_i / 2.0;
    let softplus = if half > 30.0 { half + (-half).exp().ln_1p() } else { half.exp().ln_1p() };
    let ln_flip = -softplus;
    let ln_keep = half - softplus;
    bits.iter()
        .enumerate()
        .map(|(j, &b)| if b == (j + 1 == record) { ln_keep } else { ln_flip })
        .sum()
}

/// Weighted sum of per-user unbiased decodings
/// `coth(eps_i / 4) (x_i - 1 / (1 + e^{eps_i/2}))`, clamped to `[0, 1]`.
///
/// The reported noise scale is 0: no central noise is added.
pub fn ldp_freq_aggregate(
    reports: &[LdpClientReport],
    eps: &PrivacyDemand,
    w: &WeightVector,
) -> Result<MechanismOutput> {
    let raw = unclamped::ldp_freq_aggregate(reports, eps, w)?;
    Ok(MechanismOutput {
        estimate: EmpiricalStatistic::Frequency(raw.into_iter().map(|x| x.clamp(0.0, 1.0)).collect()),
        noise_scale: 0.0,
        weights_used: w.clone(),
    })
}

/// Clients draw in user order from one stream; the server aggregates.
pub fn ldp_frequency(
    data: &Dataset,
    eps: &PrivacyDemand,
    w: &WeightVector,
    rng: &mut RandomSource,
) -> Result<MechanismOutput> {
    let reports = rappor_reports(data, eps, rng)?;
    ldp_freq_aggregate(&reports, eps, w)
}

fn rappor_reports(
    data: &Dataset,
    eps: &PrivacyDemand,
    rng: &mut RandomSource,
) -> Result<Vec<LdpClientReport>> {
    let Dataset::Categorical { k, records } = data else {
        return Err(invalid("k-RAPPOR needs categorical data"));
    };
    check_len(eps.len(), records.len())?;
    records
        .iter()
        .zip(eps.as_slice())
        .map(|(&r, &e)| ldp_freq_client(r, *k, e, rng))
        .collect()
}

/// Each client sends `X_i + Laplace(1 / eps_i)`; the server returns
/// `sum_i w_i Y_i` clamped to `[0, 1]`.
pub fn ldp_mean(
    data: &Dataset,
    eps: &PrivacyDemand,
    w: &WeightVector,
    rng: &mut RandomSource,
) -> Result<MechanismOutput> {
    let raw = unclamped::ldp_mean(data, eps, w, rng)?;
    Ok(MechanismOutput {
        estimate: EmpiricalStatistic::Mean(raw.clamp(0.0, 1.0)),
        noise_scale: 0.0,
        weights_used: w.clone(),
    })
}

pub fn ldp_mean_client(value: f64, eps_i: f64, rng: &mut RandomSource) -> Result<LdpClientReport> {
    if !(eps_i > 0.0) {
        return Err(invalid(format!("privacy level must be positive, got {eps_i}")));
    }
    let scale = if eps_i.is_infinite() { 0.0 } else { 1.0 / eps_i };
    Ok(LdpClientReport::Mean {
        value: value + laplace_sample(scale, rng)?,
    })
}

#[doc(hidden)]
pub mod unclamped {
    use super::*;
    use crate::weights::ldp_coefficient;

    pub fn ldp_freq_aggregate(
        reports: &[LdpClientReport],
        eps: &PrivacyDemand,
        w: &WeightVector,
    ) -> Result<Vec<f64>> {
        check_len(eps.len(), reports.len())?;
        check_len(eps.len(), w.len())?;
        let mut k = None;
        let mut acc: Vec<f64> = Vec::new();
        for ((report, &e), &wi) in reports.iter().zip(eps.as_slice()).zip(w.as_slice()) {
            let LdpClientReport::Frequency { bits } = report else {
                return Err(invalid("expected k-RAPPOR reports"));
            };
            match k {
                None => {
                    k = Some(bits.len());
                    acc = vec![0.0; bits.len()];
                }
                Some(k) => check_len(k, bits.len())?,
            }
            // coth(eps/4) = eps * coefficient; the public limit is 1
            let scale = if e.is_infinite() { 1.0 } else { e * ldp_coefficient(e) };
            let offset = flip_probability(e);
            for (a, &b) in acc.iter_mut().zip(bits) {
                *a += wi * scale * (f64::from(u8::from(b)) - offset);
            }
        }
        Ok(acc)
    }

    pub fn ldp_frequency(
        data: &Dataset,
        eps: &PrivacyDemand,
        w: &WeightVector,
        rng: &mut RandomSource,
    ) -> Result<Vec<f64>> {
        let reports = rappor_reports(data, eps, rng)?;
        ldp_freq_aggregate(&reports, eps, w)
    }

    pub fn ldp_mean(
        data: &Dataset,
        eps: &PrivacyDemand,
        w: &WeightVector,
        rng: &mut RandomSource,
    ) -> Result<f64> {
        let Dataset::Scalar { records } = data else {
            return Err(invalid("local Laplace mean needs scalar data"));
        };
        check_len(eps.len(), records.len())?;
        check_len(eps.len(), w.len())?;
        let mut total = 0.0;
        for ((&x, &e), &wi) in records.iter().zip(eps.as_slice()).zip(w.as_slice()) {
            let LdpClientReport::Mean { value } = ldp_mean_client(x, e, rng)? else {
                unreachable!()
            };
            total += wi * value;
        }
        Ok(total)
    }
}
