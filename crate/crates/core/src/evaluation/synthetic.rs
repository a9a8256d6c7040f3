//! Synthetic datasets with heterogeneous privacy demands.
//!
//! Records are drawn first, then privacy levels. In the correlated law a
//! user in bin `b` draws `ln eps = -slope |b - center| + Uniform[-h, h]`; in
//! the uncorrelated law `ln eps ~ Uniform[lo, hi]` independently of the
//! record.
//! Scalar records are drawn by bin and then uniformly inside the bin's slice
//! of `[0, 1]`, so the same bin-centered law applies to them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::RandomSource;
use crate::types::{Dataset, PrivacyDemand};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataShape {
    Categorical { k: usize },
    /// Values in `[0, 1]`, grouped into `bins` equal slices for the laws.
    Scalar { bins: usize },
}

impl DataShape {
    pub fn bins(&self) -> usize {
        match *self {
            Self::Categorical { k } => k,
            Self::Scalar { bins } => bins,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum PrivacyLaw {
    /// Correlated: `ln eps = -slope |bin - center| + Uniform[-half_width, half_width]`.
    BinCentered {
        center: f64,
        slope: f64,
        half_width: f64,
    },
    /// Uncorrelated: `ln eps ~ Uniform[lo, hi]`.
    LogUniform { lo: f64, hi: f64 },
}

impl PrivacyLaw {
    /// Centered between the middle bins with a half-width of 3. The slope
    /// puts the outermost bins 5.5 below the center whatever the bin count,
    /// which is slope 1 for 12 bins.
    pub fn bin_centered_default(bins: usize) -> Self {
        Self::BinCentered {
            center: (bins as f64 + 1.0) / 2.0,
            slope: if bins > 1 { 11.0 / (bins - 1) as f64 } else { 0.0 },
            half_width: 3.0,
        }
    }

    pub fn log_uniform_default() -> Self {
        Self::LogUniform { lo: -5.0, hi: 5.0 }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::BinCentered {
                center,
                slope,
                half_width,
            } => {
                let finite = center.is_finite() && slope.is_finite() && half_width.is_finite();
                if !(finite && slope >= 0.0 && half_width >= 0.0) {
                    return Err(invalid(
                        "bin-centered law needs a finite center, slope >= 0 and half_width >= 0",
                    ));
                }
            }
            Self::LogUniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(invalid(format!("log-uniform range [{lo}, {hi}] is not ordered")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "occupancy", rename_all = "kebab-case")]
pub enum Occupancy {
    Uniform,
    /// Every bin weighs 1 except `bin` (1-indexed), which weighs `factor`.
    HeavyBin { bin: usize, factor: f64 },
    Weights { weights: Vec<f64> },
}

impl Occupancy {
    /// Near-uniform occupancy with the middle bin four times as likely.
    pub fn default_for(bins: usize) -> Self {
        Self::HeavyBin {
            bin: bins.div_ceil(2),
            factor: 4.0,
        }
    }

    fn cumulative(&self, bins: usize) -> Result<Vec<f64>> {
        let weights = match self {
            Self::Uniform => vec![1.0; bins],
            Self::HeavyBin { bin, factor } => {
                if !(1..=bins).contains(bin) || !(*factor > 0.0) {
                    return Err(invalid(format!("heavy bin {bin} x{factor} is invalid")));
                }
                let mut w = vec![1.0; bins];
                w[bin - 1] = *factor;
                w
            }
            Self::Weights { weights } => {
                if weights.len() != bins || weights.iter().any(|w| !(*w >= 0.0)) {
                    return Err(invalid("occupancy weights must be non-negative, one per bin"));
                }
                weights.clone()
            }
        };
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(invalid("occupancy weights sum to zero"));
        }
        let mut acc = 0.0;
        Ok(weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub shape: DataShape,
    pub privacy: PrivacyLaw,
    pub occupancy: Occupancy,
}

impl SyntheticSpec {
    pub fn correlated(n: usize, shape: DataShape) -> Self {
        Self {
            n,
            shape,
            privacy: PrivacyLaw::bin_centered_default(shape.bins()),
            occupancy: Occupancy::default_for(shape.bins()),
        }
    }

    pub fn uncorrelated(n: usize, shape: DataShape) -> Self {
        Self {
            n,
            shape,
            privacy: PrivacyLaw::log_uniform_default(),
            occupancy: Occupancy::default_for(shape.bins()),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("synthetic dataset needs n >= 1"));
        }
        match self.shape {
            DataShape::Categorical { k } if k < 2 => {
                return Err(invalid("categorical data needs k >= 2"))
            }
            DataShape::Scalar { bins } if bins < 1 => {
                return Err(invalid("scalar data needs at least one bin"))
            }
            _ => {}
        }
        self.privacy.validate()
    }
}

fn draw_bins(spec: &SyntheticSpec, rng: &mut RandomSource) -> Result<Vec<usize>> {
    let cumulative = spec.occupancy.cumulative(spec.shape.bins())?;
    Ok((0..spec.n)
        .map(|_| {
            let u = rng.uniform();
            cumulative
                .iter()
                .position(|&c| u < c)
                .unwrap_or(cumulative.len() - 1)
                + 1
        })
        .collect())
}

fn records_from_bins(
    shape: DataShape,
    bins: &[usize],
    rng: &mut RandomSource,
) -> Result<Dataset> {
    match shape {
        DataShape::Categorical { k } => Dataset::categorical(k, bins.to_vec()),
        DataShape::Scalar { bins: count } => {
            let width = 1.0 / count as f64;
            let values = bins
                .iter()
                .map(|&b| (width * ((b - 1) as f64 + rng.uniform())).min(1.0))
                .collect();
            Dataset::scalar(values)
        }
    }
}

/// Records, then privacy levels tied to each user's bin.
pub fn gen_correlated(
    spec: &SyntheticSpec,
    rng: &mut RandomSource,
) -> Result<(Dataset, PrivacyDemand)> {
    spec.validate()?;
    let PrivacyLaw::BinCentered {
        center,
        slope,
        half_width,
    } = spec.privacy
    else {
        return Err(invalid("correlated generation needs a bin-centered privacy law"));
    };
    let bins = draw_bins(spec, rng)?;
    let data = records_from_bins(spec.shape, &bins, rng)?;
    let eps = bins
        .iter()
        .map(|&b| {
            let jitter = rng.uniform_range(-half_width, half_width);
            (-slope * (b as f64 - center).abs() + jitter).exp()
        })
        .collect();
    Ok((data, PrivacyDemand::new(eps)?))
}

/// Records, then privacy levels drawn independently of them.
pub fn gen_uncorrelated(
    spec: &SyntheticSpec,
    rng: &mut RandomSource,
) -> Result<(Dataset, PrivacyDemand)> {
    spec.validate()?;
    let PrivacyLaw::LogUniform { lo, hi } = spec.privacy else {
        return Err(invalid("uncorrelated generation needs a log-uniform privacy law"));
    };
    let bins = draw_bins(spec, rng)?;
    let data = records_from_bins(spec.shape, &bins, rng)?;
    let eps = (0..spec.n).map(|_| rng.uniform_range(lo, hi).exp()).collect();
    Ok((data, PrivacyDemand::new(eps)?))
}

/// Dispatches on the privacy law.
pub fn generate(spec: &SyntheticSpec, rng: &mut RandomSource) -> Result<(Dataset, PrivacyDemand)> {
    match spec.privacy {
        PrivacyLaw::BinCentered { .. } => gen_correlated(spec, rng),
        PrivacyLaw::LogUniform { .. } => gen_uncorrelated(spec, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_width_law_is_deterministic_per_bin() {
        let spec = SyntheticSpec {
            privacy: PrivacyLaw::BinCentered {
                center: 6.5,
                slope: 1.0,
                half_width: 0.0,
            },
            ..SyntheticSpec::correlated(500, DataShape::Categorical { k: 12 })
        };
        let (data, eps) = gen_correlated(&spec, &mut RandomSource::new(1)).unwrap();
        let Dataset::Categorical { records, .. } = data else { panic!() };
        for (&b, &e) in records.iter().zip(eps.as_slice()) {
            assert!((e.ln() + (b as f64 - 6.5).abs()).abs() < 1e-12);
        }
        // bin 6 sits half a bin from the center
        assert!(records.contains(&6));
    }

    #[test]
    fn bin_conditional_log_eps_mean() {
        let spec = SyntheticSpec {
            privacy: PrivacyLaw::bin_centered_default(12),
            occupancy: Occupancy::Uniform,
            ..SyntheticSpec::correlated(10_000, DataShape::Categorical { k: 12 })
        };
        let (data, eps) = gen_correlated(&spec, &mut RandomSource::new(2)).unwrap();
        let Dataset::Categorical { records, .. } = data else { panic!() };
        // Uniform[-3, 3] has standard deviation sqrt(3)
        let sd = 3f64.sqrt();
        for bin in 1..=12 {
            let logs: Vec<f64> = records
                .iter()
                .zip(eps.as_slice())
                .filter(|(&b, _)| b == bin)
                .map(|(_, e)| e.ln())
                .collect();
            let mean = logs.iter().sum::<f64>() / logs.len() as f64;
            let se = sd / (logs.len() as f64).sqrt();
            let center = -(bin as f64 - 6.5).abs();
            assert!((mean - center).abs() < 3.0 * se, "bin {bin}: {mean} vs {center}");
        }
    }

    #[test]
    fn default_slope_keeps_the_outer_bins_fixed() {
        for bins in [5usize, 12, 20] {
            let PrivacyLaw::BinCentered { center, slope, .. } = PrivacyLaw::bin_centered_default(bins)
            else {
                panic!()
            };
            assert!((slope * (1.0 - center).abs() - 5.5).abs() < 1e-12);
            assert!((slope * (bins as f64 - center).abs() - 5.5).abs() < 1e-12);
        }
        assert_eq!(
            PrivacyLaw::bin_centered_default(12),
            PrivacyLaw::BinCentered {
                center: 6.5,
                slope: 1.0,
                half_width: 3.0
            }
        );
    }

    #[test]
    fn degenerate_uncorrelated_law_is_homogeneous() {
        let spec = SyntheticSpec {
            privacy: PrivacyLaw::LogUniform { lo: 0.5, hi: 0.5 },
            ..SyntheticSpec::uncorrelated(100, DataShape::Categorical { k: 3 })
        };
        let (_, eps) = gen_uncorrelated(&spec, &mut RandomSource::new(3)).unwrap();
        assert!(eps.as_slice().iter().all(|&e| e == 0.5f64.exp()));
    }

    #[test]
    fn log_uniform_ks_and_independence() {
        let spec = SyntheticSpec::uncorrelated(10_000, DataShape::Categorical { k: 5 });
        let (data, eps) = gen_uncorrelated(&spec, &mut RandomSource::new(4)).unwrap();
        let mut logs: Vec<f64> = eps.as_slice().iter().map(|e| e.ln()).collect();
        logs.sort_by(f64::total_cmp);
        let n = logs.len() as f64;
        let ks = logs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let cdf = (x + 5.0) / 10.0;
                (cdf - i as f64 / n).abs().max(((i + 1) as f64 / n - cdf).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.02, "KS {ks}");

        let Dataset::Categorical { records, .. } = data else { panic!() };
        let xs: Vec<f64> = records.iter().map(|&r| r as f64).collect();
        let ys: Vec<f64> = eps.as_slice().iter().map(|e| e.ln()).collect();
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        let corr = cov / (vx * vy).sqrt();
        assert!(corr.abs() < 0.03, "corr {corr}");
    }

    #[test]
    fn wrong_law_for_generator() {
        let spec = SyntheticSpec::uncorrelated(10, DataShape::Categorical { k: 3 });
        assert!(gen_correlated(&spec, &mut RandomSource::new(0)).is_err());
        let spec = SyntheticSpec::correlated(10, DataShape::Categorical { k: 3 });
        assert!(gen_uncorrelated(&spec, &mut RandomSource::new(0)).is_err());
    }

    #[test]
    fn scalar_values_follow_bins() {
        let spec = SyntheticSpec::correlated(1000, DataShape::Scalar { bins: 12 });
        let (data, eps) = gen_correlated(&spec, &mut RandomSource::new(9)).unwrap();
        let Dataset::Scalar { records } = data else { panic!() };
        for (&x, &e) in records.iter().zip(eps.as_slice()) {
            let bin = ((x * 12.0).floor() as usize + 1).min(12);
            let dist = (bin as f64 - 6.5).abs();
            assert!((e.ln() + dist).abs() <= 3.0 + 1e-9);
        }
    }
}
