//! Domain types shared by the solvers, mechanisms and the benchmark harness.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, invalid, Result};

/// Absolute tolerance on the sum of a weight vector.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Per-user privacy levels, stored in user order.
///
/// Entries live in `(0, +inf]`; an infinite entry marks a user whose record is
/// public. Any ratio `w / eps` against an infinite entry is taken to be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyDemand {
    eps: Vec<f64>,
}

impl PrivacyDemand {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if eps.is_empty() {
            return Err(invalid("privacy demand must cover at least one user"));
        }
        if let Some((i, e)) = eps.iter().enumerate().find(|(_, e)| !(**e > 0.0)) {
            return Err(invalid(format!(
                "privacy level of user {i} must be positive, got {e}"
            )));
        }
        Ok(Self { eps })
    }

    pub fn homogeneous(n: usize, eps: f64) -> Result<Self> {
        Self::new(vec![eps; n])
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.eps
    }

    pub fn get(&self, i: usize) -> f64 {
        self.eps[i]
    }

    pub fn min(&self) -> f64 {
        self.eps.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.eps.iter().copied().fold(0.0, f64::max)
    }

    pub fn all_public(&self) -> bool {
        self.eps.iter().all(|e| e.is_infinite())
    }

    pub fn all_finite(&self) -> bool {
        self.eps.iter().all(|e| e.is_finite())
    }

    /// Users ordered by non-decreasing privacy level; ties keep user order.
    ///
    /// `order[j]` is the user holding the `j`-th smallest level.
    pub fn sorted_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.eps.len()).collect();
        order.sort_by(|&a, &b| self.eps[a].total_cmp(&self.eps[b]));
        order
    }

    /// Sorted levels together with the permutation that produced them.
    pub fn sorted_view(&self) -> (Vec<f64>, Vec<usize>) {
        let order = self.sorted_order();
        let sorted = order.iter().map(|&i| self.eps[i]).collect();
        (sorted, order)
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_len(self.len(), perm.len())?;
        Self::new(perm.iter().map(|&i| self.eps[i]).collect())
    }
}

/// `w_i / eps_i`, zero for a public user.
#[inline]
pub fn ratio(w: f64, eps: f64) -> f64 {
    if eps.is_infinite() {
        0.0
    } else {
        w / eps
    }
}

/// Non-negative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector {
    w: Vec<f64>,
}

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(invalid("weight vector must be non-empty"));
        }
        if let Some((i, x)) = w
            .iter()
            .enumerate()
            .find(|(_, x)| !(x.is_finite() && **x >= 0.0))
        {
            return Err(invalid(format!("weight {i} is not a non-negative real: {x}")));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(invalid(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self { w })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("weight vector must be non-empty"));
        }
        Ok(Self {
            w: vec![1.0 / n as f64; n],
        })
    }

    /// Scales a non-negative vector with positive sum onto the simplex.
    pub fn normalized(raw: Vec<f64>) -> Result<Self> {
        let sum: f64 = raw.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(invalid(format!("cannot normalize vector with sum {sum}")));
        }
        Self::new(raw.into_iter().map(|x| x / sum).collect())
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.w
    }

    /// `max_i w_i / eps_i`, ignoring public users.
    pub fn max_ratio(&self, eps: &PrivacyDemand) -> Result<f64> {
        check_len(self.len(), eps.len())?;
        Ok(self
            .w
            .iter()
            .zip(eps.as_slice())
            .map(|(&w, &e)| ratio(w, e))
            .fold(0.0, f64::max))
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = crate::Error;

    fn try_from(w: Vec<f64>) -> Result<Self> {
        Self::new(w)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.w
    }
}

/// Records of a dataset. Categorical bins are 1-indexed.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Categorical { k: usize, records: Vec<usize> },
    Scalar { records: Vec<f64> },
}

impl Dataset {
    pub fn categorical(k: usize, records: Vec<usize>) -> Result<Self> {
        if k < 2 {
            return Err(invalid(format!("need at least 2 bins, got {k}")));
        }
        if let Some((i, r)) = records
            .iter()
            .enumerate()
            .find(|(_, r)| !(1..=k).contains(*r))
        {
            return Err(invalid(format!("record {i} = {r} outside bins 1..={k}")));
        }
        Ok(Self::Categorical { k, records })
    }

    pub fn scalar(records: Vec<f64>) -> Result<Self> {
        if let Some((i, r)) = records
            .iter()
            .enumerate()
            .find(|(_, r)| !(0.0..=1.0).contains(*r))
        {
            return Err(invalid(format!("record {i} = {r} outside [0, 1]")));
        }
        Ok(Self::Scalar { records })
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Categorical { records, .. } => records.len(),
            Self::Scalar { records } => records.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn task(&self) -> Task {
        match self {
            Self::Categorical { k, .. } => Task::Frequency { k: *k },
            Self::Scalar { .. } => Task::Mean,
        }
    }

    /// Record `perm[i]` becomes the record of user `i`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_len(self.len(), perm.len())?;
        Ok(match self {
            Self::Categorical { k, records } => Self::Categorical {
                k: *k,
                records: perm.iter().map(|&i| records[i]).collect(),
            },
            Self::Scalar { records } => Self::Scalar {
                records: perm.iter().map(|&i| records[i]).collect(),
            },
        })
    }

    /// Keeps the records of the listed users, in the listed order.
    pub fn select(&self, users: &[usize]) -> Self {
        match self {
            Self::Categorical { k, records } => Self::Categorical {
                k: *k,
                records: users.iter().map(|&i| records[i]).collect(),
            },
            Self::Scalar { records } => Self::Scalar {
                records: users.iter().map(|&i| records[i]).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EmpiricalStatistic {
    Frequency(Vec<f64>),
    Mean(f64),
}

impl EmpiricalStatistic {
    /// Components as a slice; a mean is a single component.
    pub fn components(&self) -> &[f64] {
        match self {
            Self::Frequency(v) => v,
            Self::Mean(m) => std::slice::from_ref(m),
        }
    }
}

/// What is being estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Task {
    Frequency { k: usize },
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    /// Records are tied to the users holding them.
    Correlated,
    /// Records reach users through a uniformly random permutation.
    Uncorrelated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Metric {
    /// `(1 - beta)`-quantile of the l-infinity error.
    Pac { beta: f64 },
    /// Mean squared l-infinity error.
    Mse,
}

impl Metric {
    pub fn pac(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(invalid(format!("beta must lie in (0, 1), got {beta}")));
        }
        Ok(Self::Pac { beta })
    }
}

/// Estimator families. Each maps to its histogram (frequency) or mean variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Estimator {
    /// Weights minimizing the setting's error bound exactly.
    Optimal,
    /// Closed-form `(1 - e^-eps)` weights.
    Heuristic,
    /// Weights from the O(n log n) l2-relaxed recursion.
    Turbo,
    Uni,
    Prop,
    Sm,
    Ldp,
}

impl Estimator {
    pub const ALL: [Estimator; 7] = [
        Estimator::Optimal,
        Estimator::Heuristic,
        Estimator::Turbo,
        Estimator::Prop,
        Estimator::Uni,
        Estimator::Sm,
        Estimator::Ldp,
    ];

    /// Display label, e.g. `HPF-A` for frequency or `HPM-A` for mean.
    pub fn label(self, task: Task) -> &'static str {
        let freq = matches!(task, Task::Frequency { .. });
        match (self, freq) {
            (Self::Optimal, true) => "HPF",
            (Self::Optimal, false) => "HPM",
            (Self::Heuristic, true) => "HPF-A",
            (Self::Heuristic, false) => "HPM-A",
            (Self::Turbo, true) => "HPF-T",
            (Self::Turbo, false) => "HPM-T",
            (Self::Uni, _) => "UNI",
            (Self::Prop, _) => "Prop",
            (Self::Sm, _) => "SM",
            (Self::Ldp, _) => "LDP",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Optimal => "hpf",
            Self::Heuristic => "hpf-a",
            Self::Turbo => "hpf-t",
            Self::Uni => "uni",
            Self::Prop => "prop",
            Self::Sm => "sm",
            Self::Ldp => "ldp",
        };
        f.write_str(s)
    }
}

impl FromStr for Estimator {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hpf" | "hpm" | "hpf-opt" | "hpm-opt" => Ok(Self::Optimal),
            "hpf-a" | "hpm-a" => Ok(Self::Heuristic),
            "hpf-t" | "hpm-t" | "hpf-turbo" | "hpm-turbo" => Ok(Self::Turbo),
            "uni" => Ok(Self::Uni),
            "prop" => Ok(Self::Prop),
            "sm" => Ok(Self::Sm),
            "ldp" => Ok(Self::Ldp),
            other => Err(invalid(format!("unknown estimator `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    pub setting: Setting,
    pub metric: Metric,
    pub estimator: Estimator,
}

impl EstimatorSpec {
    pub fn new(setting: Setting, metric: Metric, estimator: Estimator) -> Result<Self> {
        if let Metric::Pac { beta } = metric {
            Metric::pac(beta)?;
        }
        Ok(Self {
            setting,
            metric,
            estimator,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn privacy_demand_rejects_non_positive() {
        assert!(PrivacyDemand::new(vec![1.0, 0.0]).is_err());
        assert!(PrivacyDemand::new(vec![-1.0]).is_err());
        assert!(PrivacyDemand::new(vec![f64::NAN]).is_err());
        assert!(PrivacyDemand::new(vec![]).is_err());
        assert!(PrivacyDemand::new(vec![0.5, f64::INFINITY]).is_ok());
    }

    #[test]
    fn sorted_view_inverts() {
        let eps = PrivacyDemand::new(vec![3.0, f64::INFINITY, 1.0, 2.0]).unwrap();
        let (sorted, order) = eps.sorted_view();
        assert_eq!(sorted, vec![1.0, 2.0, 3.0, f64::INFINITY]);
        assert_eq!(order, vec![2, 3, 0, 1]);
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![0.5, 0.5]).is_ok());
        assert!(WeightVector::new(vec![0.5, 0.5 + 1e-10]).is_ok());
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![1.5, -0.5]).is_err());
        assert!(WeightVector::new(vec![]).is_err());
    }

    #[test]
    fn max_ratio_skips_public_users() {
        let w = WeightVector::new(vec![0.25, 0.75]).unwrap();
        let eps = PrivacyDemand::new(vec![0.5, f64::INFINITY]).unwrap();
        assert_eq!(w.max_ratio(&eps).unwrap(), 0.5);
    }

    #[test]
    fn dataset_ranges() {
        assert!(Dataset::categorical(3, vec![1, 2, 3]).is_ok());
        assert!(Dataset::categorical(3, vec![0]).is_err());
        assert!(Dataset::categorical(3, vec![4]).is_err());
        assert!(Dataset::categorical(1, vec![1]).is_err());
        assert!(Dataset::scalar(vec![0.0, 1.0]).is_ok());
        assert!(Dataset::scalar(vec![1.5]).is_err());
    }

    #[test]
    fn estimator_names_round_trip() {
        for e in Estimator::ALL {
            assert_eq!(e.to_string().parse::<Estimator>().unwrap(), e);
        }
        assert_eq!("HPM-A".parse::<Estimator>().unwrap(), Estimator::Heuristic);
        assert!("gaussian".parse::<Estimator>().is_err());
    }

    #[test]
    fn pac_beta_range() {
        assert!(Metric::pac(0.05).is_ok());
        assert!(Metric::pac(0.0).is_err());
        assert!(Metric::pac(1.0).is_err());
    }
}
