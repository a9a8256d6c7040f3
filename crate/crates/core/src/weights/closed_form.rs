use crate::error::{invalid, Result};
use crate::types::{PrivacyDemand, WeightVector};

/// Setting-agnostic weights `w_i ∝ 1 - e^{-eps_i}`; a public user counts as 1.
pub fn hpfa_weights(eps: &PrivacyDemand) -> WeightVector {
    let raw = eps
        .as_slice()
        .iter()
        .map(|&e| if e.is_infinite() { 1.0 } else { -(-e).exp_m1() })
        .collect();
    WeightVector::normalized(raw).expect("every level is positive")
}

/// Weights proportional to the privacy levels.
///
/// Undefined with a public user, whose weight would swallow everyone else's.
pub fn prop_weights(eps: &PrivacyDemand) -> Result<WeightVector> {
    if let Some(i) = eps.as_slice().iter().position(|e| e.is_infinite()) {
        return Err(invalid(format!(
            "proportional weights need finite privacy levels; user {i} is public"
        )));
    }
    WeightVector::normalized(eps.as_slice().to_vec())
}
