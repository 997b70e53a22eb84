//! Per-user diversity tolerance.
//!
//! A user's tolerance on a feature is the Shannon entropy (bits) of the value
//! distribution in their training profile. Tolerances are expanded onto the
//! dummy space and multiplied with the protected-value weights to give the
//! per-user weight vector used by the weighted cosine.

use std::path::Path;

use rayon::prelude::*;

use crate::catalog::{FeatureSchema, Interactions, Item, ItemCatalog, Split, UserIdx};
use crate::error::{Error, Result};

/// Lower bound applied to expanded tolerances before weighting, so that a
/// user with zero entropy everywhere still has a strictly positive weight vector.
pub const TOLERANCE_FLOOR: f64 = 1e-6;

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn entropy_bits(distribution: &[f64]) -> f64 {
    let h: f64 = distribution
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    // -0.0 for single-valued profiles
    h.max(0.0)
}

/// Value-occurrence distribution of `profile` on `feature`.
///
/// Every (item, value) assignment counts once, so multi-valued items spread
/// their mass over all values they hold.
pub fn feature_distribution(
    profile: &[&Item],
    feature: usize,
    schema: &FeatureSchema,
) -> Result<Vec<f64>> {
    if profile.is_empty() {
        return Err(Error::Empty("profile has no items".into()));
    }
    let mut counts = vec![0usize; schema.cardinality(feature)];
    for item in profile {
        for &v in item.values(feature) {
            counts[v] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    Ok(counts
        .into_iter()
        .map(|c| c as f64 / total as f64)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToleranceProfile {
    user: String,
    tau: Vec<f64>,
    gamma: Vec<f64>,
}

impl ToleranceProfile {
    pub fn user(&self) -> &str {
        &self.user
    }

    /// Entropy per feature dimension.
    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    /// `tau` repeated over each feature's block of dummy coordinates.
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }
}

/// Tolerance vector of one user's training profile.
pub fn tolerance(
    user: impl Into<String>,
    profile: &[&Item],
    schema: &FeatureSchema,
) -> Result<ToleranceProfile> {
    let user = user.into();
    if profile.is_empty() {
        return Err(Error::EmptyProfile(user));
    }
    let mut tau = Vec::with_capacity(schema.n_features());
    let mut gamma = vec![0.0; schema.dim()];
    for j in 0..schema.n_features() {
        let h = entropy_bits(&feature_distribution(profile, j, schema)?);
        gamma[schema.block(j)].fill(h);
        tau.push(h);
    }
    Ok(ToleranceProfile { user, tau, gamma })
}

/// Per-user weights over the dummy space. All coordinates are strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedWeights {
    user: String,
    z: Vec<f64>,
}

impl CombinedWeights {
    /// Wraps an explicit weight vector, rejecting non-positive coordinates.
    pub fn from_weights(user: impl Into<String>, z: Vec<f64>) -> Result<Self> {
        if let Some(bad) = z.iter().position(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::invalid(
                "weights",
                format!("coordinate {bad} is not strictly positive"),
            ));
        }
        Ok(Self {
            user: user.into(),
            z,
        })
    }

    /// Every coordinate equal to 1: plain cosine.
    pub fn uniform(user: impl Into<String>, dim: usize) -> Self {
        Self {
            user: user.into(),
            z: vec![1.0; dim],
        }
    }

    pub fn user(&self) -> &str {
        &self.user
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

/// `z = max(gamma, floor) ∘ mask`.
pub fn combine_weights(profile: &ToleranceProfile, mask: &[f64]) -> Result<CombinedWeights> {
    if profile.gamma.len() != mask.len() {
        return Err(Error::LengthMismatch {
            expected: profile.gamma.len(),
            got: mask.len(),
        });
    }
    let z = profile
        .gamma
        .iter()
        .zip(mask)
        .map(|(&g, &w)| g.max(TOLERANCE_FLOOR) * w)
        .collect();
    CombinedWeights::from_weights(profile.user.clone(), z)
}

/// Tolerance-only weights: floored `gamma` under a uniform mask.
pub fn tolerance_weights(profile: &ToleranceProfile) -> CombinedWeights {
    let z = profile
        .gamma
        .iter()
        .map(|&g| g.max(TOLERANCE_FLOOR))
        .collect();
    CombinedWeights {
        user: profile.user.clone(),
        z,
    }
}

/// Fairness-only weights: the protected mask under uniform tolerance.
pub fn fairness_weights(user: impl Into<String>, mask: &[f64]) -> Result<CombinedWeights> {
    CombinedWeights::from_weights(user, mask.to_vec())
}

/// Tolerance profiles for every user, computed from the training split only.
/// Users without training items map to `None`.
pub fn profile_users(
    catalog: &ItemCatalog,
    interactions: &Interactions,
) -> Vec<Option<ToleranceProfile>> {
    let train = interactions.items_by_user(Split::Train);
    train
        .par_iter()
        .enumerate()
        .map(|(u, items)| {
            if items.is_empty() {
                return None;
            }
            let profile: Vec<&Item> = items.iter().map(|&i| catalog.item(i)).collect();
            tolerance(interactions.user_id(UserIdx(u)), &profile, catalog.schema()).ok()
        })
        .collect()
}

/// Long-format `user_id,feature,tau` export.
pub fn write_tolerances<'a>(
    path: impl AsRef<Path>,
    profiles: impl IntoIterator<Item = &'a ToleranceProfile>,
    schema: &FeatureSchema,
) -> Result<()> {
    let mut w = crate::catalog::io_writer(path.as_ref())?;
    w.write_record(["user_id", "feature", "tau"])?;
    for p in profiles {
        for (feature, tau) in schema.features().iter().zip(&p.tau) {
            w.write_record([p.user.as_str(), feature.name.as_str(), &tau.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
