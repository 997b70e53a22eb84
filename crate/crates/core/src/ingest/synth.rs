//! Seeded synthetic catalogs and interactions.
//!
//! Each item draws one value per feature from a Zipf-like distribution. With
//! probability `prevalence` an item is protected: one of the protected
//! features is picked at random and the item takes one of that feature's
//! protected values (the last `protected_values` values). Otherwise every
//! protected feature takes an unprotected value.
//!
//! Each user copies a favourite value per feature from a random anchor item
//! and draws a concentration `c_f` per feature. Items are sampled without
//! replacement with weight `popularity · (1 + Σ_f (e^{c_f} − 1)·[favourite
//! on f])`, so a high concentration yields a low-entropy profile on that
//! feature. An infinite concentration restricts the user to the favourite.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{Interactions, ItemCatalog, RawInteraction, RawItem, Split};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthFeature {
    pub name: String,
    pub cardinality: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub users: usize,
    pub items: usize,
    pub features: Vec<SynthFeature>,
    /// Features carrying protected values; on each, the last
    /// `protected_values` values are protected.
    pub protected_features: Vec<String>,
    pub protected_values: usize,
    pub prevalence: f64,
    /// Popularity multiplier applied to protected items.
    pub protected_popularity: f64,
    /// Exponent of the Zipf-like value distribution on every feature.
    pub value_skew: f64,
    /// Per-(user, feature) concentration is drawn uniformly from this range,
    /// or from its two endpoints with equal odds when `bimodal` is set.
    pub concentration: (f64, f64),
    pub bimodal: bool,
    pub ratings_per_user: usize,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            users: 200,
            items: 400,
            features: vec![
                SynthFeature {
                    name: "sector".into(),
                    cardinality: 12,
                },
                SynthFeature {
                    name: "region".into(),
                    cardinality: 6,
                },
                SynthFeature {
                    name: "amount".into(),
                    cardinality: 4,
                },
            ],
            protected_features: vec!["sector".into(), "region".into()],
            protected_values: 2,
            prevalence: 0.1,
            protected_popularity: 1.0,
            value_skew: 1.0,
            concentration: (0.0, 5.0),
            bimodal: false,
            ratings_per_user: 20,
            test_fraction: 0.2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub catalog: ItemCatalog,
    pub interactions: Interactions,
    /// `(feature, value)` pairs marked protected.
    pub protected: Vec<(String, String)>,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.users == 0 || self.items == 0 {
            return Err(Error::invalid("users/items", "sizes must be positive"));
        }
        if self.features.is_empty() {
            return Err(Error::invalid("features", "need at least one feature"));
        }
        if let Some(f) = self.features.iter().find(|f| f.cardinality == 0) {
            return Err(Error::invalid(
                "features",
                format!("{:?} has cardinality 0", f.name),
            ));
        }
        let names: BTreeSet<&str> = self.features.iter().map(|f| f.name.as_str()).collect();
        if names.len() != self.features.len() {
            return Err(Error::invalid("features", "feature names must be distinct"));
        }
        if self.protected_features.is_empty() {
            return Err(Error::invalid("protected_features", "need at least one"));
        }
        for name in &self.protected_features {
            let f = self
                .features
                .iter()
                .find(|f| &f.name == name)
                .ok_or_else(|| Error::UnknownFeature(name.clone()))?;
            if self.protected_values == 0 || self.protected_values >= f.cardinality {
                return Err(Error::invalid(
                    "protected_values",
                    format!("{name:?} must keep at least one protected and one unprotected value"),
                ));
            }
        }
        if !(self.prevalence > 0.0 && self.prevalence < 1.0) {
            return Err(Error::invalid("prevalence", "must lie in (0, 1)"));
        }
        if !(self.protected_popularity > 0.0) || !self.protected_popularity.is_finite() {
            return Err(Error::invalid("protected_popularity", "must be positive"));
        }
        if !(self.value_skew >= 0.0) || !self.value_skew.is_finite() {
            return Err(Error::invalid("value_skew", "must be non-negative"));
        }
        let (lo, hi) = self.concentration;
        if !(lo >= 0.0 && lo <= hi) || (hi.is_infinite() && lo != hi && !self.bimodal) {
            return Err(Error::invalid(
                "concentration",
                "need 0 <= min <= max, and an infinite max only with an equal min",
            ));
        }
        if self.ratings_per_user == 0 || self.ratings_per_user > self.items {
            return Err(Error::invalid(
                "ratings_per_user",
                format!(
                    "infeasible density: {} ratings over {} items",
                    self.ratings_per_user, self.items
                ),
            ));
        }
        if !(0.0..1.0).contains(&self.test_fraction) {
            return Err(Error::invalid("test_fraction", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

fn value_name(j: usize, v: usize) -> String {
    format!("f{j}v{v:02}")
}

/// Draws an index with probability proportional to `weights`.
fn draw(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    weights.len() - 1
}

pub fn synth_dataset(spec: &SynthSpec) -> Result<SynthData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let protected_idx: Vec<usize> = spec
        .protected_features
        .iter()
        .map(|n| {
            spec.features
                .iter()
                .position(|f| &f.name == n)
                .expect("validated")
        })
        .collect();
    let zipf = |n: usize| -> Vec<f64> {
        (0..n)
            .map(|r| 1.0 / ((r + 1) as f64).powf(spec.value_skew))
            .collect()
    };
    let first_protected = |j: usize| spec.features[j].cardinality - spec.protected_values;

    let mut values = vec![vec![0usize; spec.features.len()]; spec.items];
    let mut popularity = vec![0.0; spec.items];
    for i in 0..spec.items {
        let chosen = rng
            .gen_bool(spec.prevalence)
            .then(|| protected_idx[rng.gen_range(0..protected_idx.len())]);
        for (j, f) in spec.features.iter().enumerate() {
            values[i][j] = if chosen == Some(j) {
                rng.gen_range(first_protected(j)..f.cardinality)
            } else if protected_idx.contains(&j) {
                draw(&mut rng, &zipf(first_protected(j)))
            } else {
                draw(&mut rng, &zipf(f.cardinality))
            };
        }
        let u: f64 = 1.0 - rng.gen::<f64>();
        popularity[i] = u.powf(-0.5);
        if chosen.is_some() {
            popularity[i] *= spec.protected_popularity;
        }
    }

    let (lo, hi) = spec.concentration;
    let mut records: Vec<RawInteraction> = Vec::new();
    let width = (spec.users.max(spec.items) - 1).to_string().len();
    for u in 0..spec.users {
        let anchor = rng.gen_range(0..spec.items);
        let conc: Vec<f64> = (0..spec.features.len())
            .map(|_| match (spec.bimodal, lo == hi) {
                (_, true) => lo,
                (true, false) => {
                    if rng.gen_bool(0.5) {
                        hi
                    } else {
                        lo
                    }
                }
                (false, false) => rng.gen_range(lo..hi),
            })
            .collect();
        // log-weights; items excluded by an infinite concentration get -inf
        let logw: Vec<f64> = (0..spec.items)
            .map(|i| {
                let mut boost = 1.0;
                for j in 0..spec.features.len() {
                    let fav = values[i][j] == values[anchor][j];
                    if conc[j].is_infinite() {
                        if !fav {
                            return f64::NEG_INFINITY;
                        }
                    } else if fav {
                        boost += conc[j].exp_m1();
                    }
                }
                popularity[i].ln() + boost.ln()
            })
            .collect();
        // weighted sampling without replacement via exponential keys
        let mut keyed: Vec<(f64, usize)> = logw
            .iter()
            .enumerate()
            .map(|(i, &lw)| {
                let e = -(1.0 - rng.gen::<f64>()).ln();
                (e.ln() - lw, i)
            })
            .filter(|(k, _)| k.is_finite())
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        keyed.truncate(spec.ratings_per_user);
        keyed.shuffle(&mut rng);
        let n_test =
            ((spec.test_fraction * keyed.len() as f64).floor() as usize).min(keyed.len() - 1);
        for (pos, &(_, i)) in keyed.iter().enumerate() {
            let matches = (0..spec.features.len())
                .filter(|&j| values[i][j] == values[anchor][j])
                .count();
            let rating = 1.0 + (4.0 * matches as f64 / spec.features.len() as f64).round();
            let split = if pos < n_test {
                Split::Test
            } else {
                Split::Train
            };
            records.push((
                format!("u{u:0width$}"),
                format!("i{i:0width$}"),
                rating,
                split,
            ));
        }
    }

    let raw: Vec<RawItem> = values
        .iter()
        .enumerate()
        .map(|(i, vals)| {
            let features: BTreeMap<String, BTreeSet<String>> = spec
                .features
                .iter()
                .enumerate()
                .map(|(j, f)| {
                    (
                        f.name.clone(),
                        [value_name(j, vals[j])].into_iter().collect(),
                    )
                })
                .collect();
            (format!("i{i:0width$}"), features)
        })
        .collect();
    let catalog = ItemCatalog::from_raw(&raw)?;
    let interactions = Interactions::new(&catalog, records)?;
    let protected = protected_idx
        .iter()
        .flat_map(|&j| {
            (first_protected(j)..spec.features[j].cardinality)
                .map(move |v| (spec.features[j].name.clone(), value_name(j, v)))
        })
        .collect();
    Ok(SynthData {
        catalog,
        interactions,
        protected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::ProtectedSpec;
    use crate::profiles::profile_users;

    fn spec() -> SynthSpec {
        SynthSpec {
            users: 50,
            items: 1000,
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn protected_prevalence_within_three_sd() {
        let s = spec();
        let data = synth_dataset(&s).unwrap();
        let group = ProtectedSpec::new(data.protected.clone(), 1.0)
            .unwrap()
            .resolve(data.catalog.schema())
            .unwrap();
        let count = data
            .catalog
            .items()
            .iter()
            .filter(|i| group.is_protected(i))
            .count() as f64;
        let mean = s.prevalence * s.items as f64;
        let sd = (mean * (1.0 - s.prevalence)).sqrt();
        assert!((count - mean).abs() <= 3.0 * sd, "count {count}");
    }

    #[test]
    fn same_seed_same_data() {
        let a = synth_dataset(&spec()).unwrap();
        let b = synth_dataset(&spec()).unwrap();
        assert_eq!(a.catalog.to_raw(), b.catalog.to_raw());
        assert_eq!(
            a.interactions.to_raw(&a.catalog),
            b.interactions.to_raw(&b.catalog)
        );
        let c = synth_dataset(&SynthSpec { seed: 12, ..spec() }).unwrap();
        assert_ne!(
            a.interactions.to_raw(&a.catalog),
            c.interactions.to_raw(&c.catalog)
        );
    }

    #[test]
    fn infinite_concentration_gives_zero_tolerance() {
        let s = SynthSpec {
            concentration: (f64::INFINITY, f64::INFINITY),
            ..spec()
        };
        let data = synth_dataset(&s).unwrap();
        for p in profile_users(&data.catalog, &data.interactions)
            .into_iter()
            .flatten()
        {
            assert!(p.tau().iter().all(|&t| t == 0.0), "{:?}", p.tau());
        }
    }

    #[test]
    fn sizes_and_splits() {
        let data = synth_dataset(&spec()).unwrap();
        assert_eq!(data.catalog.len(), 1000);
        assert_eq!(data.interactions.n_users(), 50);
        let train = data.interactions.items_by_user(Split::Train);
        let test = data.interactions.items_by_user(Split::Test);
        for (tr, te) in train.iter().zip(&test) {
            assert_eq!(tr.len() + te.len(), 20);
            assert_eq!(te.len(), 4);
        }
        assert!(data
            .interactions
            .ratings()
            .iter()
            .all(|r| (1.0..=5.0).contains(&r.value)));
    }

    #[test]
    fn invalid_specs() {
        for bad in [
            SynthSpec {
                prevalence: 0.0,
                ..spec()
            },
            SynthSpec {
                prevalence: 1.0,
                ..spec()
            },
            SynthSpec {
                ratings_per_user: 5000,
                ..spec()
            },
            SynthSpec { users: 0, ..spec() },
            SynthSpec {
                protected_values: 6,
                ..spec()
            },
            SynthSpec {
                protected_features: vec!["nope".into()],
                ..spec()
            },
            SynthSpec {
                protected_features: vec![],
                ..spec()
            },
            SynthSpec {
                concentration: (3.0, 1.0),
                ..spec()
            },
        ] {
            assert!(synth_dataset(&bad).is_err(), "{bad:?}");
        }
    }
}
