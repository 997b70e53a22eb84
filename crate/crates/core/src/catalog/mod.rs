//! Items, users and the categorical feature space they live in.
//!
//! Every item is described by a set of categorical feature dimensions. For
//! similarity and fairness computations the feature vector is expanded into a
//! dummy (one coordinate per feature value) space, where held values are `1`
//! and all other coordinates are smoothed to [`EPSILON`] instead of zero.
//!
//! Dummy coordinates are laid out feature by feature, features ordered by
//! name and values within a feature ordered lexicographically.

mod io;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Range;

use crate::error::{Error, Result};

pub(crate) use io::{column as io_column, reader as io_reader, writer as io_writer};
pub use io::{read_interactions, read_items, write_interactions, write_items};

/// Smoothing value for dummy coordinates an item does not hold.
pub const EPSILON: f64 = 2.2e-16;

/// Raw item description: id plus feature name → set of values.
pub type RawItem = (String, BTreeMap<String, BTreeSet<String>>);

/// Dense index of an item inside an [`ItemCatalog`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemIdx(pub usize);

/// Dense index of a user inside an [`Interactions`] set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UserIdx(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feature {
    pub name: String,
    pub values: Vec<String>,
}

impl Feature {
    pub fn cardinality(&self) -> usize {
        self.values.len()
    }
}

/// Ordered feature dimensions and the dummy index space derived from them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    features: Vec<Feature>,
    offsets: Vec<usize>,
    dim: usize,
}

impl FeatureSchema {
    /// Builds a schema from feature names and their values. Features and values
    /// are sorted lexicographically; duplicates and empty features are rejected.
    pub fn new<N, V, I>(features: I) -> Result<Self>
    where
        I: IntoIterator<Item = (N, Vec<V>)>,
        N: Into<String>,
        V: Into<String>,
    {
        let mut features: Vec<Feature> = features
            .into_iter()
            .map(|(name, values)| Feature {
                name: name.into(),
                values: values.into_iter().map(Into::into).collect(),
            })
            .collect();
        if features.is_empty() {
            return Err(Error::Empty("feature schema has no features".into()));
        }
        features.sort_by(|a, b| a.name.cmp(&b.name));
        for pair in features.windows(2) {
            if pair[0].name == pair[1].name {
                return Err(Error::invalid(
                    "schema",
                    format!("duplicate feature {:?}", pair[0].name),
                ));
            }
        }
        for feature in &mut features {
            if feature.values.is_empty() {
                return Err(Error::invalid(
                    "schema",
                    format!("feature {:?} has no values", feature.name),
                ));
            }
            feature.values.sort();
            let before = feature.values.len();
            feature.values.dedup();
            if feature.values.len() != before {
                return Err(Error::invalid(
                    "schema",
                    format!("feature {:?} lists a value twice", feature.name),
                ));
            }
        }
        let mut offsets = Vec::with_capacity(features.len());
        let mut dim = 0;
        for feature in &features {
            offsets.push(dim);
            dim += feature.cardinality();
        }
        Ok(Self {
            features,
            offsets,
            dim,
        })
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    /// Size of the dummy space, the sum of all feature cardinalities.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cardinality(&self, feature: usize) -> usize {
        self.features[feature].cardinality()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn value_index(&self, feature: usize, value: &str) -> Option<usize> {
        self.features[feature]
            .values
            .binary_search_by(|v| v.as_str().cmp(value))
            .ok()
    }

    /// Dummy coordinate of `(feature, value)`, both by index.
    pub fn dummy_index(&self, feature: usize, value: usize) -> usize {
        debug_assert!(value < self.cardinality(feature));
        self.offsets[feature] + value
    }

    /// Looks up the dummy coordinate of a named `(feature, value)` pair.
    pub fn resolve(&self, feature: &str, value: &str) -> Result<usize> {
        let f = self
            .feature_index(feature)
            .ok_or_else(|| Error::UnknownFeature(feature.to_string()))?;
        let v = self
            .value_index(f, value)
            .ok_or_else(|| Error::UnknownValue {
                feature: feature.to_string(),
                value: value.to_string(),
            })?;
        Ok(self.dummy_index(f, v))
    }

    /// Range of dummy coordinates that belong to `feature`.
    pub fn block(&self, feature: usize) -> Range<usize> {
        let start = self.offsets[feature];
        start..start + self.cardinality(feature)
    }

    /// Feature index owning dummy coordinate `dummy`.
    pub fn feature_of(&self, dummy: usize) -> usize {
        debug_assert!(dummy < self.dim);
        self.offsets.partition_point(|&o| o <= dummy) - 1
    }

    /// `(feature name, value name)` for a dummy coordinate.
    pub fn dummy_label(&self, dummy: usize) -> (&str, &str) {
        let f = self.feature_of(dummy);
        let feature = &self.features[f];
        (&feature.name, &feature.values[dummy - self.offsets[f]])
    }
}

/// Derives a schema from raw items: the union of observed values per feature.
///
/// All items must carry the same feature names, and every feature must hold
/// at least one value.
pub fn build_schema(raw: &[RawItem]) -> Result<FeatureSchema> {
    let (first_id, first) = raw
        .first()
        .ok_or_else(|| Error::Empty("no items to build a schema from".into()))?;
    let names: BTreeSet<&String> = first.keys().collect();
    if names.is_empty() {
        return Err(Error::Empty(format!("item {first_id:?} has no features")));
    }
    let mut values: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (id, features) in raw {
        for name in &names {
            match features.get(*name) {
                Some(set) if !set.is_empty() => {
                    values
                        .entry(name.as_str())
                        .or_default()
                        .extend(set.iter().map(String::as_str));
                }
                _ => {
                    return Err(Error::MissingFeature {
                        item: id.clone(),
                        feature: (*name).clone(),
                    })
                }
            }
        }
        if let Some(extra) = features.keys().find(|k| !names.contains(k)) {
            return Err(Error::MissingFeature {
                item: first_id.clone(),
                feature: extra.clone(),
            });
        }
    }
    FeatureSchema::new(
        values
            .into_iter()
            .map(|(name, set)| (name, set.into_iter().collect::<Vec<_>>())),
    )
}

/// An item with its value assignment, stored as schema indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    id: String,
    values: Vec<Vec<usize>>,
    held: Vec<usize>,
}

impl Item {
    /// Validates a raw assignment against `schema`.
    pub fn parse(
        id: impl Into<String>,
        features: &BTreeMap<String, BTreeSet<String>>,
        schema: &FeatureSchema,
    ) -> Result<Self> {
        let id = id.into();
        for name in features.keys() {
            if schema.feature_index(name).is_none() {
                return Err(Error::UnknownFeature(name.clone()));
            }
        }
        let mut values = Vec::with_capacity(schema.n_features());
        let mut held = Vec::new();
        for (j, feature) in schema.features().iter().enumerate() {
            let set = features
                .get(&feature.name)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| Error::MissingFeature {
                    item: id.clone(),
                    feature: feature.name.clone(),
                })?;
            let mut idx = Vec::with_capacity(set.len());
            for value in set {
                let v = schema
                    .value_index(j, value)
                    .ok_or_else(|| Error::UnknownValue {
                        feature: feature.name.clone(),
                        value: value.clone(),
                    })?;
                idx.push(v);
                held.push(schema.dummy_index(j, v));
            }
            values.push(idx);
        }
        Ok(Self { id, values, held })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Value indices held on `feature`, ascending.
    pub fn values(&self, feature: usize) -> &[usize] {
        &self.values[feature]
    }

    /// Dummy coordinates equal to 1, ascending.
    pub fn held(&self) -> &[usize] {
        &self.held
    }

    pub fn holds(&self, dummy: usize) -> bool {
        self.held.binary_search(&dummy).is_ok()
    }
}

/// Smoothed binary encoding of an item.
#[derive(Debug, Clone, PartialEq)]
pub struct DummyVector(Vec<f64>);

impl DummyVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for DummyVector {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

/// Encodes `item` as a smoothed dummy vector: 1 for held values, [`EPSILON`] elsewhere.
pub fn encode_item(item: &Item, schema: &FeatureSchema) -> DummyVector {
    let mut values = vec![EPSILON; schema.dim()];
    for &d in item.held() {
        values[d] = 1.0;
    }
    DummyVector(values)
}

/// Immutable collection of items sharing one schema. Items are sorted by id,
/// so ascending [`ItemIdx`] is ascending id.
#[derive(Debug, Clone)]
pub struct ItemCatalog {
    schema: FeatureSchema,
    items: Vec<Item>,
    index: HashMap<String, ItemIdx>,
}

impl ItemCatalog {
    /// Builds the schema from the items themselves, then the catalog.
    pub fn from_raw(raw: &[RawItem]) -> Result<Self> {
        let schema = build_schema(raw)?;
        Self::with_schema(schema, raw)
    }

    pub fn with_schema(schema: FeatureSchema, raw: &[RawItem]) -> Result<Self> {
        let mut items = raw
            .iter()
            .map(|(id, features)| Item::parse(id.clone(), features, &schema))
            .collect::<Result<Vec<_>>>()?;
        items.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(pair) = items.windows(2).find(|p| p[0].id == p[1].id) {
            return Err(Error::DuplicateItem(pair[0].id.clone()));
        }
        let index = items
            .iter()
            .enumerate()
            .map(|(i, item)| (item.id.clone(), ItemIdx(i)))
            .collect();
        Ok(Self {
            schema,
            items,
            index,
        })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn item(&self, idx: ItemIdx) -> &Item {
        &self.items[idx.0]
    }

    pub fn find(&self, id: &str) -> Option<ItemIdx> {
        self.index.get(id).copied()
    }

    pub fn encode(&self, idx: ItemIdx) -> DummyVector {
        encode_item(self.item(idx), &self.schema)
    }

    /// Raw form of every item, suitable for re-serialization.
    pub fn to_raw(&self) -> Vec<RawItem> {
        self.items
            .iter()
            .map(|item| {
                let features = self
                    .schema
                    .features()
                    .iter()
                    .enumerate()
                    .map(|(j, f)| {
                        let set = item.values(j).iter().map(|&v| f.values[v].clone());
                        (f.name.clone(), set.collect())
                    })
                    .collect();
                (item.id.clone(), features)
            })
            .collect()
    }
}

/// Designated protected `(feature, value)` pairs and their weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtectedSpec {
    entries: BTreeSet<(String, String)>,
    alpha: f64,
    unprotected_weight: f64,
}

impl ProtectedSpec {
    /// Protected pairs weighted `alpha`, everything else `alpha / 100`.
    pub fn new<F, V>(entries: impl IntoIterator<Item = (F, V)>, alpha: f64) -> Result<Self>
    where
        F: Into<String>,
        V: Into<String>,
    {
        Self::with_weights(entries, alpha, alpha / 100.0)
    }

    pub fn with_weights<F, V>(
        entries: impl IntoIterator<Item = (F, V)>,
        alpha: f64,
        unprotected_weight: f64,
    ) -> Result<Self>
    where
        F: Into<String>,
        V: Into<String>,
    {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid("alpha", "alpha must be positive"));
        }
        if !(unprotected_weight > 0.0) {
            return Err(Error::invalid(
                "unprotected_weight",
                "unprotected weight must be positive",
            ));
        }
        if unprotected_weight >= alpha {
            return Err(Error::invalid(
                "unprotected_weight",
                "unprotected weight must be below alpha",
            ));
        }
        Ok(Self {
            entries: entries
                .into_iter()
                .map(|(f, v)| (f.into(), v.into()))
                .collect(),
            alpha,
            unprotected_weight,
        })
    }

    pub fn entries(&self) -> &BTreeSet<(String, String)> {
        &self.entries
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn unprotected_weight(&self) -> f64 {
        self.unprotected_weight
    }

    /// Resolves the named entries against a schema.
    pub fn resolve(&self, schema: &FeatureSchema) -> Result<ProtectedGroup> {
        let mut protected = vec![false; schema.dim()];
        for (feature, value) in &self.entries {
            protected[schema.resolve(feature, value)?] = true;
        }
        let mask = protected
            .iter()
            .map(|&p| {
                if p {
                    self.alpha
                } else {
                    self.unprotected_weight
                }
            })
            .collect();
        Ok(ProtectedGroup { protected, mask })
    }
}

/// A [`ProtectedSpec`] bound to a schema's dummy space.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtectedGroup {
    protected: Vec<bool>,
    mask: Vec<f64>,
}

impl ProtectedGroup {
    /// Per-coordinate weight: alpha for protected values, the unprotected weight otherwise.
    pub fn mask(&self) -> &[f64] {
        &self.mask
    }

    pub fn is_protected_dummy(&self, dummy: usize) -> bool {
        self.protected[dummy]
    }

    pub fn protected_dummies(&self) -> impl Iterator<Item = usize> + '_ {
        self.protected
            .iter()
            .enumerate()
            .filter_map(|(i, &p)| p.then_some(i))
    }

    pub fn is_protected(&self, item: &Item) -> bool {
        item.held().iter().any(|&d| self.protected[d])
    }
}

/// The weight vector `W` over the dummy space.
pub fn protected_mask(spec: &ProtectedSpec, schema: &FeatureSchema) -> Result<Vec<f64>> {
    Ok(spec.resolve(schema)?.mask)
}

/// True iff `item` holds at least one protected value.
pub fn is_protected_item(item: &Item, group: &ProtectedGroup) -> bool {
    group.is_protected(item)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::invalid(
                "split",
                format!("expected \"train\" or \"test\", got {other:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rating {
    pub user: UserIdx,
    pub item: ItemIdx,
    pub value: f64,
    pub split: Split,
}

/// Raw interaction record: `(user id, item id, rating, split)`.
pub type RawInteraction = (String, String, f64, Split);

/// Observed ratings bound to a catalog. Users are sorted by id.
#[derive(Debug, Clone)]
pub struct Interactions {
    users: Vec<String>,
    user_index: HashMap<String, UserIdx>,
    ratings: Vec<Rating>,
}

impl Interactions {
    pub fn new(
        catalog: &ItemCatalog,
        records: impl IntoIterator<Item = RawInteraction>,
    ) -> Result<Self> {
        let records: Vec<RawInteraction> = records.into_iter().collect();
        let users: Vec<String> = records
            .iter()
            .map(|r| r.0.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let user_index: HashMap<String, UserIdx> = users
            .iter()
            .enumerate()
            .map(|(i, u)| (u.clone(), UserIdx(i)))
            .collect();
        let mut seen = BTreeSet::new();
        let mut ratings = Vec::with_capacity(records.len());
        for (user, item, value, split) in records {
            let item_idx = catalog
                .find(&item)
                .ok_or_else(|| Error::UnknownItem(item.clone()))?;
            if !value.is_finite() {
                return Err(Error::invalid(
                    "rating",
                    format!("non-finite rating for ({user:?}, {item:?})"),
                ));
            }
            let user_idx = user_index[&user];
            if !seen.insert((split, user_idx, item_idx)) {
                return Err(Error::DuplicatePair { user, item });
            }
            ratings.push(Rating {
                user: user_idx,
                item: item_idx,
                value,
                split,
            });
        }
        Ok(Self {
            users,
            user_index,
            ratings,
        })
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn user_id(&self, user: UserIdx) -> &str {
        &self.users[user.0]
    }

    pub fn find_user(&self, id: &str) -> Option<UserIdx> {
        self.user_index.get(id).copied()
    }

    pub fn ratings(&self) -> &[Rating] {
        &self.ratings
    }

    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }

    /// Distinct items per user within `split`, ascending.
    pub fn items_by_user(&self, split: Split) -> Vec<Vec<ItemIdx>> {
        let mut out = vec![Vec::new(); self.users.len()];
        for r in self.ratings.iter().filter(|r| r.split == split) {
            out[r.user.0].push(r.item);
        }
        for items in &mut out {
            items.sort_unstable();
            items.dedup();
        }
        out
    }

    /// Same ratings with splits reassigned by `assign(position, rating)`.
    pub fn resplit(&self, mut assign: impl FnMut(usize, &Rating) -> Split) -> Result<Self> {
        let mut ratings = self.ratings.clone();
        let mut seen = BTreeSet::new();
        for (i, r) in ratings.iter_mut().enumerate() {
            r.split = assign(i, r);
            if !seen.insert((r.split, r.user, r.item)) {
                return Err(Error::DuplicatePair {
                    user: self.users[r.user.0].clone(),
                    item: format!("#{}", r.item.0),
                });
            }
        }
        Ok(Self {
            users: self.users.clone(),
            user_index: self.user_index.clone(),
            ratings,
        })
    }

    /// Raw records in stored order.
    pub fn to_raw(&self, catalog: &ItemCatalog) -> Vec<RawInteraction> {
        self.ratings
            .iter()
            .map(|r| {
                (
                    self.users[r.user.0].clone(),
                    catalog.item(r.item).id().to_string(),
                    r.value,
                    r.split,
                )
            })
            .collect()
    }
}
