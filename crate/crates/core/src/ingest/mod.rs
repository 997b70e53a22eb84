//! Raw data to catalogs: column categorization, the funding-rate feature,
//! train/test splitting, pseudo-items and synthetic datasets.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{io_reader, Interactions, RawInteraction, RawItem, Split};
use crate::error::{Error, Result};

mod pseudo;
mod synth;

pub use pseudo::{
    build_pseudo_items, cluster_items, silhouette_score, Linkage, PseudoItemConfig, PseudoItems,
};
pub use synth::{synth_dataset, SynthData, SynthFeature, SynthSpec};

/// Item metadata keyed by an id column; every other column is a string cell.
#[derive(Debug, Clone)]
pub struct RawTable {
    columns: Vec<String>,
    rows: Vec<(String, Vec<String>)>,
}

impl RawTable {
    pub fn new(columns: Vec<String>, rows: Vec<(String, Vec<String>)>) -> Result<Self> {
        for (id, cells) in &rows {
            if cells.len() != columns.len() {
                return Err(Error::invalid(
                    "table",
                    format!(
                        "row {id:?} has {} cells, expected {}",
                        cells.len(),
                        columns.len()
                    ),
                ));
            }
        }
        Ok(Self { columns, rows })
    }

    /// Reads a delimited file; `id_column` becomes the row key.
    pub fn read(path: impl AsRef<Path>, id_column: &str) -> Result<Self> {
        let path = path.as_ref();
        let mut rdr = io_reader(path)?;
        let headers = rdr.headers()?.clone();
        let id = headers
            .iter()
            .position(|h| h == id_column)
            .ok_or_else(|| Error::MissingColumn(id_column.to_string()))?;
        let columns = headers
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != id)
            .map(|(_, h)| h.to_string())
            .collect();
        let mut rows = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let cells = row
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != id)
                .map(|(_, c)| c.to_string())
                .collect();
            rows.push((row[id].to_string(), cells));
        }
        Self::new(columns, rows)
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[(String, Vec<String>)] {
        &self.rows
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    fn numeric(&self, col: usize) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .map(|(id, cells)| {
                cells[col]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        Error::invalid(
                            format!("column {}", self.columns[col]),
                            format!("item {id:?}: {:?} is not a finite number", cells[col]),
                        )
                    })
            })
            .collect()
    }
}

/// How one source column becomes one categorical feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RuleKind {
    /// Strictly above the reference mean gets `above`, the rest `below`.
    AboveMean { above: String, below: String },
    /// Below `threshold` gets `below`, at or above gets `above`.
    Threshold {
        threshold: f64,
        below: String,
        above: String,
    },
    /// Quantile buckets labelled `b1..bN`, zero-padded.
    Buckets { count: usize },
    /// Cell copied as is; `|` separates multiple values.
    Passthrough,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategorizationRule {
    pub column: String,
    pub feature: String,
    #[serde(flatten)]
    pub kind: RuleKind,
}

impl CategorizationRule {
    pub fn new(column: impl Into<String>, feature: impl Into<String>, kind: RuleKind) -> Self {
        Self {
            column: column.into(),
            feature: feature.into(),
            kind,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            RuleKind::Buckets { count } if *count < 2 => {
                Err(Error::invalid("count", "bucket count must be at least 2"))
            }
            RuleKind::Threshold { threshold, .. } if !threshold.is_finite() => {
                Err(Error::invalid("threshold", "threshold must be finite"))
            }
            _ => Ok(()),
        }
    }
}

/// Applies `rules` to every row. Means for [`RuleKind::AboveMean`] are taken
/// over the rows whose id is in `reference` (all rows when `None`).
pub fn categorize(
    table: &RawTable,
    rules: &[CategorizationRule],
    reference: Option<&BTreeSet<String>>,
) -> Result<Vec<RawItem>> {
    if rules.is_empty() {
        return Err(Error::Empty("categorization rules".into()));
    }
    let mut items: Vec<RawItem> = table
        .rows
        .iter()
        .map(|(id, _)| (id.clone(), BTreeMap::new()))
        .collect();
    for rule in rules {
        rule.validate()?;
        let col = table.column(&rule.column)?;
        let labels: Vec<BTreeSet<String>> = match &rule.kind {
            RuleKind::AboveMean { above, below } => {
                let values = table.numeric(col)?;
                let reference: Vec<f64> = values
                    .iter()
                    .zip(&table.rows)
                    .filter(|(_, (id, _))| reference.is_none_or(|r| r.contains(id)))
                    .map(|(v, _)| *v)
                    .collect();
                if reference.is_empty() {
                    return Err(Error::Empty(format!(
                        "reference rows for column {:?}",
                        rule.column
                    )));
                }
                let mean = reference.iter().sum::<f64>() / reference.len() as f64;
                values
                    .iter()
                    .map(|&v| single(if v > mean { above } else { below }))
                    .collect()
            }
            RuleKind::Threshold {
                threshold,
                below,
                above,
            } => table
                .numeric(col)?
                .iter()
                .map(|&v| single(if v < *threshold { below } else { above }))
                .collect(),
            RuleKind::Buckets { count } => {
                let values = table.numeric(col)?;
                let bounds = bucket_bounds(&values, *count)
                    .ok_or_else(|| Error::ConstantColumn(rule.column.clone()))?;
                let width = count.to_string().len();
                values
                    .iter()
                    .map(|v| {
                        let b = bounds.partition_point(|x| x <= v);
                        single(&format!("b{:0width$}", b + 1))
                    })
                    .collect()
            }
            RuleKind::Passthrough => table
                .rows
                .iter()
                .map(|(id, cells)| {
                    let set: BTreeSet<String> = cells[col]
                        .split('|')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(str::to_string)
                        .collect();
                    if set.is_empty() {
                        return Err(Error::MissingFeature {
                            item: id.clone(),
                            feature: rule.feature.clone(),
                        });
                    }
                    Ok(set)
                })
                .collect::<Result<_>>()?,
        };
        for ((_, features), set) in items.iter_mut().zip(labels) {
            features
                .entry(rule.feature.clone())
                .or_default()
                .extend(set);
        }
    }
    Ok(items)
}

fn single(label: &str) -> BTreeSet<String> {
    [label.to_string()].into_iter().collect()
}

/// Lower edges of buckets `2..=count`: `sorted[ceil(i·n/count)]`.
fn bucket_bounds(values: &[f64], count: usize) -> Option<Vec<f64>> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.first()? == sorted.last()? {
        return None;
    }
    let n = sorted.len();
    Some(
        (1..count)
            .map(|i| sorted[((i * n).div_ceil(count)).min(n - 1)])
            .collect(),
    )
}

/// Percentage funding rate: `100 / days`.
pub fn pfr(days_to_fund: f64) -> Result<f64> {
    if !(days_to_fund > 0.0) || !days_to_fund.is_finite() {
        return Err(Error::invalid(
            "days_to_fund",
            format!("must be positive, got {days_to_fund}"),
        ));
    }
    Ok(100.0 / days_to_fund)
}

/// How [`split_train_test`] assigns ratings to the test split.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// `floor(fraction·n)` of all ratings, drawn uniformly.
    #[default]
    Interaction,
    /// `floor(fraction·n_u)` of each user's ratings, always leaving at least
    /// one in train.
    User,
}

/// Random train/test holdout. Ratings are shuffled from (user id, item id)
/// order, so the result does not depend on input order.
pub fn split_train_test(
    interactions: &Interactions,
    fraction: f64,
    mode: SplitMode,
    seed: u64,
) -> Result<Interactions> {
    let keys: Vec<(usize, usize)> = interactions
        .ratings()
        .iter()
        .map(|r| (r.user.0, r.item.0))
        .collect();
    let split = holdout(&keys, interactions.n_users(), fraction, mode, seed)?;
    interactions.resplit(|i, _| split[i])
}

/// [`split_train_test`] on raw records, before any catalog exists. Both
/// functions agree for the same seed.
pub fn split_records(
    mut records: Vec<RawInteraction>,
    fraction: f64,
    mode: SplitMode,
    seed: u64,
) -> Result<Vec<RawInteraction>> {
    fn ranks<'a>(ids: impl Iterator<Item = &'a str>) -> BTreeMap<&'a str, usize> {
        ids.collect::<BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(i, u)| (u, i))
            .collect()
    }
    let users = ranks(records.iter().map(|r| r.0.as_str()));
    let items = ranks(records.iter().map(|r| r.1.as_str()));
    let keys: Vec<(usize, usize)> = records
        .iter()
        .map(|r| (users[r.0.as_str()], items[r.1.as_str()]))
        .collect();
    let split = holdout(&keys, users.len(), fraction, mode, seed)?;
    for (r, s) in records.iter_mut().zip(split) {
        r.3 = s;
    }
    Ok(records)
}

fn holdout(
    keys: &[(usize, usize)],
    n_users: usize,
    fraction: f64,
    mode: SplitMode,
    seed: u64,
) -> Result<Vec<Split>> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::invalid("test_fraction", "must lie in [0, 1)"));
    }
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by_key(|&i| keys[i]);
    let groups: Vec<Vec<usize>> = match mode {
        SplitMode::Interaction => vec![order],
        SplitMode::User => {
            let mut by_user = vec![Vec::new(); n_users];
            for i in order {
                by_user[keys[i].0].push(i);
            }
            by_user
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = vec![Split::Train; keys.len()];
    for mut positions in groups {
        positions.shuffle(&mut rng);
        let n = positions.len();
        let mut n_test = (fraction * n as f64).floor() as usize;
        if mode == SplitMode::User {
            n_test = n_test.min(n.saturating_sub(1));
        }
        for &p in &positions[..n_test] {
            split[p] = Split::Test;
        }
    }
    Ok(split)
}
