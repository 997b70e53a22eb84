//! Pseudo-items: items grouped by agglomerative clustering of their
//! categorical features, with interactions remapped onto the groups and
//! filtered to a k-core.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{Interactions, Item, ItemCatalog, ItemIdx, RawInteraction, RawItem, Split};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    Single,
    Complete,
    #[default]
    Average,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PseudoItemConfig {
    /// Features used for clustering; empty means all.
    pub features: Vec<String>,
    pub linkage: Linkage,
    pub cluster_counts: Vec<usize>,
    pub k_core: usize,
}

impl Default for PseudoItemConfig {
    fn default() -> Self {
        Self {
            features: Vec::new(),
            linkage: Linkage::Average,
            cluster_counts: (2..=20).collect(),
            k_core: 10,
        }
    }
}

impl PseudoItemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_core == 0 {
            return Err(Error::invalid("k_core", "must be at least 1"));
        }
        if self.cluster_counts.is_empty() {
            return Err(Error::invalid(
                "cluster_counts",
                "need at least one candidate",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PseudoItems {
    pub catalog: ItemCatalog,
    pub interactions: Interactions,
    pub n_clusters: usize,
    pub silhouette: f64,
    /// Mean silhouette for every candidate count that was feasible.
    pub silhouettes: Vec<(usize, f64)>,
    /// Cluster of each original item, before k-core filtering.
    pub assignment: Vec<usize>,
}

fn feature_indices(catalog: &ItemCatalog, names: &[String]) -> Result<Vec<usize>> {
    let schema = catalog.schema();
    if names.is_empty() {
        return Ok((0..schema.n_features()).collect());
    }
    names
        .iter()
        .map(|n| {
            schema
                .feature_index(n)
                .ok_or_else(|| Error::UnknownFeature(n.clone()))
        })
        .collect()
}

/// Fraction of `features` on which the two items' value sets differ.
fn matching_distance(a: &Item, b: &Item, features: &[usize]) -> f64 {
    let differ = features
        .iter()
        .filter(|&&j| a.values(j) != b.values(j))
        .count();
    differ as f64 / features.len() as f64
}

/// Distinct feature profiles with their items, and the pairwise distances.
struct Profiles {
    members: Vec<Vec<ItemIdx>>,
    dist: Vec<f64>,
}

impl Profiles {
    fn new(catalog: &ItemCatalog, features: &[usize]) -> Self {
        let mut groups: BTreeMap<Vec<&[usize]>, Vec<ItemIdx>> = BTreeMap::new();
        for (i, item) in catalog.items().iter().enumerate() {
            let key = features.iter().map(|&j| item.values(j)).collect();
            groups.entry(key).or_default().push(ItemIdx(i));
        }
        let members: Vec<Vec<ItemIdx>> = groups.into_values().collect();
        let reps: Vec<&Item> = members.iter().map(|m| catalog.item(m[0])).collect();
        let n = reps.len();
        let dist = (0..n)
            .into_par_iter()
            .flat_map_iter(|a| {
                let reps = &reps;
                (0..n).map(move |b| matching_distance(reps[a], reps[b], features))
            })
            .collect();
        Self { members, dist }
    }

    fn len(&self) -> usize {
        self.members.len()
    }

    fn d(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.len() + b]
    }

    fn weight(&self, a: usize) -> f64 {
        self.members[a].len() as f64
    }
}

/// Nearest-neighbour-chain agglomeration; returns merges sorted by height.
fn dendrogram(p: &Profiles, linkage: Linkage) -> Vec<(usize, usize)> {
    let n = p.len();
    let mut d = p.dist.clone();
    let mut size: Vec<f64> = (0..n).map(|a| p.weight(a)).collect();
    let mut active = vec![true; n];
    let mut merges: Vec<(f64, usize, usize)> = Vec::with_capacity(n.saturating_sub(1));
    let mut chain: Vec<usize> = Vec::new();
    for _ in 1..n {
        if chain.is_empty() {
            chain.push(active.iter().position(|&x| x).expect("two active clusters"));
        }
        let (a, b) = loop {
            let a = *chain.last().expect("non-empty chain");
            let prev = chain.len().checked_sub(2).map(|i| chain[i]);
            let mut best = prev;
            let mut best_d = prev.map_or(f64::INFINITY, |p| d[a * n + p]);
            for x in (0..n).filter(|&x| active[x] && x != a) {
                if d[a * n + x] < best_d {
                    best_d = d[a * n + x];
                    best = Some(x);
                }
            }
            let b = best.expect("another active cluster");
            if Some(b) == prev {
                chain.truncate(chain.len() - 2);
                break (a, b);
            }
            chain.push(b);
        };
        let (keep, drop) = (a.min(b), a.max(b));
        merges.push((d[a * n + b], keep, drop));
        for x in (0..n).filter(|&x| active[x] && x != keep && x != drop) {
            let (dk, dd) = (d[keep * n + x], d[drop * n + x]);
            let v = match linkage {
                Linkage::Single => dk.min(dd),
                Linkage::Complete => dk.max(dd),
                Linkage::Average => (size[keep] * dk + size[drop] * dd) / (size[keep] + size[drop]),
            };
            d[keep * n + x] = v;
            d[x * n + keep] = v;
        }
        size[keep] += size[drop];
        active[drop] = false;
    }
    merges.sort_by(|x, y| x.0.total_cmp(&y.0));
    merges.into_iter().map(|(_, a, b)| (a, b)).collect()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Cuts the dendrogram into `count` clusters, numbered by first member.
fn cut(n: usize, merges: &[(usize, usize)], count: usize) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    for &(a, b) in &merges[..n - count] {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra.max(rb)] = ra.min(rb);
    }
    let mut label = BTreeMap::new();
    (0..n)
        .map(|x| {
            let root = find(&mut parent, x);
            let next = label.len();
            *label.entry(root).or_insert(next)
        })
        .collect()
}

/// Mean silhouette with each profile counted once per item it stands for.
fn weighted_silhouette(p: &Profiles, labels: &[usize], k: usize) -> f64 {
    let n = p.len();
    let mut cluster_weight = vec![0.0; k];
    for a in 0..n {
        cluster_weight[labels[a]] += p.weight(a);
    }
    let total: f64 = cluster_weight.iter().sum();
    let sum: f64 = (0..n)
        .into_par_iter()
        .map(|a| {
            let own = labels[a];
            if cluster_weight[own] <= 1.0 {
                return 0.0;
            }
            let mut to = vec![0.0; k];
            for b in 0..n {
                to[labels[b]] += p.weight(b) * p.d(a, b);
            }
            let within = to[own] / (cluster_weight[own] - 1.0);
            let nearest = (0..k)
                .filter(|&c| c != own)
                .map(|c| to[c] / cluster_weight[c])
                .fold(f64::INFINITY, f64::min);
            let denom = within.max(nearest);
            let s = if denom > 0.0 {
                (nearest - within) / denom
            } else {
                0.0
            };
            s * p.weight(a)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    sum / total
}

/// Cluster label per item for `count` clusters, or `None` when there are
/// fewer distinct profiles than `count` or `count < 2`.
pub fn cluster_items(
    catalog: &ItemCatalog,
    features: &[String],
    linkage: Linkage,
    count: usize,
) -> Result<Option<Vec<usize>>> {
    let features = feature_indices(catalog, features)?;
    let profiles = Profiles::new(catalog, &features);
    let merges = dendrogram(&profiles, linkage);
    Ok(expand(&profiles, &merges, count).map(|(labels, _)| labels))
}

fn expand(
    p: &Profiles,
    merges: &[(usize, usize)],
    count: usize,
) -> Option<(Vec<usize>, Vec<usize>)> {
    if count < 2 || count > p.len() {
        return None;
    }
    let by_profile = cut(p.len(), merges, count);
    let n_items: usize = p.members.iter().map(Vec::len).sum();
    let mut by_item = vec![0; n_items];
    for (a, members) in p.members.iter().enumerate() {
        for m in members {
            by_item[m.0] = by_profile[a];
        }
    }
    // renumber by smallest item index so labels do not depend on profile order
    let mut order = BTreeMap::new();
    for &c in &by_item {
        let next = order.len();
        order.entry(c).or_insert(next);
    }
    let by_item = by_item.iter().map(|c| order[c]).collect();
    let by_profile = by_profile.iter().map(|c| order[c]).collect();
    Some((by_item, by_profile))
}

/// Mean silhouette of an item-level labelling under the matching distance.
pub fn silhouette_score(
    catalog: &ItemCatalog,
    features: &[String],
    labels: &[usize],
) -> Result<f64> {
    if labels.len() != catalog.len() {
        return Err(Error::LengthMismatch {
            expected: catalog.len(),
            got: labels.len(),
        });
    }
    let features = feature_indices(catalog, features)?;
    let profiles = Profiles::new(catalog, &features);
    let by_profile: Vec<usize> = profiles.members.iter().map(|m| labels[m[0].0]).collect();
    for (a, m) in profiles.members.iter().enumerate() {
        if m.iter().any(|i| labels[i.0] != by_profile[a]) {
            return Err(Error::invalid(
                "labels",
                "identical items must share a cluster",
            ));
        }
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    Ok(weighted_silhouette(&profiles, &by_profile, k))
}

pub fn build_pseudo_items(
    interactions: &Interactions,
    catalog: &ItemCatalog,
    config: &PseudoItemConfig,
) -> Result<PseudoItems> {
    config.validate()?;
    if catalog.len() < 2 {
        return Err(Error::invalid("catalog", "need at least two items"));
    }
    let features = feature_indices(catalog, &config.features)?;
    let profiles = Profiles::new(catalog, &features);
    let merges = dendrogram(&profiles, config.linkage);

    let counts: BTreeSet<usize> = config.cluster_counts.iter().copied().collect();
    let mut silhouettes = Vec::new();
    let mut best: Option<(f64, usize, Vec<usize>)> = None;
    for count in counts {
        let Some((by_item, by_profile)) = expand(&profiles, &merges, count) else {
            continue;
        };
        let s = weighted_silhouette(&profiles, &by_profile, count);
        silhouettes.push((count, s));
        if best.as_ref().is_none_or(|b| s > b.0) {
            best = Some((s, count, by_item));
        }
    }
    let (silhouette, n_clusters, assignment) = best.ok_or(Error::NoClustering)?;

    let raw = modal_items(catalog, &assignment, n_clusters);
    let ids: Vec<String> = raw.iter().map(|r| r.0.clone()).collect();

    let mut collapsed: BTreeMap<(String, usize, Split), (f64, usize)> = BTreeMap::new();
    for r in interactions.ratings() {
        let key = (
            interactions.user_id(r.user).to_string(),
            assignment[r.item.0],
            r.split,
        );
        let e = collapsed.entry(key).or_insert((0.0, 0));
        e.0 += r.value;
        e.1 += 1;
    }
    let records = k_core(collapsed, config.k_core);
    if records.is_empty() {
        return Err(Error::KCoreEmpty { users: 0, items: 0 });
    }
    let kept: BTreeSet<usize> = records.iter().map(|r| r.1).collect();
    let raw: Vec<RawItem> = raw
        .into_iter()
        .enumerate()
        .filter(|(c, _)| kept.contains(c))
        .map(|(_, r)| r)
        .collect();
    let pseudo_catalog = ItemCatalog::from_raw(&raw)?;
    let records: Vec<RawInteraction> = records
        .into_iter()
        .map(|(u, c, v, s)| (u, ids[c].clone(), v, s))
        .collect();
    let pseudo_interactions = Interactions::new(&pseudo_catalog, records)?;
    Ok(PseudoItems {
        catalog: pseudo_catalog,
        interactions: pseudo_interactions,
        n_clusters,
        silhouette,
        silhouettes,
        assignment,
    })
}

/// One item per cluster holding, per feature, the most frequent value among
/// its members (ties go to the lexicographically smaller value).
fn modal_items(catalog: &ItemCatalog, assignment: &[usize], k: usize) -> Vec<RawItem> {
    let schema = catalog.schema();
    let width = k.to_string().len();
    let mut counts: Vec<Vec<Vec<usize>>> = (0..k)
        .map(|_| {
            (0..schema.n_features())
                .map(|j| vec![0; schema.cardinality(j)])
                .collect()
        })
        .collect();
    for (item, &c) in catalog.items().iter().zip(assignment) {
        for (j, slot) in counts[c].iter_mut().enumerate() {
            for &v in item.values(j) {
                slot[v] += 1;
            }
        }
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(c, per_feature)| {
            let features = per_feature
                .iter()
                .enumerate()
                .map(|(j, slot)| {
                    let mode =
                        (0..slot.len()).fold(0, |m, v| if slot[v] > slot[m] { v } else { m });
                    let f = &schema.features()[j];
                    (
                        f.name.clone(),
                        [f.values[mode].clone()].into_iter().collect(),
                    )
                })
                .collect();
            (format!("pseudo-{c:0width$}"), features)
        })
        .collect()
}

type Collapsed = BTreeMap<(String, usize, Split), (f64, usize)>;

/// Drops items with fewer than `k` users and users with fewer than `k`
/// items until neither changes. Ratings are averaged per key.
fn k_core(collapsed: Collapsed, k: usize) -> Vec<(String, usize, f64, Split)> {
    let mut pairs: BTreeSet<(String, usize)> =
        collapsed.keys().map(|(u, c, _)| (u.clone(), *c)).collect();
    loop {
        let mut item_deg: BTreeMap<usize, usize> = BTreeMap::new();
        let mut user_deg: BTreeMap<&str, usize> = BTreeMap::new();
        for (u, c) in &pairs {
            *item_deg.entry(*c).or_default() += 1;
            *user_deg.entry(u).or_default() += 1;
        }
        let keep: BTreeSet<(String, usize)> = pairs
            .iter()
            .filter(|(u, c)| item_deg[c] >= k && user_deg[u.as_str()] >= k)
            .cloned()
            .collect();
        if keep.len() == pairs.len() {
            break;
        }
        pairs = keep;
    }
    collapsed
        .into_iter()
        .filter(|((u, c, _), _)| pairs.contains(&(u.clone(), *c)))
        .map(|((u, c, s), (sum, n))| (u, c, sum / n as f64, s))
        .collect()
}
