//! Greedy re-ranking of baseline candidate lists.
//!
//! All algorithms share one loop: starting from an empty list, repeatedly
//! append the remaining candidate with the highest marginal score given what
//! has been selected so far. Ties go to the earlier baseline position.
//!
//! | tag             | marginal score                                              |
//! |-----------------|-------------------------------------------------------------|
//! | `none`          | baseline order                                              |
//! | `mmr`           | `λ·rec − (1−λ)·Σ_{s∈S} cos(v, s)`                           |
//! | `mmr_tolerance` | as `mmr`, cosine weighted by the user's tolerances          |
//! | `mmr_fairness`  | as `mmr`, cosine weighted by the protected-value mask       |
//! | `ofair`         | as `mmr`, cosine weighted by tolerance ∘ protected mask     |
//! | `xquad`         | `λ·rec + (1−λ)·[v brings a feature value absent from S]`    |
//! | `far`           | `λ·rec + (1−λ)·[v's sensitive value absent from S]`         |
//! | `pfar`          | as `far`, boost scaled by the user's sensitive tolerance    |
//!
//! The MMR family penalizes the *sum* of similarities to the selected items
//! rather than the maximum.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::baseline::CandidateList;
use crate::catalog::{io_writer, DummyVector, Item, ItemCatalog, ItemIdx, ProtectedGroup, EPSILON};
use crate::error::{Error, Result};
use crate::profiles::{
    combine_weights, fairness_weights, tolerance_weights, CombinedWeights, ToleranceProfile,
};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    None,
    Mmr,
    MmrTolerance,
    MmrFairness,
    Ofair,
    Xquad,
    Far,
    Pfar,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::None,
        Algorithm::Mmr,
        Algorithm::MmrTolerance,
        Algorithm::MmrFairness,
        Algorithm::Ofair,
        Algorithm::Xquad,
        Algorithm::Far,
        Algorithm::Pfar,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::None => "none",
            Algorithm::Mmr => "mmr",
            Algorithm::MmrTolerance => "mmr_tolerance",
            Algorithm::MmrFairness => "mmr_fairness",
            Algorithm::Ofair => "ofair",
            Algorithm::Xquad => "xquad",
            Algorithm::Far => "far",
            Algorithm::Pfar => "pfar",
        }
    }

    pub fn needs_sensitive_feature(self) -> bool {
        matches!(self, Algorithm::Far | Algorithm::Pfar)
    }

    pub fn needs_profile(self) -> bool {
        matches!(
            self,
            Algorithm::MmrTolerance | Algorithm::Ofair | Algorithm::Pfar
        )
    }

    pub fn valid_tags() -> String {
        Self::ALL.map(Algorithm::as_str).join(", ")
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| {
                Error::invalid(
                    "algorithm",
                    format!(
                        "unknown algorithm {s:?}; valid tags are {}",
                        Self::valid_tags()
                    ),
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RerankConfig {
    pub algorithm: Algorithm,
    pub lambda: f64,
    pub k_prime: usize,
    /// Feature index used by `far` / `pfar`.
    pub sensitive_feature: Option<usize>,
}

impl RerankConfig {
    pub fn new(algorithm: Algorithm, lambda: f64, k_prime: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::invalid("lambda", "lambda must lie in [0, 1]"));
        }
        if k_prime == 0 {
            return Err(Error::invalid("k_prime", "k' must be at least 1"));
        }
        Ok(Self {
            algorithm,
            lambda,
            k_prime,
            sensitive_feature: None,
        })
    }

    pub fn with_sensitive_feature(mut self, feature: usize) -> Self {
        self.sensitive_feature = Some(feature);
        self
    }

    /// Checks the sensitive feature exists and is single-valued on every item.
    pub fn validate(&self, catalog: &ItemCatalog) -> Result<()> {
        if !self.algorithm.needs_sensitive_feature() {
            return Ok(());
        }
        let schema = catalog.schema();
        let a = self
            .sensitive_feature
            .filter(|&a| a < schema.n_features())
            .ok_or_else(|| {
                Error::invalid(
                    "sensitive_feature",
                    format!("{} requires a valid sensitive feature", self.algorithm),
                )
            })?;
        if let Some(item) = catalog.items().iter().find(|i| i.values(a).len() != 1) {
            return Err(Error::MultiValuedSensitive {
                feature: schema.features()[a].name.clone(),
                item: item.id().to_string(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub item: ItemIdx,
    /// Marginal score at the time the item was selected.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerankedList {
    pub user: String,
    pub items: Vec<Selection>,
    pub algorithm: Algorithm,
    pub lambda: f64,
}

impl RerankedList {
    pub fn item_ids(&self) -> impl Iterator<Item = ItemIdx> + '_ {
        self.items.iter().map(|s| s.item)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Weighted cosine between two dummy vectors:
/// `Σ z·b·b' / (√Σ z·b² · √Σ z·b'²)`, clamped to `[0, 1]`.
pub fn wcos(b: &DummyVector, other: &DummyVector, z: &CombinedWeights) -> f64 {
    let (b, other, z) = (b.as_slice(), other.as_slice(), z.as_slice());
    debug_assert!(b.len() == other.len() && b.len() == z.len());
    let mut num = 0.0;
    let mut nb = 0.0;
    let mut no = 0.0;
    for j in 0..z.len() {
        num += z[j] * (b[j] * other[j]);
        nb += z[j] * b[j] * b[j];
        no += z[j] * other[j] * other[j];
    }
    (num / (nb * no).sqrt()).clamp(0.0, 1.0)
}

/// Weighted cosine evaluated from the held coordinates only.
///
/// Smoothed coordinates contribute `ε·z` (one side held) or `ε²·z` (neither
/// held), which are folded in through the weight totals.
#[derive(Debug, Clone)]
pub struct SparseCosine<'a> {
    z: &'a [f64],
    total: f64,
}

impl<'a> SparseCosine<'a> {
    pub fn new(z: &'a CombinedWeights) -> Self {
        let z = z.as_slice();
        Self {
            z,
            total: z.iter().sum(),
        }
    }

    /// Sum of weights over held coordinates, and the squared weighted norm.
    pub fn prepare(&self, held: &[usize]) -> PreparedItem {
        let held_sum: f64 = held.iter().map(|&d| self.z[d]).sum();
        let rest = (self.total - held_sum).max(0.0);
        PreparedItem {
            held_sum,
            norm_sq: held_sum + EPSILON * EPSILON * rest,
        }
    }

    pub fn similarity(
        &self,
        a: &[usize],
        pa: &PreparedItem,
        b: &[usize],
        pb: &PreparedItem,
    ) -> f64 {
        let mut both = 0.0;
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    both += self.z[a[i]];
                    i += 1;
                    j += 1;
                }
            }
        }
        let union = pa.held_sum + pb.held_sum - both;
        let one_side = (union - both).max(0.0);
        let neither = (self.total - union).max(0.0);
        let num = both + EPSILON * one_side + EPSILON * EPSILON * neither;
        (num / (pa.norm_sq * pb.norm_sq).sqrt()).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PreparedItem {
    held_sum: f64,
    norm_sq: f64,
}

/// `λ·rec − (1−λ)·Σ_{s∈S} sim(v, s)`; the penalty is 0 for an empty `S`.
pub fn score_mmr<T: ?Sized>(
    rec: f64,
    v: &T,
    selected: &[&T],
    lambda: f64,
    sim: impl Fn(&T, &T) -> f64,
) -> f64 {
    let penalty = selected.iter().fold(0.0, |acc, s| acc + sim(v, s));
    lambda * rec - (1.0 - lambda) * penalty
}

/// MMR with the user-weighted cosine as similarity.
pub fn score_ofair(
    rec: f64,
    v: &DummyVector,
    selected: &[&DummyVector],
    lambda: f64,
    z: &CombinedWeights,
) -> f64 {
    score_mmr(rec, v, selected, lambda, |a, b| wcos(a, b, z))
}

/// `λ·rec + (1−λ)·novelty`, novelty being 1 iff `v` holds a feature value
/// that no selected item holds. An empty `S` counts as novel.
pub fn score_xquad(rec: f64, v: &Item, selected: &[&Item], lambda: f64) -> f64 {
    let novel = v
        .held()
        .iter()
        .any(|&d| selected.iter().all(|s| !s.holds(d)));
    lambda * rec + (1.0 - lambda) * if novel { 1.0 } else { 0.0 }
}

/// `λ·rec + (1−λ)·t·min_{s∈S} [v_a ≠ s_a]` with `t = 1` (FAR) or the user's
/// tolerance on `a` (PFAR). An empty `S` gives a boost of `t`.
pub fn score_far_pfar(
    rec: f64,
    v: &Item,
    selected: &[&Item],
    lambda: f64,
    feature: usize,
    tolerance: Option<f64>,
) -> f64 {
    let t = tolerance.unwrap_or(1.0);
    let differs_from_all = selected
        .iter()
        .all(|s| s.values(feature) != v.values(feature));
    lambda * rec + (1.0 - lambda) * t * if differs_from_all { 1.0 } else { 0.0 }
}

/// Marginal-gain oracle for [`greedy_rerank`], indexed by candidate position.
pub trait MarginalScorer {
    /// Score of candidate `v` given the positions already selected, in order.
    fn score(&self, v: usize, selected: &[usize]) -> f64;

    /// Notifies the scorer that `v` has joined the list.
    fn commit(&mut self, _v: usize) {}
}

/// Greedy list accumulation over `candidates`, up to `k_prime` items.
pub fn greedy_rerank<S: MarginalScorer + ?Sized>(
    candidates: &CandidateList,
    scorer: &mut S,
    k_prime: usize,
) -> Vec<Selection> {
    let n = candidates.len();
    let target = k_prime.min(n);
    let mut taken = vec![false; n];
    let mut selected: Vec<usize> = Vec::with_capacity(target);
    let mut out = Vec::with_capacity(target);
    while selected.len() < target {
        let mut best: Option<(usize, f64)> = None;
        for v in (0..n).filter(|&v| !taken[v]) {
            let s = scorer.score(v, &selected);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((v, s));
            }
        }
        let Some((v, score)) = best else { break };
        taken[v] = true;
        selected.push(v);
        scorer.commit(v);
        out.push(Selection {
            item: candidates.entries()[v].item,
            score,
        });
    }
    out
}

/// Keeps the baseline order.
pub struct RelevanceScorer {
    pub rec: Vec<f64>,
}

impl MarginalScorer for RelevanceScorer {
    fn score(&self, v: usize, _selected: &[usize]) -> f64 {
        self.rec[v]
    }
}

/// MMR with a running similarity penalty per candidate.
pub struct MmrScorer<F> {
    rec: Vec<f64>,
    lambda: f64,
    penalty: Vec<f64>,
    taken: Vec<bool>,
    sim: F,
}

impl<F: Fn(usize, usize) -> f64> MmrScorer<F> {
    pub fn new(rec: Vec<f64>, lambda: f64, sim: F) -> Self {
        let n = rec.len();
        Self {
            rec,
            lambda,
            penalty: vec![0.0; n],
            taken: vec![false; n],
            sim,
        }
    }
}

impl<F: Fn(usize, usize) -> f64> MarginalScorer for MmrScorer<F> {
    fn score(&self, v: usize, _selected: &[usize]) -> f64 {
        self.lambda * self.rec[v] - (1.0 - self.lambda) * self.penalty[v]
    }

    fn commit(&mut self, v: usize) {
        self.taken[v] = true;
        for c in 0..self.rec.len() {
            if !self.taken[c] {
                self.penalty[c] += (self.sim)(c, v);
            }
        }
    }
}

/// xQuAD over all feature values as aspects.
pub struct XquadScorer<'a> {
    rec: Vec<f64>,
    lambda: f64,
    items: Vec<&'a Item>,
    covered: Vec<bool>,
}

impl<'a> XquadScorer<'a> {
    pub fn new(rec: Vec<f64>, lambda: f64, items: Vec<&'a Item>, dim: usize) -> Self {
        Self {
            rec,
            lambda,
            items,
            covered: vec![false; dim],
        }
    }
}

impl MarginalScorer for XquadScorer<'_> {
    fn score(&self, v: usize, _selected: &[usize]) -> f64 {
        let novel = self.items[v].held().iter().any(|&d| !self.covered[d]);
        self.lambda * self.rec[v] + (1.0 - self.lambda) * if novel { 1.0 } else { 0.0 }
    }

    fn commit(&mut self, v: usize) {
        for &d in self.items[v].held() {
            self.covered[d] = true;
        }
    }
}

/// FAR / PFAR on one single-valued sensitive feature.
pub struct FarScorer {
    rec: Vec<f64>,
    lambda: f64,
    values: Vec<usize>,
    covered: Vec<bool>,
    boost: f64,
}

impl FarScorer {
    /// `values[v]` is the sensitive value of candidate `v`; `boost` is 1 for
    /// FAR and the user's tolerance for PFAR.
    pub fn new(
        rec: Vec<f64>,
        lambda: f64,
        values: Vec<usize>,
        cardinality: usize,
        boost: f64,
    ) -> Self {
        Self {
            rec,
            lambda,
            values,
            covered: vec![false; cardinality],
            boost,
        }
    }
}

impl MarginalScorer for FarScorer {
    fn score(&self, v: usize, _selected: &[usize]) -> f64 {
        let new = !self.covered[self.values[v]];
        self.lambda * self.rec[v] + (1.0 - self.lambda) * self.boost * if new { 1.0 } else { 0.0 }
    }

    fn commit(&mut self, v: usize) {
        self.covered[self.values[v]] = true;
    }
}

/// Shared read-only state for re-ranking many users.
#[derive(Debug, Clone, Copy)]
pub struct Reranker<'a> {
    catalog: &'a ItemCatalog,
    group: &'a ProtectedGroup,
}

impl<'a> Reranker<'a> {
    pub fn new(catalog: &'a ItemCatalog, group: &'a ProtectedGroup) -> Self {
        Self { catalog, group }
    }

    /// Weight vector the MMR-family algorithm uses for this user.
    pub fn weights(
        &self,
        algorithm: Algorithm,
        user: &str,
        profile: Option<&ToleranceProfile>,
    ) -> Result<Option<CombinedWeights>> {
        let dim = self.catalog.schema().dim();
        let need = || profile.ok_or_else(|| Error::EmptyProfile(user.to_string()));
        Ok(match algorithm {
            Algorithm::Mmr => Some(CombinedWeights::uniform(user, dim)),
            Algorithm::MmrTolerance => Some(tolerance_weights(need()?)),
            Algorithm::MmrFairness => Some(fairness_weights(user, self.group.mask())?),
            Algorithm::Ofair => Some(combine_weights(need()?, self.group.mask())?),
            _ => None,
        })
    }

    /// Re-ranks one user's candidates. `profile` is required by the
    /// tolerance-aware algorithms.
    pub fn rerank(
        &self,
        user: &str,
        candidates: &CandidateList,
        profile: Option<&ToleranceProfile>,
        config: &RerankConfig,
    ) -> Result<RerankedList> {
        let rec: Vec<f64> = candidates.entries().iter().map(|c| c.score).collect();
        let items: Vec<&Item> = candidates.items().map(|i| self.catalog.item(i)).collect();
        let lambda = config.lambda;
        let k = config.k_prime;
        let selections = match config.algorithm {
            Algorithm::None => greedy_rerank(candidates, &mut RelevanceScorer { rec }, k),
            Algorithm::Mmr
            | Algorithm::MmrTolerance
            | Algorithm::MmrFairness
            | Algorithm::Ofair => {
                let z = self
                    .weights(config.algorithm, user, profile)?
                    .expect("MMR family has weights");
                let cosine = SparseCosine::new(&z);
                let prepared: Vec<PreparedItem> =
                    items.iter().map(|i| cosine.prepare(i.held())).collect();
                let sim = |a: usize, b: usize| {
                    cosine.similarity(items[a].held(), &prepared[a], items[b].held(), &prepared[b])
                };
                greedy_rerank(candidates, &mut MmrScorer::new(rec, lambda, sim), k)
            }
            Algorithm::Xquad => {
                let dim = self.catalog.schema().dim();
                greedy_rerank(
                    candidates,
                    &mut XquadScorer::new(rec, lambda, items, dim),
                    k,
                )
            }
            Algorithm::Far | Algorithm::Pfar => {
                config.validate(self.catalog)?;
                let a = config.sensitive_feature.expect("validated");
                let boost = if config.algorithm == Algorithm::Pfar {
                    profile
                        .ok_or_else(|| Error::EmptyProfile(user.to_string()))?
                        .tau()[a]
                } else {
                    1.0
                };
                let values = items.iter().map(|i| i.values(a)[0]).collect();
                let card = self.catalog.schema().cardinality(a);
                greedy_rerank(
                    candidates,
                    &mut FarScorer::new(rec, lambda, values, card, boost),
                    k,
                )
            }
        };
        Ok(RerankedList {
            user: user.to_string(),
            items: selections,
            algorithm: config.algorithm,
            lambda,
        })
    }
}

/// `user_id,rank,item_id,score,algorithm,lambda`, ranks starting at 1.
pub fn write_reranked<'a>(
    path: impl AsRef<Path>,
    lists: impl IntoIterator<Item = &'a RerankedList>,
    catalog: &ItemCatalog,
) -> Result<()> {
    let mut w = io_writer(path.as_ref())?;
    w.write_record(["user_id", "rank", "item_id", "score", "algorithm", "lambda"])?;
    for list in lists {
        for (rank, s) in list.items.iter().enumerate() {
            w.write_record([
                list.user.as_str(),
                &(rank + 1).to_string(),
                catalog.item(s.item).id(),
                &s.score.to_string(),
                list.algorithm.as_str(),
                &list.lambda.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
