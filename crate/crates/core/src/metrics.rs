//! Accuracy, diversity and exposure metrics for re-ranked lists, and the
//! fairness-at-accuracy-loss tradeoff table.
//!
//! Accuracy uses binary relevance: an item is relevant iff it is in the
//! user's test split. Users without test items are left out of accuracy
//! averages. Exposure is position-unweighted: the fraction of the `k'` slots
//! holding a protected item.

use std::collections::BTreeMap;
use std::path::Path;

use crate::catalog::{io_writer, FeatureSchema, Item, ItemIdx, ProtectedGroup};
use crate::error::{Error, Result};
use crate::profiles::{entropy_bits, CombinedWeights};
use crate::rerank::{Algorithm, SparseCosine};

fn discount(rank: usize) -> f64 {
    1.0 / ((rank + 1) as f64).log2()
}

/// Binary-relevance nDCG at `k_prime`. `relevant` must be sorted ascending.
pub fn ndcg(list: &[ItemIdx], relevant: &[ItemIdx], k_prime: usize) -> f64 {
    if relevant.is_empty() {
        return 0.0;
    }
    let dcg: f64 = list
        .iter()
        .take(k_prime)
        .enumerate()
        .filter(|(_, i)| relevant.binary_search(i).is_ok())
        .map(|(r, _)| discount(r + 1))
        .sum();
    let ideal: f64 = (1..=relevant.len().min(k_prime)).map(discount).sum();
    dcg / ideal
}

/// `(precision@k', recall@k')`. Recall is 0 when nothing is relevant.
pub fn precision_recall(list: &[ItemIdx], relevant: &[ItemIdx], k_prime: usize) -> (f64, f64) {
    let hits = list
        .iter()
        .take(k_prime)
        .filter(|i| relevant.binary_search(i).is_ok())
        .count() as f64;
    let recall = if relevant.is_empty() {
        0.0
    } else {
        hits / relevant.len() as f64
    };
    (hits / k_prime as f64, recall)
}

/// Intra-list distance: mean pairwise `1 − cosine` over smoothed dummy vectors.
pub fn ild(list: &[&Item], schema: &FeatureSchema) -> f64 {
    if list.len() < 2 {
        return 0.0;
    }
    let z = CombinedWeights::uniform("", schema.dim());
    let cosine = SparseCosine::new(&z);
    let prepared: Vec<_> = list.iter().map(|i| cosine.prepare(i.held())).collect();
    let mut total = 0.0;
    let mut pairs = 0usize;
    for a in 0..list.len() {
        for b in a + 1..list.len() {
            let s = cosine.similarity(list[a].held(), &prepared[a], list[b].held(), &prepared[b]);
            total += 1.0 - s;
            pairs += 1;
        }
    }
    total / pairs as f64
}

/// Mean over features of the entropy (bits) of value occurrences in the list.
pub fn list_entropy(list: &[&Item], schema: &FeatureSchema) -> Result<f64> {
    if list.is_empty() {
        return Err(Error::Empty("list entropy of an empty list".into()));
    }
    let mut sum = 0.0;
    for j in 0..schema.n_features() {
        let mut counts = vec![0usize; schema.cardinality(j)];
        for item in list {
            for &v in item.values(j) {
                counts[v] += 1;
            }
        }
        let total: usize = counts.iter().sum();
        let p: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
        sum += entropy_bits(&p);
    }
    Ok(sum / schema.n_features() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exposure {
    /// Fraction of the `k'` slots holding a protected item.
    pub protected: f64,
    /// Per protected dummy coordinate, the fraction of slots holding that value.
    pub per_value: BTreeMap<usize, f64>,
}

impl Exposure {
    pub fn unprotected(&self, list_len: usize, k_prime: usize) -> f64 {
        list_len as f64 / k_prime as f64 - self.protected
    }
}

pub fn exposure(list: &[&Item], group: &ProtectedGroup, k_prime: usize) -> Exposure {
    let slots = k_prime as f64;
    let protected = list.iter().filter(|i| group.is_protected(i)).count() as f64 / slots;
    let per_value = group
        .protected_dummies()
        .map(|d| {
            let n = list.iter().filter(|i| i.holds(d)).count();
            (d, n as f64 / slots)
        })
        .collect();
    Exposure {
        protected,
        per_value,
    }
}

/// Number of unprotected items over `k'`.
pub fn unprotected_exposure(list: &[&Item], group: &ProtectedGroup, k_prime: usize) -> f64 {
    list.iter().filter(|i| !group.is_protected(i)).count() as f64 / k_prime as f64
}

/// Metrics of one user's list.
#[derive(Debug, Clone, PartialEq)]
pub struct UserMetrics {
    /// `None` when the user has no test items.
    pub accuracy: Option<(f64, f64, f64)>,
    pub ild: f64,
    pub list_entropy: f64,
    pub exposure: Exposure,
}

pub fn evaluate_list(
    list: &[ItemIdx],
    items: &[&Item],
    relevant: &[ItemIdx],
    schema: &FeatureSchema,
    group: &ProtectedGroup,
    k_prime: usize,
) -> UserMetrics {
    let accuracy = (!relevant.is_empty()).then(|| {
        let (p, r) = precision_recall(list, relevant, k_prime);
        (p, r, ndcg(list, relevant, k_prime))
    });
    UserMetrics {
        accuracy,
        ild: ild(items, schema),
        list_entropy: list_entropy(items, schema).unwrap_or(0.0),
        exposure: exposure(items, group, k_prime),
    }
}

/// Macro-averaged metrics for one `(algorithm, λ)` setting.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub algorithm: Algorithm,
    pub lambda: f64,
    /// Users with at least one test item (the accuracy denominator).
    pub users: usize,
    pub precision: f64,
    pub recall: f64,
    pub ndcg: f64,
    pub ild: f64,
    pub list_entropy: f64,
    pub exposure: f64,
    pub per_value_exposure: BTreeMap<(String, String), f64>,
}

/// Folds per-user metrics in order.
pub fn aggregate(
    algorithm: Algorithm,
    lambda: f64,
    users: &[UserMetrics],
    schema: &FeatureSchema,
) -> MetricsRow {
    let mut acc = (0.0, 0.0, 0.0);
    let mut n_acc = 0usize;
    let (mut ild, mut ent, mut exp) = (0.0, 0.0, 0.0);
    let mut per_value: BTreeMap<usize, f64> = BTreeMap::new();
    for m in users {
        if let Some((p, r, n)) = m.accuracy {
            acc.0 += p;
            acc.1 += r;
            acc.2 += n;
            n_acc += 1;
        }
        ild += m.ild;
        ent += m.list_entropy;
        exp += m.exposure.protected;
        for (&d, &e) in &m.exposure.per_value {
            *per_value.entry(d).or_default() += e;
        }
    }
    let mean = |x: f64, n: usize| if n == 0 { 0.0 } else { x / n as f64 };
    let n = users.len();
    MetricsRow {
        algorithm,
        lambda,
        users: n_acc,
        precision: mean(acc.0, n_acc),
        recall: mean(acc.1, n_acc),
        ndcg: mean(acc.2, n_acc),
        ild: mean(ild, n),
        list_entropy: mean(ent, n),
        exposure: mean(exp, n),
        per_value_exposure: per_value
            .into_iter()
            .map(|(d, e)| {
                let (f, v) = schema.dummy_label(d);
                ((f.to_string(), v.to_string()), mean(e, n))
            })
            .collect(),
    }
}

/// Exposure interpolated at fixed relative nDCG losses.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffReport {
    pub algorithm: Algorithm,
    pub baseline_ndcg: f64,
    pub baseline_exposure: f64,
    /// `(λ, nDCG, exposure)` ascending in λ.
    pub points: Vec<(f64, f64, f64)>,
    /// `(loss level, exposure)`; `None` when the level is not bracketed by
    /// two measured points.
    pub levels: Vec<(f64, Option<f64>)>,
}

impl TradeoffReport {
    pub fn exposure_at(&self, level: f64) -> Option<f64> {
        self.levels
            .iter()
            .find(|(l, _)| *l == level)
            .and_then(|(_, e)| *e)
    }
}

/// Locates the nDCG target `(1 − ℓ)·baseline` on the piecewise-linear
/// (nDCG, exposure) curve and reads off the exposure.
///
/// `rows` must belong to one algorithm, be strictly increasing in λ and end
/// with λ = 1, which serves as the baseline. The curve is walked from λ = 1
/// downwards and the first bracketing segment is used. Levels beyond the
/// measured range are reported as unavailable.
pub fn tradeoff_table(rows: &[MetricsRow], levels: &[f64]) -> Result<TradeoffReport> {
    if rows.len() < 2 {
        return Err(Error::invalid("rows", "need at least two measured points"));
    }
    if rows.windows(2).any(|w| !(w[0].lambda < w[1].lambda)) {
        return Err(Error::invalid(
            "rows",
            "rows must be strictly increasing in lambda",
        ));
    }
    let base = rows.last().expect("non-empty");
    if base.lambda != 1.0 {
        return Err(Error::invalid(
            "rows",
            "the lambda = 1 baseline row is missing",
        ));
    }
    let points: Vec<(f64, f64, f64)> = rows
        .iter()
        .map(|r| (r.lambda, r.ndcg, r.exposure))
        .collect();
    let levels = levels
        .iter()
        .map(|&level| (level, interpolate(&points, (1.0 - level) * base.ndcg)))
        .collect();
    Ok(TradeoffReport {
        algorithm: base.algorithm,
        baseline_ndcg: base.ndcg,
        baseline_exposure: base.exposure,
        points,
        levels,
    })
}

fn interpolate(points: &[(f64, f64, f64)], target: f64) -> Option<f64> {
    for i in (0..points.len() - 1).rev() {
        let (_, n_hi, e_hi) = points[i + 1];
        let (_, n_lo, e_lo) = points[i];
        if target < n_hi.min(n_lo) || target > n_hi.max(n_lo) {
            continue;
        }
        if n_hi == n_lo {
            return Some(e_hi);
        }
        let t = (n_hi - target) / (n_hi - n_lo);
        return Some(e_hi * (1.0 - t) + e_lo * t);
    }
    None
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

pub fn write_metrics<'a>(
    path: impl AsRef<Path>,
    rows: impl IntoIterator<Item = &'a MetricsRow>,
) -> Result<()> {
    let mut w = io_writer(path.as_ref())?;
    w.write_record([
        "algorithm",
        "lambda",
        "users",
        "precision",
        "recall",
        "ndcg",
        "ild",
        "list_entropy",
        "exposure",
    ])?;
    for r in rows {
        w.write_record([
            r.algorithm.as_str().to_string(),
            r.lambda.to_string(),
            r.users.to_string(),
            r.precision.to_string(),
            r.recall.to_string(),
            r.ndcg.to_string(),
            r.ild.to_string(),
            r.list_entropy.to_string(),
            r.exposure.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `algorithm,lambda,feature,value,exposure`, one row per protected value.
pub fn write_exposure_long<'a>(
    path: impl AsRef<Path>,
    rows: impl IntoIterator<Item = &'a MetricsRow>,
) -> Result<()> {
    let mut w = io_writer(path.as_ref())?;
    w.write_record(["algorithm", "lambda", "feature", "value", "exposure"])?;
    for r in rows {
        for ((f, v), e) in &r.per_value_exposure {
            w.write_record([
                r.algorithm.as_str(),
                &r.lambda.to_string(),
                f,
                v,
                &e.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per algorithm: baseline nDCG and exposure, then one column per loss level.
pub fn write_tradeoffs<'a>(
    path: impl AsRef<Path>,
    reports: impl IntoIterator<Item = &'a TradeoffReport>,
) -> Result<()> {
    let reports: Vec<&TradeoffReport> = reports.into_iter().collect();
    let mut w = io_writer(path.as_ref())?;
    let mut header = vec![
        "algorithm".to_string(),
        "baseline_ndcg".to_string(),
        "baseline_exposure".to_string(),
    ];
    if let Some(first) = reports.first() {
        header.extend(first.levels.iter().map(|(l, _)| format!("loss_{l}")));
    }
    w.write_record(&header)?;
    for r in reports {
        let mut rec = vec![
            r.algorithm.as_str().to_string(),
            r.baseline_ndcg.to_string(),
            r.baseline_exposure.to_string(),
        ];
        rec.extend(r.levels.iter().map(|(_, e)| fmt_opt(*e)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
