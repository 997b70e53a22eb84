//! Baseline recommender producing the candidate lists that get re-ranked.
//!
//! The built-in recommender is a non-negative matrix factorization fitted
//! with multiplicative updates. By default only observed training ratings
//! enter the squared-error objective; with `implicit_zeros` every unobserved
//! user/item cell is treated as an observed zero instead.
//!
//! Each update multiplies a factor by `(numerator + δ) / (denominator + δ)`
//! with a small `δ`. That keeps every factor strictly positive and is itself a
//! majorize-minimize step, so the objective never increases.
//!
//! Model checkpoints are CSV with a header `kind,index,f0,...,f{r-1}`: one
//! `user` row per user factor followed by one `item` row per item factor,
//! indices referring to the sorted user / item id order.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{
    io_column, io_reader, io_writer, Interactions, ItemCatalog, ItemIdx, Split, UserIdx,
};
use crate::error::{Error, Result};

const UPDATE_DELTA: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NmfConfig {
    pub rank: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Treat unobserved cells as zero ratings instead of ignoring them.
    pub implicit_zeros: bool,
}

impl Default for NmfConfig {
    fn default() -> Self {
        Self {
            rank: 10,
            epochs: 100,
            seed: 0,
            implicit_zeros: false,
        }
    }
}

/// Trained non-negative factors. Row-major `n_users × rank` and `n_items × rank`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    rank: usize,
    users: Vec<f64>,
    items: Vec<f64>,
    config: NmfConfig,
    objective: Vec<f64>,
}

impl FactorModel {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn n_users(&self) -> usize {
        self.users.len() / self.rank
    }

    pub fn n_items(&self) -> usize {
        self.items.len() / self.rank
    }

    pub fn config(&self) -> &NmfConfig {
        &self.config
    }

    pub fn user_factors(&self, user: UserIdx) -> &[f64] {
        &self.users[user.0 * self.rank..(user.0 + 1) * self.rank]
    }

    pub fn item_factors(&self, item: ItemIdx) -> &[f64] {
        &self.items[item.0 * self.rank..(item.0 + 1) * self.rank]
    }

    /// Training objective before the first epoch and after each epoch.
    pub fn objective_trace(&self) -> &[f64] {
        &self.objective
    }

    /// Predicted relevance `rec(v, u)`.
    pub fn score(&self, user: UserIdx, item: ItemIdx) -> f64 {
        dot(self.user_factors(user), self.item_factors(item))
    }

    /// Root mean squared error over the given ratings.
    pub fn rmse(&self, ratings: impl IntoIterator<Item = (UserIdx, ItemIdx, f64)>) -> f64 {
        let (mut sse, mut n) = (0.0, 0usize);
        for (u, i, r) in ratings {
            let e = r - self.score(u, i);
            sse += e * e;
            n += 1;
        }
        if n == 0 {
            0.0
        } else {
            (sse / n as f64).sqrt()
        }
    }

    /// Builds a model from explicit factors, e.g. for hand-built fixtures.
    pub fn from_factors(rank: usize, users: Vec<f64>, items: Vec<f64>) -> Result<Self> {
        if rank == 0 {
            return Err(Error::invalid("rank", "rank must be positive"));
        }
        if !users.len().is_multiple_of(rank) || !items.len().is_multiple_of(rank) {
            return Err(Error::invalid(
                "factors",
                "length is not a multiple of rank",
            ));
        }
        if users.iter().chain(&items).any(|&x| !(x >= 0.0)) {
            return Err(Error::invalid("factors", "factors must be non-negative"));
        }
        Ok(Self {
            rank,
            users,
            items,
            config: NmfConfig {
                rank,
                ..NmfConfig::default()
            },
            objective: Vec::new(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = io_writer(path.as_ref())?;
        let mut header = vec!["kind".to_string(), "index".to_string()];
        header.extend((0..self.rank).map(|f| format!("f{f}")));
        w.write_record(&header)?;
        for (kind, data) in [("user", &self.users), ("item", &self.items)] {
            for (i, row) in data.chunks(self.rank).enumerate() {
                let mut rec = vec![kind.to_string(), i.to_string()];
                rec.extend(row.iter().map(f64::to_string));
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut rdr = io_reader(path)?;
        let rank = rdr.headers()?.len().saturating_sub(2);
        let (mut users, mut items) = (Vec::new(), Vec::new());
        for (line, row) in rdr.records().enumerate() {
            let row = row?;
            let bad = |message: &str| Error::Parse {
                path: path.display().to_string(),
                line: line + 2,
                message: message.to_string(),
            };
            let target = match &row[0] {
                "user" => &mut users,
                "item" => &mut items,
                _ => return Err(bad("kind must be user or item")),
            };
            for field in row.iter().skip(2) {
                target.push(field.parse::<f64>().map_err(|_| bad("bad factor"))?);
            }
        }
        Self::from_factors(rank, users, items)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Observed {
    by_user: Vec<Vec<(usize, f64)>>,
    by_item: Vec<Vec<(usize, f64)>>,
}

fn objective(obs: &Observed, p: &[f64], q: &[f64], rank: usize, implicit: bool) -> f64 {
    let row = |m: &[f64], i: usize| -> Vec<f64> { m[i * rank..(i + 1) * rank].to_vec() };
    if implicit {
        // ||R - PQ'||² = Σ r² - 2 Σ r·pred + tr(P'P Q'Q)
        let mut total = 0.0;
        for (u, ratings) in obs.by_user.iter().enumerate() {
            let pu = row(p, u);
            for &(i, r) in ratings {
                let pred = dot(&pu, &q[i * rank..(i + 1) * rank]);
                total += r * r - 2.0 * r * pred;
            }
        }
        let gp = gram(p, rank);
        let gq = gram(q, rank);
        total + gp.iter().zip(&gq).map(|(a, b)| a * b).sum::<f64>()
    } else {
        let mut total = 0.0;
        for (u, ratings) in obs.by_user.iter().enumerate() {
            let pu = &p[u * rank..(u + 1) * rank];
            for &(i, r) in ratings {
                let e = r - dot(pu, &q[i * rank..(i + 1) * rank]);
                total += e * e;
            }
        }
        total
    }
}

/// `M' M` for a row-major `n × rank` matrix.
fn gram(m: &[f64], rank: usize) -> Vec<f64> {
    let mut g = vec![0.0; rank * rank];
    for row in m.chunks(rank) {
        for a in 0..rank {
            for b in 0..rank {
                g[a * rank + b] += row[a] * row[b];
            }
        }
    }
    g
}

/// One multiplicative half-step updating `target` rows against fixed `other`.
fn update(
    target: &mut [f64],
    other: &[f64],
    rows: &[Vec<(usize, f64)>],
    rank: usize,
    implicit: bool,
) {
    let g = implicit.then(|| gram(other, rank));
    let mut num = vec![0.0; rank];
    let mut den = vec![0.0; rank];
    for (t, ratings) in rows.iter().enumerate() {
        let row = &mut target[t * rank..(t + 1) * rank];
        num.fill(0.0);
        den.fill(0.0);
        for &(o, r) in ratings {
            let q = &other[o * rank..(o + 1) * rank];
            let pred = dot(row, q);
            for f in 0..rank {
                num[f] += r * q[f];
                if g.is_none() {
                    den[f] += pred * q[f];
                }
            }
        }
        if let Some(g) = &g {
            for f in 0..rank {
                den[f] = (0..rank).map(|b| row[b] * g[b * rank + f]).sum();
            }
        }
        for f in 0..rank {
            row[f] *= (num[f] + UPDATE_DELTA) / (den[f] + UPDATE_DELTA);
        }
    }
}

/// Fits factors to the training split of `interactions`.
pub fn train(
    interactions: &Interactions,
    n_items: usize,
    config: NmfConfig,
) -> Result<FactorModel> {
    if config.rank == 0 {
        return Err(Error::invalid("rank", "rank must be positive"));
    }
    let n_users = interactions.n_users();
    let mut obs = Observed {
        by_user: vec![Vec::new(); n_users],
        by_item: vec![Vec::new(); n_items],
    };
    let mut sum = 0.0;
    let mut count = 0usize;
    for r in interactions
        .ratings()
        .iter()
        .filter(|r| r.split == Split::Train)
    {
        if r.item.0 >= n_items {
            return Err(Error::UnknownItem(format!("#{}", r.item.0)));
        }
        if r.value < 0.0 {
            return Err(Error::invalid("rating", "ratings must be non-negative"));
        }
        obs.by_user[r.user.0].push((r.item.0, r.value));
        obs.by_item[r.item.0].push((r.user.0, r.value));
        sum += r.value;
        count += 1;
    }
    if count == 0 {
        return Err(Error::Empty("training split has no ratings".into()));
    }
    let rank = config.rank;
    let scale = (sum / count as f64 / rank as f64)
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // uniform in (0, 1]
    let mut init = |n: usize| -> Vec<f64> {
        (0..n * rank)
            .map(|_| (1.0 - rng.gen::<f64>()) * scale)
            .collect()
    };
    let mut p = init(n_users);
    let mut q = init(n_items);

    let implicit = config.implicit_zeros;
    let mut trace = Vec::with_capacity(config.epochs + 1);
    trace.push(objective(&obs, &p, &q, rank, implicit));
    for _ in 0..config.epochs {
        update(&mut p, &q, &obs.by_user, rank, implicit);
        update(&mut q, &p, &obs.by_item, rank, implicit);
        trace.push(objective(&obs, &p, &q, rank, implicit));
    }
    Ok(FactorModel {
        rank,
        users: p,
        items: q,
        config,
        objective: trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub item: ItemIdx,
    pub score: f64,
}

/// A user's baseline ranking, ordered by score descending then item ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateList {
    user: UserIdx,
    entries: Vec<Candidate>,
    truncated: bool,
}

impl CandidateList {
    /// Sorts `entries` into canonical order. Duplicate items are rejected.
    pub fn new(user: UserIdx, mut entries: Vec<Candidate>) -> Result<Self> {
        if entries.iter().any(|c| c.score.is_nan()) {
            return Err(Error::invalid("score", "NaN candidate score"));
        }
        entries.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.item.cmp(&b.item)));
        let mut sorted: Vec<ItemIdx> = entries.iter().map(|c| c.item).collect();
        sorted.sort_unstable();
        if let Some(pair) = sorted.windows(2).find(|p| p[0] == p[1]) {
            return Err(Error::DuplicatePair {
                user: format!("#{}", user.0),
                item: format!("#{}", pair[0].0),
            });
        }
        Ok(Self {
            user,
            entries,
            truncated: false,
        })
    }

    pub fn user(&self) -> UserIdx {
        self.user
    }

    pub fn entries(&self) -> &[Candidate] {
        &self.entries
    }

    pub fn items(&self) -> impl Iterator<Item = ItemIdx> + '_ {
        self.entries.iter().map(|c| c.item)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Set when fewer candidates were available than requested.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// The first `k` candidates. Flags truncation when fewer exist.
    pub fn prefix(&self, k: usize) -> Self {
        Self {
            user: self.user,
            entries: self.entries[..k.min(self.entries.len())].to_vec(),
            truncated: self.truncated || self.entries.len() < k,
        }
    }
}

/// The `k` highest-scoring items the user has not seen in training.
///
/// `seen` must be sorted ascending, as returned by
/// [`Interactions::items_by_user`].
pub fn top_k(
    model: &FactorModel,
    user: UserIdx,
    seen: &[ItemIdx],
    k: usize,
) -> Result<CandidateList> {
    if user.0 >= model.n_users() {
        return Err(Error::UnknownUser(format!("#{}", user.0)));
    }
    if k == 0 {
        return Err(Error::invalid("k", "k must be positive"));
    }
    let mut entries: Vec<Candidate> = (0..model.n_items())
        .map(ItemIdx)
        .filter(|i| seen.binary_search(i).is_err())
        .map(|item| Candidate {
            item,
            score: model.score(user, item),
        })
        .collect();
    let order =
        |a: &Candidate, b: &Candidate| b.score.total_cmp(&a.score).then(a.item.cmp(&b.item));
    let truncated = entries.len() < k;
    if entries.len() > k {
        entries.select_nth_unstable_by(k - 1, order);
        entries.truncate(k);
    }
    entries.sort_by(order);
    Ok(CandidateList {
        user,
        entries,
        truncated,
    })
}

/// Reads an external `user_id,item_id,score` file into canonical lists.
///
/// Items in the user's training profile are dropped; a repeated
/// `(user, item)` row is an error.
pub fn load_scores(
    path: impl AsRef<Path>,
    catalog: &ItemCatalog,
    interactions: &Interactions,
) -> Result<BTreeMap<UserIdx, CandidateList>> {
    let path = path.as_ref();
    let mut rdr = io_reader(path)?;
    let headers = rdr.headers()?.clone();
    let (uc, ic, sc) = (
        io_column(&headers, "user_id", path)?,
        io_column(&headers, "item_id", path)?,
        io_column(&headers, "score", path)?,
    );
    let train = interactions.items_by_user(Split::Train);
    let mut raw: BTreeMap<UserIdx, BTreeMap<ItemIdx, f64>> = BTreeMap::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row?;
        let user = interactions
            .find_user(&row[uc])
            .ok_or_else(|| Error::UnknownUser(row[uc].to_string()))?;
        let item = catalog
            .find(&row[ic])
            .ok_or_else(|| Error::UnknownItem(row[ic].to_string()))?;
        let score: f64 = row[sc].parse().map_err(|_| Error::Parse {
            path: path.display().to_string(),
            line: line + 2,
            message: format!("bad score {:?}", &row[sc]),
        })?;
        if raw.entry(user).or_default().insert(item, score).is_some() {
            return Err(Error::DuplicatePair {
                user: row[uc].to_string(),
                item: row[ic].to_string(),
            });
        }
    }
    raw.into_iter()
        .map(|(user, scores)| {
            let seen = &train[user.0];
            let entries = scores
                .into_iter()
                .filter(|(item, _)| seen.binary_search(item).is_err())
                .map(|(item, score)| Candidate { item, score })
                .collect();
            Ok((user, CandidateList::new(user, entries)?))
        })
        .collect()
}

pub fn write_scores<'a>(
    path: impl AsRef<Path>,
    lists: impl IntoIterator<Item = &'a CandidateList>,
    catalog: &ItemCatalog,
    interactions: &Interactions,
) -> Result<()> {
    let mut w = io_writer(path.as_ref())?;
    w.write_record(["user_id", "item_id", "score"])?;
    for list in lists {
        let user = interactions.user_id(list.user());
        for c in list.entries() {
            w.write_record([user, catalog.item(c.item).id(), &c.score.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{ItemCatalog, RawItem};
    use std::collections::BTreeMap;

    fn catalog(m: usize) -> ItemCatalog {
        let raw: Vec<RawItem> = (0..m)
            .map(|i| {
                let mut f = BTreeMap::new();
                f.insert(
                    "f".to_string(),
                    [format!("v{}", i % 2)].into_iter().collect(),
                );
                (format!("i{i}"), f)
            })
            .collect();
        ItemCatalog::from_raw(&raw).unwrap()
    }

    fn dense(catalog: &ItemCatalog, matrix: &[Vec<f64>]) -> Interactions {
        let records = matrix.iter().enumerate().flat_map(|(u, row)| {
            row.iter()
                .enumerate()
                .map(move |(i, &r)| (format!("u{u}"), format!("i{i}"), r, Split::Train))
        });
        Interactions::new(catalog, records).unwrap()
    }

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut s = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        }
    }

    #[test]
    fn rank_one_is_recovered() {
        let u = [0.6, 1.2, 0.9, 1.4, 0.7];
        let v = [1.1, 0.5, 1.3, 0.8, 1.0, 0.6];
        let matrix: Vec<Vec<f64>> = u
            .iter()
            .map(|a| v.iter().map(|b| a * b).collect())
            .collect();
        let cat = catalog(v.len());
        let data = dense(&cat, &matrix);
        let config = NmfConfig {
            rank: 1,
            epochs: 500,
            seed: 3,
            implicit_zeros: false,
        };
        let model = train(&data, cat.len(), config).unwrap();
        let rmse = model.rmse(data.ratings().iter().map(|r| (r.user, r.item, r.value)));
        assert!(rmse < 1e-3, "rmse {rmse}");
    }

    #[test]
    fn objective_never_increases() {
        let mut next = lcg(7);
        let matrix: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..5).map(|_| next() * 5.0).collect())
            .collect();
        let cat = catalog(5);
        let data = dense(&cat, &matrix);
        for implicit_zeros in [false, true] {
            let config = NmfConfig {
                rank: 2,
                epochs: 200,
                seed: 1,
                implicit_zeros,
            };
            let model = train(&data, cat.len(), config).unwrap();
            for w in model.objective_trace().windows(2) {
                assert!(w[1] <= w[0] + 1e-9 * w[0].max(1.0), "{} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn training_is_deterministic() {
        let mut next = lcg(11);
        let matrix: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..6).map(|_| 1.0 + next() * 4.0).collect())
            .collect();
        let cat = catalog(6);
        let data = dense(&cat, &matrix);
        let config = NmfConfig {
            rank: 3,
            epochs: 30,
            seed: 99,
            implicit_zeros: false,
        };
        let a = train(&data, cat.len(), config).unwrap();
        let b = train(&data, cat.len(), config).unwrap();
        assert_eq!(a, b);
        assert!(a.users.iter().chain(&a.items).all(|&x| x > 0.0));
    }

    #[test]
    fn bad_training_inputs() {
        let cat = catalog(2);
        let empty = Interactions::new(&cat, Vec::new()).unwrap();
        assert!(matches!(
            train(&empty, 2, NmfConfig::default()),
            Err(Error::Empty(_))
        ));
        let data = dense(&cat, &[vec![1.0, 2.0]]);
        let zero_rank = NmfConfig {
            rank: 0,
            ..NmfConfig::default()
        };
        assert!(train(&data, 2, zero_rank).is_err());
    }

    /// 3 users, 4 items, rank 2: dot products worked by hand.
    ///   u0 = (1, 0): scores (0.5, 2.0, 1.0, 0.0)
    ///   u1 = (0, 1): scores (1.0, 0.0, 3.0, 0.5)
    ///   u2 = (1, 1): scores (1.5, 2.0, 4.0, 0.5)
    fn hand_model() -> FactorModel {
        FactorModel::from_factors(
            2,
            vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0],
            vec![0.5, 1.0, 2.0, 0.0, 1.0, 3.0, 0.0, 0.5],
        )
        .unwrap()
    }

    #[test]
    fn top_k_matches_hand_computed_order() {
        let model = hand_model();
        let ids = |l: &CandidateList| l.items().map(|i| i.0).collect::<Vec<_>>();
        assert_eq!(
            ids(&top_k(&model, UserIdx(0), &[], 4).unwrap()),
            vec![1, 2, 0, 3]
        );
        assert_eq!(
            ids(&top_k(&model, UserIdx(1), &[], 4).unwrap()),
            vec![2, 0, 3, 1]
        );
        assert_eq!(
            ids(&top_k(&model, UserIdx(2), &[], 4).unwrap()),
            vec![2, 1, 0, 3]
        );
        // seen items are excluded; k = 1 is the unseen argmax
        let l = top_k(&model, UserIdx(2), &[ItemIdx(2)], 1).unwrap();
        assert_eq!(ids(&l), vec![1]);
        assert_eq!(l.entries()[0].score, 2.0);
        assert!(!l.is_truncated());
    }

    #[test]
    fn top_k_ties_and_exhaustion() {
        let model = FactorModel::from_factors(1, vec![1.0], vec![1.0, 2.0, 1.0]).unwrap();
        let l = top_k(&model, UserIdx(0), &[], 3).unwrap();
        assert_eq!(l.items().map(|i| i.0).collect::<Vec<_>>(), vec![1, 0, 2]);
        let all: Vec<ItemIdx> = (0..3).map(ItemIdx).collect();
        let l = top_k(&model, UserIdx(0), &all, 2).unwrap();
        assert!(l.is_empty() && l.is_truncated());
        assert!(top_k(&model, UserIdx(5), &[], 1).is_err());
    }

    #[test]
    fn checkpoint_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.csv");
        let model = hand_model();
        model.save(&path).unwrap();
        let back = FactorModel::load(&path).unwrap();
        assert_eq!(back.users, model.users);
        assert_eq!(back.items, model.items);
    }

    #[test]
    fn score_files() {
        let cat = catalog(4);
        let data = Interactions::new(
            &cat,
            [
                ("a".to_string(), "i0".to_string(), 1.0, Split::Train),
                ("b".to_string(), "i1".to_string(), 1.0, Split::Test),
            ],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.csv");

        std::fs::write(
            &path,
            "user_id,item_id,score\na,i2,0.1\na,i3,0.9\na,i0,5\nb,i0,0.3\nb,i1,0.3\n",
        )
        .unwrap();
        let lists = load_scores(&path, &cat, &data).unwrap();
        let a = &lists[&UserIdx(0)];
        // re-sorted, training item i0 dropped
        assert_eq!(a.items().map(|i| i.0).collect::<Vec<_>>(), vec![3, 2]);
        let b = &lists[&UserIdx(1)];
        assert_eq!(b.items().map(|i| i.0).collect::<Vec<_>>(), vec![0, 1]);

        std::fs::write(&path, "user_id,item_id,score\na,i2,0.1\na,i2,0.4\n").unwrap();
        let err = load_scores(&path, &cat, &data).unwrap_err();
        assert!(err.to_string().contains("\"a\", \"i2\""), "{err}");

        std::fs::write(&path, "user_id,item_id,score\n").unwrap();
        assert!(load_scores(&path, &cat, &data).unwrap().is_empty());

        std::fs::write(&path, "user_id,item_id,score\nzz,i2,0.1\n").unwrap();
        assert!(matches!(
            load_scores(&path, &cat, &data),
            Err(Error::UnknownUser(_))
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn top_k_is_prefix_of_top_k_plus_one(
                factors in proptest::collection::vec(0u8..4, 8),
                k in 1usize..7,
            ) {
                let items: Vec<f64> = factors.iter().map(|&x| x as f64).collect();
                let model = FactorModel::from_factors(1, vec![1.0], items).unwrap();
                let a = top_k(&model, UserIdx(0), &[ItemIdx(3)], k).unwrap();
                let b = top_k(&model, UserIdx(0), &[ItemIdx(3)], k + 1).unwrap();
                prop_assert_eq!(a.entries(), &b.entries()[..a.len()]);
            }
        }
    }
}
