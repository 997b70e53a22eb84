//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use ofair::baseline::{self, Candidate, CandidateList, NmfConfig};
use ofair::catalog::{
    encode_item, DummyVector, Interactions, Item, ItemCatalog, ItemIdx, ProtectedSpec, RawItem,
    Split, UserIdx,
};
use ofair::experiment::{self, ExperimentConfig};
use ofair::ingest::{build_pseudo_items, Linkage, PseudoItemConfig};
use ofair::metrics::{self, MetricsRow};
use ofair::profiles::{tolerance, CombinedWeights};
use ofair::rerank::{wcos, Algorithm, RerankConfig, Reranker, SparseCosine};
use proptest::prelude::*;
use proptest::test_runner::{Config as PtConfig, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 2.2e-16;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn raw(id: &str, pairs: &[(&str, &[&str])]) -> RawItem {
    let features = pairs
        .iter()
        .map(|(f, vs)| (f.to_string(), vs.iter().map(|v| v.to_string()).collect()))
        .collect();
    (id.to_string(), features)
}

fn naive_entropy(values: &[&str]) -> f64 {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    let n = values.len() as f64;
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0)
}

// 1

fn entropy() -> Outcome {
    for c in 1..=12usize {
        let items: Vec<RawItem> = (0..c)
            .map(|v| {
                let name = format!("v{v:02}");
                raw(&format!("i{v}"), &[("f", &[name.as_str()]), ("g", &["x"])])
            })
            .collect();
        let catalog = ItemCatalog::from_raw(&items).unwrap();
        let profile: Vec<&Item> = catalog.items().iter().collect();
        let t = tolerance("u", &profile, catalog.schema()).unwrap();
        let f = catalog.schema().feature_index("f").unwrap();
        let g = catalog.schema().feature_index("g").unwrap();
        ensure!(
            (t.tau()[f] - (c as f64).log2()).abs() < 1e-12,
            "uniform c={c}: {}",
            t.tau()[f]
        );
        ensure!(
            t.tau()[g] == 0.0,
            "single-valued feature gave {}",
            t.tau()[g]
        );
    }
    let catalog = ItemCatalog::from_raw(&[
        raw(
            "i1",
            &[("Region", &["Africa"]), ("Sector", &["Agriculture"])],
        ),
        raw("i2", &[("Region", &["Africa"]), ("Sector", &["Health"])]),
        raw("i3", &[("Region", &["Africa"]), ("Sector", &["Clothing"])]),
        raw("x", &[("Region", &["Asia"]), ("Sector", &["Education"])]),
    ])
    .unwrap();
    let profile: Vec<&Item> = catalog.items()[..3].iter().collect();
    let t = tolerance("user1", &profile, catalog.schema()).unwrap();
    let region = catalog.schema().feature_index("Region").unwrap();
    let sector = catalog.schema().feature_index("Sector").unwrap();
    ensure!(t.tau()[region] == 0.0, "region {}", t.tau()[region]);
    ensure!(
        (t.tau()[sector] - 3f64.log2()).abs() < 1e-12,
        "sector {}",
        t.tau()[sector]
    );
    Ok(format!("region 0, sector {:.6}", t.tau()[sector]))
}

// 2

fn weighted_cosine() -> Outcome {
    let dim = 12;
    let strategy = (
        prop::collection::vec(0.01f64..10.0, dim),
        prop::collection::vec(prop_oneof![Just(EPS), Just(1.0), 0.0f64..2.0], dim),
        prop::collection::vec(prop_oneof![Just(EPS), Just(1.0), 0.0f64..2.0], dim),
        0.001f64..1000.0,
    )
        .prop_filter("non-zero vectors", |(_, a, b, _)| {
            a.iter().any(|&x| x > 1e-3) && b.iter().any(|&x| x > 1e-3)
        });
    let mut runner = TestRunner::new(PtConfig {
        cases: 200,
        failure_persistence: None,
        ..PtConfig::default()
    });
    runner
        .run(&strategy, |(z, a, b, scale)| {
            let w = CombinedWeights::from_weights("u", z.clone()).unwrap();
            let ws =
                CombinedWeights::from_weights("u", z.iter().map(|x| x * scale).collect()).unwrap();
            let (a, b) = (DummyVector::from(a), DummyVector::from(b));
            let ab = wcos(&a, &b, &w);
            prop_assert!((wcos(&a, &a, &w) - 1.0).abs() < 1e-12);
            prop_assert!((wcos(&b, &b, &w) - 1.0).abs() < 1e-12);
            prop_assert_eq!(ab, wcos(&b, &a, &w));
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert!((wcos(&a, &b, &ws) - ab).abs() < 1e-12);
            Ok(())
        })
        .map_err(|e| e.to_string())?;

    // sparse path agrees with the dense formula on encoded items
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let catalog = random_catalog(&mut rng, 6);
        let schema = catalog.schema();
        let z: Vec<f64> = (0..schema.dim())
            .map(|_| rng.gen_range(0.01..5.0))
            .collect();
        let w = CombinedWeights::from_weights("u", z).unwrap();
        let sparse = SparseCosine::new(&w);
        let items = catalog.items();
        let (a, b) = (&items[0], &items[1]);
        let s = sparse.similarity(
            a.held(),
            &sparse.prepare(a.held()),
            b.held(),
            &sparse.prepare(b.held()),
        );
        let d = wcos(&encode_item(a, schema), &encode_item(b, schema), &w);
        ensure!((s - d).abs() < 1e-12, "sparse {s} dense {d}");
    }
    Ok("200 cases".into())
}

// 3

/// Random items over three features: `a` single-valued (the sensitive
/// feature), `b` single-valued, `c` with one or two values.
fn random_catalog(rng: &mut ChaCha8Rng, n: usize) -> ItemCatalog {
    let items: Vec<RawItem> = (0..n)
        .map(|i| {
            let mut f: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
            f.insert("a".into(), [format!("a{}", rng.gen_range(0..3))].into());
            f.insert("b".into(), [format!("b{}", rng.gen_range(0..4))].into());
            let mut c = BTreeSet::new();
            for _ in 0..rng.gen_range(1..=2) {
                c.insert(format!("c{}", rng.gen_range(0..3)));
            }
            f.insert("c".into(), c);
            (format!("i{i}"), f)
        })
        .collect();
    ItemCatalog::from_raw(&items).unwrap()
}

/// Values of `item` on `feature` as strings.
fn labels(catalog: &ItemCatalog, item: &Item, feature: usize) -> Vec<String> {
    let f = &catalog.schema().features()[feature];
    item.values(feature)
        .iter()
        .map(|&v| f.values[v].clone())
        .collect()
}

/// Dense smoothed vector built from string labels, independent of the encoder.
fn dense(catalog: &ItemCatalog, item: &Item) -> Vec<f64> {
    let schema = catalog.schema();
    let mut out = Vec::new();
    for (j, f) in schema.features().iter().enumerate() {
        let held = labels(catalog, item, j);
        for v in &f.values {
            out.push(if held.contains(v) { 1.0 } else { EPS });
        }
    }
    out
}

fn dense_cos(a: &[f64], b: &[f64], z: &[f64]) -> f64 {
    let dot = |x: &[f64], y: &[f64]| -> f64 { (0..z.len()).map(|d| z[d] * x[d] * y[d]).sum() };
    (dot(a, b) / (dot(a, a).sqrt() * dot(b, b).sqrt())).clamp(0.0, 1.0)
}

/// Per-dummy weights `max(τ, 1e-6) · mask` computed from string labels.
fn naive_weights(
    catalog: &ItemCatalog,
    profile: &[&Item],
    protected: &BTreeSet<(String, String)>,
    alpha: f64,
    use_tau: bool,
    use_mask: bool,
) -> Vec<f64> {
    let schema = catalog.schema();
    let mut z = Vec::new();
    for (j, f) in schema.features().iter().enumerate() {
        let occurrences: Vec<String> = profile.iter().flat_map(|i| labels(catalog, i, j)).collect();
        let refs: Vec<&str> = occurrences.iter().map(String::as_str).collect();
        let tau = naive_entropy(&refs).max(1e-6);
        for v in &f.values {
            let m = if protected.contains(&(f.name.clone(), v.clone())) {
                alpha
            } else {
                alpha / 100.0
            };
            z.push(if use_tau { tau } else { 1.0 } * if use_mask { m } else { 1.0 });
        }
    }
    z
}

/// Step-wise greedy: every remaining candidate is rescored against the full
/// selected set; ties go to the earlier candidate.
fn naive_greedy(n: usize, k: usize, score: impl Fn(usize, &[usize]) -> f64) -> Vec<usize> {
    let mut selected = Vec::new();
    while selected.len() < k.min(n) {
        let mut best: Option<(usize, f64)> = None;
        for v in 0..n {
            if selected.contains(&v) {
                continue;
            }
            let s = score(v, &selected);
            if best.is_none() || s > best.unwrap().1 {
                best = Some((v, s));
            }
        }
        selected.push(best.unwrap().0);
    }
    selected
}

fn greedy_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let algorithms = [
        Algorithm::Mmr,
        Algorithm::Xquad,
        Algorithm::Far,
        Algorithm::Pfar,
        Algorithm::Ofair,
        Algorithm::MmrTolerance,
        Algorithm::MmrFairness,
    ];
    let mut checked = 0;
    for instance in 0..100 {
        let n_items = 12;
        let catalog = random_catalog(&mut rng, n_items);
        let schema = catalog.schema();
        let a = schema.feature_index("a").unwrap();
        let protected: BTreeSet<(String, String)> = [("a", "a2"), ("c", "c0")]
            .iter()
            .filter(|(f, v)| schema.resolve(f, v).is_ok())
            .map(|(f, v)| (f.to_string(), v.to_string()))
            .collect();
        if protected.is_empty() {
            continue;
        }
        let alpha = 1.0;
        let group = ProtectedSpec::new(protected.clone(), alpha)
            .unwrap()
            .resolve(schema)
            .unwrap();

        let profile_ids: Vec<usize> = (0..rng.gen_range(1..=5))
            .map(|_| rng.gen_range(0..n_items))
            .collect();
        let profile_items: Vec<&Item> = profile_ids.iter().map(|&i| &catalog.items()[i]).collect();
        let profile = tolerance("u", &profile_items, schema).unwrap();

        let r = rng.gen_range(1..=8);
        let k = rng.gen_range(1..=4);
        // at λ = 0 candidates disjoint from the list tie up to rounding
        let lambda = [0.3, 0.5, 0.7, 0.9, 1.0, 1.0 - rng.gen::<f64>()][rng.gen_range(0..6)];
        let mut pool: Vec<usize> = (0..n_items).collect();
        let mut entries = Vec::new();
        for _ in 0..r {
            let i = pool.swap_remove(rng.gen_range(0..pool.len()));
            entries.push(Candidate {
                item: ItemIdx(i),
                score: rng.gen_range(0.0..5.0),
            });
        }
        let list = CandidateList::new(UserIdx(0), entries).unwrap();
        let cand: Vec<&Item> = list.items().map(|i| catalog.item(i)).collect();
        let rec: Vec<f64> = list.entries().iter().map(|c| c.score).collect();
        let vecs: Vec<Vec<f64>> = cand.iter().map(|i| dense(&catalog, i)).collect();
        let tau_a = {
            let occ: Vec<String> = profile_items
                .iter()
                .flat_map(|i| labels(&catalog, i, a))
                .collect();
            naive_entropy(&occ.iter().map(String::as_str).collect::<Vec<_>>())
        };

        for alg in algorithms {
            let expected: Vec<usize> = match alg {
                Algorithm::Mmr
                | Algorithm::Ofair
                | Algorithm::MmrTolerance
                | Algorithm::MmrFairness => {
                    let use_tau = matches!(alg, Algorithm::Ofair | Algorithm::MmrTolerance);
                    let use_mask = matches!(alg, Algorithm::Ofair | Algorithm::MmrFairness);
                    let z = naive_weights(
                        &catalog,
                        &profile_items,
                        &protected,
                        alpha,
                        use_tau,
                        use_mask,
                    );
                    naive_greedy(r, k, |v, s| {
                        let penalty: f64 =
                            s.iter().map(|&x| dense_cos(&vecs[v], &vecs[x], &z)).sum();
                        lambda * rec[v] - (1.0 - lambda) * penalty
                    })
                }
                Algorithm::Xquad => naive_greedy(r, k, |v, s| {
                    let mine: Vec<(usize, String)> = (0..schema.n_features())
                        .flat_map(|j| {
                            labels(&catalog, cand[v], j)
                                .into_iter()
                                .map(move |l| (j, l))
                        })
                        .collect();
                    let novel = mine.iter().any(|(j, l)| {
                        s.iter()
                            .all(|&x| !labels(&catalog, cand[x], *j).contains(l))
                    });
                    lambda * rec[v] + (1.0 - lambda) * if novel { 1.0 } else { 0.0 }
                }),
                Algorithm::Far | Algorithm::Pfar => {
                    let t = if alg == Algorithm::Far { 1.0 } else { tau_a };
                    naive_greedy(r, k, |v, s| {
                        let mine = labels(&catalog, cand[v], a);
                        let new = s.iter().all(|&x| labels(&catalog, cand[x], a) != mine);
                        lambda * rec[v] + (1.0 - lambda) * t * if new { 1.0 } else { 0.0 }
                    })
                }
                _ => unreachable!(),
            };
            let expected: Vec<ItemIdx> = expected
                .into_iter()
                .map(|p| list.entries()[p].item)
                .collect();
            let config = RerankConfig::new(alg, lambda, k)
                .unwrap()
                .with_sensitive_feature(a);
            let got: Vec<ItemIdx> = Reranker::new(&catalog, &group)
                .rerank("u", &list, Some(&profile), &config)
                .unwrap()
                .item_ids()
                .collect();
            ensure!(
                got == expected,
                "instance {instance} {alg}: got {got:?}, oracle {expected:?}"
            );
            checked += 1;
        }
    }
    ensure!(checked >= 630, "only {checked} comparisons");
    Ok(format!("{checked} comparisons"))
}

// 4, 5, 9

const SWEEP_SEED: u64 = 2024;

fn sweep_config(dir: &std::path::Path) -> ExperimentConfig {
    let text = format!(
        r#"
seed = {SWEEP_SEED}
k = 200
k_prime = 10
algorithms = ["none", "mmr", "mmr_fairness", "ofair", "far", "pfar", "mmr_tolerance", "xquad"]

[output]
dir = "{}"

[dataset.synthetic]
users = 1000
items = 2000
ratings_per_user = 30
prevalence = 0.1

[baseline]
rank = 10
epochs = 300
implicit_zeros = true
"#,
        dir.display()
    );
    ExperimentConfig::from_toml(&text).unwrap()
}

fn lambda_one_identity() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = sweep_config(dir.path());
    let data = experiment::load_dataset(&config).unwrap();
    ensure!(
        data.interactions.n_users() == 1000 && data.catalog.len() == 2000,
        "dataset size"
    );
    let model = experiment::train_baseline(&config, &data).unwrap();
    let candidates = experiment::candidate_lists(&config, &data, model.as_ref()).unwrap();
    let profiles = ofair::profiles::profile_users(&data.catalog, &data.interactions);
    let cells = experiment::rerank_all(&config, &data, &candidates, &profiles).unwrap();
    let mut lists = 0;
    for cell in cells.iter().filter(|c| c.lambda == 1.0) {
        for (list, u) in cell.lists.iter().zip(&cell.users) {
            let base: Vec<ItemIdx> = candidates[u.0].as_ref().unwrap().items().take(10).collect();
            let got: Vec<ItemIdx> = list.item_ids().collect();
            ensure!(
                got == base,
                "{} user {}: {got:?} vs {base:?}",
                cell.algorithm,
                u.0
            );
            lists += 1;
        }
    }
    ensure!(lists == 8 * 1000, "{lists} lists compared");
    Ok(format!("{lists} lists identical"))
}

fn qualitative_ordering() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let summary =
        experiment::run_experiment(&sweep_config(dir.path())).map_err(|e| e.to_string())?;
    let report = |a: Algorithm| summary.reports.iter().find(|r| r.algorithm == a).unwrap();
    let base = report(Algorithm::None).baseline_exposure;
    let mut lines = Vec::new();
    let mut ok = true;
    for level in [0.01, 0.02, 0.03] {
        let at = |a: Algorithm| report(a).exposure_at(level).unwrap_or(f64::NAN);
        let (o, f, m) = (
            at(Algorithm::Ofair),
            at(Algorithm::MmrFairness),
            at(Algorithm::Mmr),
        );
        let (far, pfar) = (at(Algorithm::Far), at(Algorithm::Pfar));
        let holds =
            o >= f && f >= m && m >= base && far - base <= f - base && pfar - base <= f - base;
        ok &= holds;
        lines.push(format!(
            "{:.0}%: ofair {o:.4} mmr_fairness {f:.4} mmr {m:.4} far {far:.4} pfar {pfar:.4}",
            level * 100.0
        ));
    }
    let detail = format!(
        "seed {SWEEP_SEED}, baseline {base:.4}; {}",
        lines.join("; ")
    );
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn determinism() -> Outcome {
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        experiment::run_experiment(&sweep_config(dir.path())).map_err(|e| e.to_string())?;
        let files: Vec<Vec<u8>> = ["metrics.csv", "exposure.csv", "tradeoff.csv", "tau.csv"]
            .iter()
            .map(|f| std::fs::read(dir.path().join(f)).unwrap())
            .collect();
        outputs.push(files);
    }
    ensure!(outputs[0] == outputs[1], "metric CSVs differ between runs");
    Ok("metrics, exposure, tradeoff and tau CSVs identical".into())
}

// 6

fn row(lambda: f64, ndcg: f64, exposure: f64) -> MetricsRow {
    MetricsRow {
        algorithm: Algorithm::Ofair,
        lambda,
        users: 1,
        precision: 0.0,
        recall: 0.0,
        ndcg,
        ild: 0.0,
        list_entropy: 0.0,
        exposure,
        per_value_exposure: BTreeMap::new(),
    }
}

fn interpolation() -> Outcome {
    let close = |got: Option<f64>, want: f64| got.is_some_and(|g| (g - want).abs() < 1e-9);
    // monotone curve
    let rows = [
        row(0.5, 0.30, 0.30),
        row(0.8, 0.38, 0.20),
        row(1.0, 0.40, 0.10),
    ];
    let t = metrics::tradeoff_table(&rows, &[0.025, 0.1, 0.0, 0.25, 0.3]).unwrap();
    // 0.39 halfway between 0.40 and 0.38
    ensure!(
        close(t.exposure_at(0.025), 0.15),
        "{:?}",
        t.exposure_at(0.025)
    );
    // 0.36 a quarter of the way from 0.38 down to 0.30
    ensure!(close(t.exposure_at(0.1), 0.225), "{:?}", t.exposure_at(0.1));
    ensure!(close(t.exposure_at(0.0), 0.10), "{:?}", t.exposure_at(0.0));
    ensure!(
        close(t.exposure_at(0.25), 0.30),
        "{:?}",
        t.exposure_at(0.25)
    );
    ensure!(t.exposure_at(0.3).is_none(), "extrapolated below the curve");

    // non-monotone curve: the first bracket walking down from λ = 1 wins
    let rows = [
        row(0.5, 0.42, 0.50),
        row(0.8, 0.36, 0.30),
        row(1.0, 0.40, 0.10),
    ];
    let t = metrics::tradeoff_table(&rows, &[0.05, -0.04, -0.1]).unwrap();
    ensure!(
        close(t.exposure_at(0.05), 0.20),
        "{:?}",
        t.exposure_at(0.05)
    );
    // target 0.416 on the (0.36, 0.42) segment: t = 56/60
    let want = 0.30 * (4.0 / 60.0) + 0.50 * (56.0 / 60.0);
    ensure!(
        close(t.exposure_at(-0.04), want),
        "{:?}",
        t.exposure_at(-0.04)
    );
    ensure!(
        t.exposure_at(-0.1).is_none(),
        "extrapolated above the curve"
    );

    // flat tail
    let rows = [row(0.9, 0.20, 0.40), row(1.0, 0.20, 0.10)];
    let t = metrics::tradeoff_table(&rows, &[0.01]).unwrap();
    ensure!(t.exposure_at(0.01).is_none(), "flat curve extrapolated");
    Ok("3-point fixtures".into())
}

// 7

fn nmf_catalog(m: usize) -> ItemCatalog {
    let items: Vec<RawItem> = (0..m)
        .map(|i| raw(&format!("i{i:03}"), &[("f", &["x"])]))
        .collect();
    ItemCatalog::from_raw(&items).unwrap()
}

fn nmf() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for seed in 0..20u64 {
        let (n, m) = (rng.gen_range(3..15), rng.gen_range(3..15));
        let catalog = nmf_catalog(m);
        let mut records = Vec::new();
        for u in 0..n {
            for i in 0..m {
                if rng.gen_bool(0.6) {
                    records.push((
                        format!("u{u:03}"),
                        format!("i{i:03}"),
                        rng.gen_range(1.0..5.0),
                        Split::Train,
                    ));
                }
            }
        }
        records.push(("u000".into(), "i000".into(), 3.0, Split::Train));
        records.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
        records.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
        let data = Interactions::new(&catalog, records).unwrap();
        for implicit_zeros in [false, true] {
            let config = NmfConfig {
                rank: rng.gen_range(1..5),
                epochs: 100,
                seed,
                implicit_zeros,
            };
            let model = baseline::train(&data, m, config).unwrap();
            for (e, w) in model.objective_trace().windows(2).enumerate() {
                ensure!(
                    w[1] <= w[0] + 1e-9 * w[0].max(1.0),
                    "matrix {seed} epoch {e}: {} -> {}",
                    w[0],
                    w[1]
                );
            }
        }
    }

    let (n, m) = (8, 10);
    let u: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let v: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..2.0)).collect();
    let catalog = nmf_catalog(m);
    let records: Vec<_> = (0..n)
        .flat_map(|a| (0..m).map(move |b| (a, b)))
        .map(|(a, b)| {
            (
                format!("u{a:03}"),
                format!("i{b:03}"),
                u[a] * v[b],
                Split::Train,
            )
        })
        .collect();
    let data = Interactions::new(&catalog, records).unwrap();
    let model = baseline::train(
        &data,
        m,
        NmfConfig {
            rank: 1,
            epochs: 1000,
            seed: 5,
            implicit_zeros: false,
        },
    )
    .unwrap();
    let rmse = model.rmse(data.ratings().iter().map(|r| (r.user, r.item, r.value)));
    ensure!(rmse < 1e-3, "rank-1 rmse {rmse}");
    Ok(format!("40 monotone traces, rank-1 rmse {rmse:.2e}"))
}

// 8

fn metric_fixtures() -> Outcome {
    let ids = |v: &[usize]| v.iter().map(|&i| ItemIdx(i)).collect::<Vec<_>>();
    let n = metrics::ndcg(&ids(&[7, 8, 3, 9]), &ids(&[3]), 10);
    ensure!(n == 0.5, "single hit at rank 3 gave {n}");

    let catalog = ItemCatalog::from_raw(&[
        raw("a", &[("country", &["KE"]), ("sector", &["food"])]),
        raw("b", &[("country", &["KE"]), ("sector", &["food"])]),
        raw("c", &[("country", &["PE"]), ("sector", &["edu"])]),
        raw("d", &[("country", &["SO"]), ("sector", &["arts"])]),
    ])
    .unwrap();
    let schema = catalog.schema();
    let group = ProtectedSpec::new([("sector", "edu"), ("country", "SO")], 1.0)
        .unwrap()
        .resolve(schema)
        .unwrap();
    let all: Vec<&Item> = catalog.items().iter().collect();
    for len in 0..=all.len() {
        for start in 0..all.len() {
            let list: Vec<&Item> = all.iter().cycle().skip(start).take(len).copied().collect();
            let k = len.max(1);
            let p = metrics::exposure(&list, &group, k).protected;
            let u = metrics::unprotected_exposure(&list, &group, k);
            ensure!(len == 0 || p + u == 1.0, "exposure complement {p} + {u}");
        }
    }

    let item = |id: &str| catalog.item(catalog.find(id).unwrap());
    ensure!(metrics::ild(&[], schema) == 0.0, "empty list");
    ensure!(metrics::ild(&[item("a")], schema) == 0.0, "single item");
    ensure!(
        metrics::ild(&[item("a"), item("b")], schema) == 0.0,
        "identical items"
    );
    ensure!(
        metrics::ild(&[item("a"), item("a"), item("b")], schema) == 0.0,
        "repeated items"
    );
    Ok("nDCG 0.5, exposure complement, ILD degenerate cases".into())
}

// 10

fn pseudo_items() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let per_blob = 30;
    let mut items = Vec::new();
    for blob in ["x", "y"] {
        for i in 0..per_blob {
            let mut f: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
            for feat in ["f1", "f2", "f3", "f4"] {
                // one feature in five strays to a second blob-local value
                let v = if rng.gen_bool(0.2) { 1 } else { 0 };
                f.insert(feat.into(), [format!("{blob}{v}")].into());
            }
            items.push((format!("{blob}{i:02}"), f));
        }
    }
    let catalog = ItemCatalog::from_raw(&items).unwrap();
    let mut records = Vec::new();
    for u in 0..40 {
        let mut pool: Vec<usize> = (0..catalog.len()).collect();
        // some users only rate one blob
        if u % 4 == 0 {
            pool.retain(|&i| i < per_blob);
        }
        for _ in 0..6 {
            let i = pool.swap_remove(rng.gen_range(0..pool.len()));
            let split = if rng.gen_bool(0.2) {
                Split::Test
            } else {
                Split::Train
            };
            records.push((
                format!("u{u:02}"),
                catalog.items()[i].id().to_string(),
                rng.gen_range(1.0..5.0),
                split,
            ));
        }
    }
    let interactions = Interactions::new(&catalog, records).unwrap();
    let k = 2;
    let config = PseudoItemConfig {
        features: vec!["f1".into(), "f2".into(), "f3".into(), "f4".into()],
        linkage: Linkage::Average,
        cluster_counts: (2..=8).collect(),
        k_core: k,
    };
    let out = build_pseudo_items(&interactions, &catalog, &config).map_err(|e| e.to_string())?;
    ensure!(
        out.n_clusters == 2,
        "picked {} clusters ({:?})",
        out.n_clusters,
        out.silhouettes
    );
    let blob_of = |i: usize| catalog.items()[i].id().starts_with('x');
    for a in 0..catalog.len() {
        for b in 0..catalog.len() {
            ensure!(
                (out.assignment[a] == out.assignment[b]) == (blob_of(a) == blob_of(b)),
                "items {a} and {b} split across the true blobs"
            );
        }
    }

    let mut user_deg: BTreeMap<UserIdx, BTreeSet<ItemIdx>> = BTreeMap::new();
    let mut item_deg: BTreeMap<ItemIdx, BTreeSet<UserIdx>> = BTreeMap::new();
    for r in out.interactions.ratings() {
        user_deg.entry(r.user).or_default().insert(r.item);
        item_deg.entry(r.item).or_default().insert(r.user);
    }
    ensure!(!user_deg.is_empty(), "k-core is empty");
    ensure!(
        user_deg.values().all(|s| s.len() >= k),
        "user below degree {k}"
    );
    ensure!(
        item_deg.values().all(|s| s.len() >= k),
        "item below degree {k}"
    );
    ensure!(
        item_deg.len() == out.catalog.len(),
        "catalog keeps unrated pseudo-items"
    );
    ensure!(user_deg.len() < 40, "filter removed nothing");
    Ok(format!(
        "{} clusters, {} users kept",
        out.n_clusters,
        user_deg.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("entropy correctness", entropy),
        ("weighted cosine suite", weighted_cosine),
        ("greedy oracle equivalence", greedy_oracle),
        ("lambda = 1 identity", lambda_one_identity),
        ("qualitative exposure ordering", qualitative_ordering),
        ("interpolation correctness", interpolation),
        ("nmf properties", nmf),
        ("metric fixtures", metric_fixtures),
        ("pipeline determinism", determinism),
        ("pseudo-item pipeline", pseudo_items),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:2} {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:2} {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
