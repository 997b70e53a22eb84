//! Configuration-driven experiment harness.
//!
//! A TOML file names a dataset source, the protected values, the baseline and
//! the sweep grid. [`run_experiment`] then ingests, trains, profiles,
//! re-ranks every evaluated user under each `(algorithm, λ)` pair, and writes
//! plot-ready CSVs plus a manifest. All randomness is derived from the root
//! seed through named sub-seeds, so a rerun with the same file reproduces
//! every CSV byte for byte.
//!
//! ```toml
//! seed = 7
//! k = 200
//! k_prime = 10
//! algorithms = ["none", "mmr", "mmr_fairness", "ofair", "far", "pfar"]
//! lambdas = [0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99, 1.0]
//! loss_levels = [0.01, 0.02, 0.03]
//!
//! [output]
//! dir = "runs/demo"
//!
//! [dataset]
//! items = "items.csv"
//! interactions = "interactions.csv"
//! test_fraction = 0.2
//! split = "interaction"
//!
//! [protected]
//! alpha = 1.0
//! values = [{ feature = "sector", value = "Education" }]
//!
//! [baseline]
//! rank = 10
//! epochs = 100
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baseline::{self, CandidateList, FactorModel, NmfConfig};
use crate::catalog::{
    read_interactions, read_items, write_interactions, write_items, Interactions, Item,
    ItemCatalog, ProtectedGroup, ProtectedSpec, Split, UserIdx,
};
use crate::error::{ConfigIssue, Error, Result};
use crate::ingest::{self, CategorizationRule, PseudoItemConfig, RawTable, SplitMode, SynthSpec};
use crate::metrics::{self, MetricsRow, TradeoffReport};
use crate::profiles::{profile_users, write_tolerances, ToleranceProfile};
use crate::rerank::{write_reranked, Algorithm, RerankConfig, RerankedList, Reranker};

pub const DEFAULT_LAMBDAS: [f64; 8] = [0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99, 1.0];
pub const DEFAULT_LOSS_LEVELS: [f64; 3] = [0.01, 0.02, 0.03];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub k: usize,
    pub k_prime: usize,
    pub algorithms: Vec<Algorithm>,
    pub lambdas: Vec<f64>,
    pub loss_levels: Vec<f64>,
    pub output: OutputConfig,
    pub dataset: DatasetConfig,
    pub pseudo_items: Option<PseudoItemConfig>,
    pub protected: ProtectedConfig,
    pub baseline: BaselineConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            k: 200,
            k_prime: 10,
            algorithms: Algorithm::ALL.to_vec(),
            lambdas: DEFAULT_LAMBDAS.to_vec(),
            loss_levels: DEFAULT_LOSS_LEVELS.to_vec(),
            output: OutputConfig::default(),
            dataset: DatasetConfig::default(),
            pseudo_items: None,
            protected: ProtectedConfig::default(),
            baseline: BaselineConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Also write the ingested catalog and interactions.
    pub data: bool,
    pub model: bool,
    pub scores: bool,
    pub reranked: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            data: false,
            model: false,
            scores: false,
            reranked: false,
        }
    }
}

/// Exactly one of `items`+`interactions`, `synthetic` or `raw`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub items: Option<PathBuf>,
    pub interactions: Option<PathBuf>,
    /// Re-split the ratings at random with this test share.
    pub test_fraction: Option<f64>,
    pub split: SplitMode,
    pub synthetic: Option<SynthSpec>,
    pub raw: Option<RawSource>,
}

/// A ratings file plus a wide metadata table turned into features by rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSource {
    pub ratings: PathBuf,
    pub metadata: PathBuf,
    pub id_column: String,
    pub rules: Vec<CategorizationRule>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtectedValue {
    pub feature: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtectedConfig {
    pub alpha: f64,
    /// Defaults to `alpha / 100`.
    pub unprotected_weight: Option<f64>,
    /// May be left empty for synthetic data, which names its own.
    pub values: Vec<ProtectedValue>,
    /// Feature used by `far` / `pfar`; defaults to the single feature the
    /// protected values belong to.
    pub sensitive_feature: Option<String>,
}

impl Default for ProtectedConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            unprotected_weight: None,
            values: Vec::new(),
            sensitive_feature: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub rank: usize,
    pub epochs: usize,
    pub implicit_zeros: bool,
    /// Precomputed `user_id,item_id,score` file used instead of training.
    pub scores: Option<PathBuf>,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        let nmf = NmfConfig::default();
        Self {
            rank: nmf.rank,
            epochs: nmf.epochs,
            implicit_zeros: nmf.implicit_zeros,
            scores: None,
        }
    }
}

/// Deterministic 64-bit seed for a named component.
pub fn sub_seed(root: u64, name: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(root.to_le_bytes());
    h.update(name.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("32-byte digest"))
}

fn issue(path: &str, message: impl Into<String>) -> ConfigIssue {
    ConfigIssue::new(path, message)
}

impl ExperimentConfig {
    /// Parses TOML; unknown algorithm tags are reported with their index.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(vec![issue("<file>", e.message())]))?;
        let mut issues = Vec::new();
        if let Some(algs) = table.get("algorithms").and_then(|v| v.as_array()) {
            for (i, a) in algs.iter().enumerate() {
                match a.as_str() {
                    Some(tag) if tag.parse::<Algorithm>().is_ok() => {}
                    Some(tag) => issues.push(issue(
                        &format!("algorithms[{i}]"),
                        format!(
                            "unknown algorithm {tag:?}; valid tags: {}",
                            Algorithm::valid_tags()
                        ),
                    )),
                    None => issues.push(issue(&format!("algorithms[{i}]"), "expected a string")),
                }
            }
        }
        if !issues.is_empty() {
            return Err(Error::Config(issues));
        }
        let config: Self = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start].matches('\n').count() + 1)
                .map_or_else(|| "<file>".to_string(), |l| format!("line {l}"));
            Error::Config(vec![issue(&line, e.message().trim())])
        })?;
        config.check()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Semantic checks; every issue names the offending field.
    pub fn check(&self) -> Result<()> {
        let mut issues = Vec::new();
        if self.k == 0 {
            issues.push(issue("k", "k must be positive"));
        }
        if self.k_prime == 0 {
            issues.push(issue("k_prime", "k' must be positive"));
        }
        if self.k_prime > self.k {
            issues.push(issue(
                "k_prime",
                format!("k' = {} exceeds k = {}", self.k_prime, self.k),
            ));
        }
        if self.algorithms.is_empty() {
            issues.push(issue("algorithms", "at least one algorithm is required"));
        }
        if BTreeSet::from_iter(&self.algorithms).len() != self.algorithms.len() {
            issues.push(issue("algorithms", "algorithms must be distinct"));
        }
        if let Some((i, l)) = self
            .lambdas
            .iter()
            .enumerate()
            .find(|(_, l)| !(0.0..=1.0).contains(*l))
        {
            issues.push(issue(
                &format!("lambdas[{i}]"),
                format!("{l} is outside [0, 1]"),
            ));
        }
        if !self.lambdas.contains(&1.0) {
            issues.push(issue("lambdas", "the grid must include 1.0"));
        }
        if self.lambdas.windows(2).any(|w| !(w[0] < w[1])) {
            issues.push(issue("lambdas", "values must be strictly increasing"));
        }
        if let Some((i, l)) = self
            .loss_levels
            .iter()
            .enumerate()
            .find(|(_, l)| !(0.0..1.0).contains(*l))
        {
            issues.push(issue(
                &format!("loss_levels[{i}]"),
                format!("{l} is outside [0, 1)"),
            ));
        }
        let d = &self.dataset;
        let sources = [
            d.items.is_some() || d.interactions.is_some(),
            d.synthetic.is_some(),
            d.raw.is_some(),
        ];
        if sources.iter().filter(|&&s| s).count() != 1 {
            issues.push(issue(
                "dataset",
                "specify exactly one of items+interactions, synthetic or raw",
            ));
        } else if sources[0] && (d.items.is_none() || d.interactions.is_none()) {
            issues.push(issue(
                "dataset",
                "items and interactions must be given together",
            ));
        }
        if let Some(f) = d.test_fraction {
            if !(0.0..1.0).contains(&f) {
                issues.push(issue("dataset.test_fraction", "must lie in [0, 1)"));
            }
        }
        if let Some(s) = &d.synthetic {
            if let Err(e) = s.validate() {
                issues.push(issue("dataset.synthetic", e.to_string()));
            }
        }
        if let Some(raw) = &d.raw {
            if raw.rules.is_empty() {
                issues.push(issue("dataset.raw.rules", "at least one rule is required"));
            }
            for (i, r) in raw.rules.iter().enumerate() {
                if let Err(e) = r.validate() {
                    issues.push(issue(&format!("dataset.raw.rules[{i}]"), e.to_string()));
                }
            }
        }
        if let Some(p) = &self.pseudo_items {
            if let Err(e) = p.validate() {
                issues.push(issue("pseudo_items", e.to_string()));
            }
        }
        let p = &self.protected;
        if !(p.alpha > 0.0 && p.alpha.is_finite()) {
            issues.push(issue("protected.alpha", "alpha must be positive"));
        } else if let Some(w) = p.unprotected_weight {
            if !(w > 0.0 && w < p.alpha) {
                issues.push(issue(
                    "protected.unprotected_weight",
                    "unprotected weight must lie in (0, alpha)",
                ));
            }
        }
        if p.values.is_empty() && d.synthetic.is_none() {
            issues.push(issue(
                "protected.values",
                "at least one protected value is required",
            ));
        }
        let needs_sensitive = self.algorithms.iter().any(|a| a.needs_sensitive_feature());
        if needs_sensitive && p.sensitive_feature.is_none() && d.synthetic.is_none() {
            let features: BTreeSet<&str> = p.values.iter().map(|v| v.feature.as_str()).collect();
            if features.len() > 1 {
                issues.push(issue(
                    "protected.sensitive_feature",
                    "protected values span several features; name the one far/pfar should use",
                ));
            }
        }
        if self.baseline.scores.is_none() && self.baseline.rank == 0 {
            issues.push(issue("baseline.rank", "rank must be positive"));
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues))
        }
    }

    /// Rewrites relative paths against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output.dir);
        if let Some(p) = &mut self.dataset.items {
            fix(p);
        }
        if let Some(p) = &mut self.dataset.interactions {
            fix(p);
        }
        if let Some(raw) = &mut self.dataset.raw {
            fix(&mut raw.ratings);
            fix(&mut raw.metadata);
        }
        if let Some(p) = &mut self.baseline.scores {
            fix(p);
        }
    }

    pub fn nmf(&self) -> NmfConfig {
        NmfConfig {
            rank: self.baseline.rank,
            epochs: self.baseline.epochs,
            seed: sub_seed(self.seed, "nmf"),
            implicit_zeros: self.baseline.implicit_zeros,
        }
    }
}

/// Reads, normalizes and checks a config file. Relative paths are taken
/// relative to the file's directory.
pub fn validate_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut config = ExperimentConfig::from_toml(&text)?;
    config.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(config)
}

/// Catalog, interactions and protected group ready for the sweep.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub catalog: ItemCatalog,
    pub interactions: Interactions,
    pub protected: ProtectedSpec,
    pub group: ProtectedGroup,
    pub sensitive_feature: Option<usize>,
}

pub fn load_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    config.check()?;
    let d = &config.dataset;
    let split_seed = sub_seed(config.seed, "split");
    let mut generated = Vec::new();
    let (catalog, interactions) = if let Some(spec) = &d.synthetic {
        let spec = SynthSpec {
            seed: sub_seed(config.seed, "synthetic"),
            ..spec.clone()
        };
        let data = ingest::synth_dataset(&spec)?;
        generated = data.protected;
        (data.catalog, data.interactions)
    } else if let Some(raw) = &d.raw {
        let mut records = read_interactions(&raw.ratings)?;
        if let Some(f) = d.test_fraction {
            records = ingest::split_records(records, f, d.split, split_seed)?;
        }
        let reference: BTreeSet<String> = records
            .iter()
            .filter(|r| r.3 == Split::Train)
            .map(|r| r.1.clone())
            .collect();
        let table = RawTable::read(&raw.metadata, &raw.id_column)?;
        let items = ingest::categorize(&table, &raw.rules, Some(&reference))?;
        let catalog = ItemCatalog::from_raw(&items)?;
        let interactions = Interactions::new(&catalog, records)?;
        (catalog, interactions)
    } else {
        let items = d.items.as_ref().expect("checked");
        let catalog = ItemCatalog::from_raw(&read_items(items)?)?;
        let records = read_interactions(d.interactions.as_ref().expect("checked"))?;
        let mut interactions = Interactions::new(&catalog, records)?;
        if let Some(f) = d.test_fraction {
            interactions = ingest::split_train_test(&interactions, f, d.split, split_seed)?;
        }
        (catalog, interactions)
    };
    let (catalog, interactions) = match &config.pseudo_items {
        Some(p) => {
            let out = ingest::build_pseudo_items(&interactions, &catalog, p)?;
            (out.catalog, out.interactions)
        }
        None => (catalog, interactions),
    };

    let p = &config.protected;
    let values: Vec<(String, String)> = if p.values.is_empty() {
        generated.clone()
    } else {
        p.values
            .iter()
            .map(|v| (v.feature.clone(), v.value.clone()))
            .collect()
    };
    let protected = ProtectedSpec::with_weights(
        values.clone(),
        p.alpha,
        p.unprotected_weight.unwrap_or(p.alpha / 100.0),
    )?;
    let group = protected.resolve(catalog.schema())?;
    let sensitive_name = p.sensitive_feature.clone().or_else(|| {
        let features: BTreeSet<&String> = values.iter().map(|v| &v.0).collect();
        match (features.len(), &d.synthetic) {
            (1, _) => features.into_iter().next().cloned(),
            (_, Some(spec)) => spec.protected_features.first().cloned(),
            _ => None,
        }
    });
    let sensitive_feature = match sensitive_name {
        Some(name) => Some(
            catalog
                .schema()
                .feature_index(&name)
                .ok_or(Error::UnknownFeature(name))?,
        ),
        None => None,
    };
    Ok(Dataset {
        catalog,
        interactions,
        protected,
        group,
        sensitive_feature,
    })
}

/// Trains the NMF baseline unless a score file is configured.
pub fn train_baseline(config: &ExperimentConfig, data: &Dataset) -> Result<Option<FactorModel>> {
    if config.baseline.scores.is_some() {
        return Ok(None);
    }
    baseline::train(&data.interactions, data.catalog.len(), config.nmf()).map(Some)
}

/// Top-`k` candidates for every user with a training profile.
pub fn candidate_lists(
    config: &ExperimentConfig,
    data: &Dataset,
    model: Option<&FactorModel>,
) -> Result<Vec<Option<CandidateList>>> {
    let train = data.interactions.items_by_user(Split::Train);
    match (model, &config.baseline.scores) {
        (_, Some(path)) => {
            let mut loaded = baseline::load_scores(path, &data.catalog, &data.interactions)?;
            Ok((0..data.interactions.n_users())
                .map(|u| {
                    let list = loaded.remove(&UserIdx(u))?;
                    (!train[u].is_empty() && !list.is_empty()).then(|| list.prefix(config.k))
                })
                .collect())
        }
        (Some(model), None) => train
            .par_iter()
            .enumerate()
            .map(|(u, seen)| {
                if seen.is_empty() {
                    return Ok(None);
                }
                let list = baseline::top_k(model, UserIdx(u), seen, config.k)?;
                Ok((!list.is_empty()).then_some(list))
            })
            .collect(),
        (None, None) => Err(Error::invalid("baseline", "no model and no score file")),
    }
}

/// One `(algorithm, λ)` cell of the sweep.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub algorithm: Algorithm,
    pub lambda: f64,
    pub lists: Vec<RerankedList>,
    pub users: Vec<UserIdx>,
}

/// Re-ranks every user holding a candidate list under every configured pair.
pub fn rerank_all(
    config: &ExperimentConfig,
    data: &Dataset,
    candidates: &[Option<CandidateList>],
    profiles: &[Option<ToleranceProfile>],
) -> Result<Vec<SweepCell>> {
    let reranker = Reranker::new(&data.catalog, &data.group);
    let users: Vec<UserIdx> = (0..candidates.len())
        .filter(|&u| candidates[u].is_some() && profiles[u].is_some())
        .map(UserIdx)
        .collect();
    let mut cells = Vec::new();
    for &algorithm in &config.algorithms {
        for &lambda in &config.lambdas {
            let mut rc = RerankConfig::new(algorithm, lambda, config.k_prime)?;
            if algorithm.needs_sensitive_feature() {
                let a = data.sensitive_feature.ok_or_else(|| {
                    Error::invalid(
                        "sensitive_feature",
                        format!("{algorithm} needs a sensitive feature"),
                    )
                })?;
                rc = rc.with_sensitive_feature(a);
                rc.validate(&data.catalog)?;
            }
            let lists = users
                .par_iter()
                .map(|&u| {
                    reranker.rerank(
                        data.interactions.user_id(u),
                        candidates[u.0].as_ref().expect("filtered"),
                        profiles[u.0].as_ref(),
                        &rc,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            cells.push(SweepCell {
                algorithm,
                lambda,
                lists,
                users: users.clone(),
            });
        }
    }
    Ok(cells)
}

/// Metric rows in sweep order and one tradeoff report per algorithm.
pub fn evaluate(
    config: &ExperimentConfig,
    data: &Dataset,
    cells: &[SweepCell],
) -> Result<(Vec<MetricsRow>, Vec<TradeoffReport>)> {
    let test = data.interactions.items_by_user(Split::Test);
    let schema = data.catalog.schema();
    let rows: Vec<MetricsRow> = cells
        .iter()
        .map(|cell| {
            let per_user: Vec<_> = cell
                .lists
                .par_iter()
                .zip(&cell.users)
                .map(|(list, u)| {
                    let ids: Vec<_> = list.item_ids().collect();
                    let items: Vec<&Item> = ids.iter().map(|&i| data.catalog.item(i)).collect();
                    metrics::evaluate_list(
                        &ids,
                        &items,
                        &test[u.0],
                        schema,
                        &data.group,
                        config.k_prime,
                    )
                })
                .collect();
            metrics::aggregate(cell.algorithm, cell.lambda, &per_user, schema)
        })
        .collect();
    let mut reports = Vec::new();
    for &algorithm in &config.algorithms {
        let series: Vec<MetricsRow> = rows
            .iter()
            .filter(|r| r.algorithm == algorithm)
            .cloned()
            .collect();
        reports.push(metrics::tradeoff_table(&series, &config.loss_levels)?);
    }
    Ok((rows, reports))
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub rows: Vec<MetricsRow>,
    pub reports: Vec<TradeoffReport>,
    pub users_evaluated: usize,
    pub files: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    config_sha256: String,
    config_file: &'static str,
    sub_seeds: BTreeMap<&'static str, u64>,
    users: usize,
    items: usize,
    users_evaluated: usize,
    files: &'a [String],
}

/// Full pipeline: ingest, baseline, profiles, sweep, metrics, artifacts.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary> {
    let out = &config.output.dir;
    std::fs::create_dir_all(out)?;
    let data = load_dataset(config)?;
    let mut files = Vec::new();
    let mut record = |name: &str| files.push(name.to_string());

    if config.output.data {
        write_items(out.join("items.csv"), &data.catalog)?;
        write_interactions(
            out.join("interactions.csv"),
            &data.interactions,
            &data.catalog,
        )?;
        record("items.csv");
        record("interactions.csv");
    }
    let model = train_baseline(config, &data)?;
    if let (true, Some(m)) = (config.output.model, &model) {
        m.save(out.join("model.csv"))?;
        record("model.csv");
    }
    let candidates = candidate_lists(config, &data, model.as_ref())?;
    if config.output.scores {
        baseline::write_scores(
            out.join("scores.csv"),
            candidates.iter().flatten(),
            &data.catalog,
            &data.interactions,
        )?;
        record("scores.csv");
    }
    let profiles = profile_users(&data.catalog, &data.interactions);
    write_tolerances(
        out.join("tau.csv"),
        profiles.iter().flatten(),
        data.catalog.schema(),
    )?;
    record("tau.csv");

    let cells = rerank_all(config, &data, &candidates, &profiles)?;
    if config.output.reranked {
        write_reranked(
            out.join("reranked.csv"),
            cells.iter().flat_map(|c| &c.lists),
            &data.catalog,
        )?;
        record("reranked.csv");
    }
    let (rows, reports) = evaluate(config, &data, &cells)?;
    metrics::write_metrics(out.join("metrics.csv"), &rows)?;
    metrics::write_exposure_long(out.join("exposure.csv"), &rows)?;
    metrics::write_tradeoffs(out.join("tradeoff.csv"), &reports)?;
    record("metrics.csv");
    record("exposure.csv");
    record("tradeoff.csv");

    let resolved = config.to_toml();
    std::fs::write(out.join("resolved_config.toml"), &resolved)?;
    record("resolved_config.toml");
    let users_evaluated = cells.first().map_or(0, |c| c.users.len());
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        config_sha256: hex::encode(Sha256::digest(resolved.as_bytes())),
        config_file: "resolved_config.toml",
        sub_seeds: ["nmf", "split", "synthetic"]
            .into_iter()
            .map(|n| (n, sub_seed(config.seed, n)))
            .collect(),
        users: data.interactions.n_users(),
        items: data.catalog.len(),
        users_evaluated,
        files: &files,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(out.join("manifest.json"), json + "\n")?;
    files.push("manifest.json".into());
    Ok(RunSummary {
        output_dir: out.clone(),
        rows,
        reports,
        users_evaluated,
        files,
    })
}
