use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ofair::baseline::write_scores;
use ofair::catalog::{write_interactions, write_items};
use ofair::experiment::{self, ExperimentConfig};
use ofair::metrics;
use ofair::profiles::{profile_users, write_tolerances};
use ofair::rerank::write_reranked;
use ofair::Error;

/// Fairness-aware re-ranking experiments driven by a TOML config.
///
/// Each verb runs the pipeline up to its stage and writes that stage's
/// artifacts into the output directory.
#[derive(Parser)]
#[command(name = "ofair", version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the root seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Verb {
    /// Write the ingested catalog and interactions.
    Ingest,
    /// Train the baseline and write the model and top-k scores.
    Train,
    /// Write per-user tolerance vectors.
    Profile,
    /// Write re-ranked lists for every algorithm and lambda.
    Rerank,
    /// Write metrics, per-value exposure and tradeoff tables.
    Evaluate,
    /// Run everything and write a manifest.
    Sweep,
    /// Check the config and print it with defaults filled in.
    Validate,
}

fn load(cli: &Cli) -> ofair::Result<ExperimentConfig> {
    let path = cli.config.as_ref().ok_or_else(|| {
        Error::Config(vec![ofair::error::ConfigIssue::new(
            "--config",
            "a config file is required",
        )])
    })?;
    let mut config = experiment::validate_config(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output.dir = out.clone();
    }
    Ok(config)
}

fn run(cli: &Cli) -> ofair::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter {
                name: "threads".into(),
                reason: e.to_string(),
            })?;
    }
    let config = load(cli)?;
    let out = config.output.dir.clone();
    let verb = cli.verb;
    if let Verb::Validate = verb {
        print!("{}", config.to_toml());
        return Ok(());
    }
    if let Verb::Sweep = verb {
        let summary = experiment::run_experiment(&config)?;
        println!(
            "{} users evaluated; wrote {} files to {}",
            summary.users_evaluated,
            summary.files.len(),
            summary.output_dir.display()
        );
        return Ok(());
    }
    std::fs::create_dir_all(&out)?;
    let data = experiment::load_dataset(&config)?;
    if let Verb::Ingest = verb {
        write_items(out.join("items.csv"), &data.catalog)?;
        write_interactions(
            out.join("interactions.csv"),
            &data.interactions,
            &data.catalog,
        )?;
        return Ok(());
    }
    let profiles = profile_users(&data.catalog, &data.interactions);
    if let Verb::Profile = verb {
        return write_tolerances(
            out.join("tau.csv"),
            profiles.iter().flatten(),
            data.catalog.schema(),
        );
    }
    let model = experiment::train_baseline(&config, &data)?;
    let candidates = experiment::candidate_lists(&config, &data, model.as_ref())?;
    if let Verb::Train = verb {
        if let Some(m) = &model {
            m.save(out.join("model.csv"))?;
        }
        return write_scores(
            out.join("scores.csv"),
            candidates.iter().flatten(),
            &data.catalog,
            &data.interactions,
        );
    }
    let cells = experiment::rerank_all(&config, &data, &candidates, &profiles)?;
    if let Verb::Rerank = verb {
        return write_reranked(
            out.join("reranked.csv"),
            cells.iter().flat_map(|c| &c.lists),
            &data.catalog,
        );
    }
    let (rows, reports) = experiment::evaluate(&config, &data, &cells)?;
    metrics::write_metrics(out.join("metrics.csv"), &rows)?;
    metrics::write_exposure_long(out.join("exposure.csv"), &rows)?;
    metrics::write_tradeoffs(out.join("tradeoff.csv"), &reports)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let issues = match &e {
                Error::Config(v) => serde_json::to_value(v).unwrap_or_default(),
                _ => serde_json::Value::Null,
            };
            let line = serde_json::json!({
                "error": e.kind(),
                "message": e.to_string(),
                "issues": issues,
            });
            eprintln!("{line}");
            ExitCode::from(2)
        }
    }
}
