//! Raw metadata to categorical features, then items clustered into
//! pseudo-items with a k-core filter on the collapsed ratings.
//!
//!     cargo run --release --example pseudo_items

use std::collections::BTreeMap;

use ofair::catalog::{Interactions, ItemCatalog, Split};
use ofair::ingest::{
    self, build_pseudo_items, CategorizationRule, PseudoItemConfig, RawTable, RuleKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> ofair::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // two loan types: small, fast-funding food/retail loans and large, slow
    // education/health loans, with some noise
    let columns = ["id", "amount", "days_to_fund", "sector"]
        .map(String::from)
        .to_vec();
    let rows: Vec<(String, Vec<String>)> = (0..80)
        .map(|i| {
            let small = i % 2 == 0;
            let sectors = if small {
                ["Food", "Retail"]
            } else {
                ["Education", "Health"]
            };
            let sector = sectors[rng.gen_range(0..2)];
            let amount = if small != rng.gen_bool(0.1) {
                rng.gen_range(100..600)
            } else {
                rng.gen_range(1500..4000)
            };
            let days: f64 = if small {
                rng.gen_range(2.0..10.0)
            } else {
                rng.gen_range(15.0..40.0)
            };
            let id = format!("loan{i:03}");
            (
                id.clone(),
                vec![
                    id,
                    amount.to_string(),
                    format!("{days:.1}"),
                    sector.to_string(),
                ],
            )
        })
        .collect();
    let table = RawTable::new(columns, rows)?;

    let mut rules = vec![
        CategorizationRule::new(
            "amount",
            "amount",
            RuleKind::AboveMean {
                above: "large".into(),
                below: "small".into(),
            },
        ),
        CategorizationRule::new("sector", "sector", RuleKind::Passthrough),
    ];
    // the funding-rate feature: 100 / days, split at the median
    let pfr_column: Vec<String> = table
        .rows()
        .iter()
        .map(|(_, cells)| ingest::pfr(cells[2].parse().unwrap()).map(|p| p.to_string()))
        .collect::<ofair::Result<_>>()?;
    let mut columns = table.columns().to_vec();
    columns.push("pfr".into());
    let rows = table
        .rows()
        .iter()
        .zip(pfr_column)
        .map(|((id, cells), p)| (id.clone(), cells.iter().cloned().chain([p]).collect()))
        .collect();
    let table = RawTable::new(columns, rows)?;
    rules.push(CategorizationRule::new(
        "pfr",
        "pfr",
        RuleKind::Buckets { count: 2 },
    ));

    let items = ingest::categorize(&table, &rules, None)?;
    let catalog = ItemCatalog::from_raw(&items)?;
    for f in catalog.schema().features() {
        println!("{:<7} {:?}", f.name, f.values);
    }

    let mut records = Vec::new();
    for u in 0..50 {
        for _ in 0..8 {
            let i = rng.gen_range(0..catalog.len());
            records.push((
                format!("lender{u:02}"),
                catalog.items()[i].id().to_string(),
                1.0,
                Split::Train,
            ));
        }
    }
    records.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
    records.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
    let interactions = Interactions::new(&catalog, records)?;

    let config = PseudoItemConfig {
        features: vec!["amount".into(), "pfr".into()],
        cluster_counts: (2..=3).collect(),
        k_core: 3,
        ..PseudoItemConfig::default()
    };
    let out = build_pseudo_items(&interactions, &catalog, &config)?;
    println!("\nsilhouette by cluster count:");
    for (k, s) in &out.silhouettes {
        println!("  {k:>2} {s:.3}");
    }
    println!(
        "chose {} clusters (silhouette {:.3})",
        out.n_clusters, out.silhouette
    );
    let per_cluster = out.assignment.iter().fold(BTreeMap::new(), |mut m, &c| {
        *m.entry(c).or_insert(0) += 1;
        m
    });
    println!(
        "cluster sizes {:?}",
        per_cluster.values().collect::<Vec<_>>()
    );
    println!(
        "after the 3-core: {} pseudo-items, {} users, {} ratings",
        out.catalog.len(),
        out.interactions.n_users(),
        out.interactions.len()
    );
    Ok(())
}
