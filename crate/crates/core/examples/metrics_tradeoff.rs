//! List metrics for a toy list, and exposure read off a tradeoff curve at
//! fixed nDCG losses.
//!
//!     cargo run --example metrics_tradeoff

use std::collections::BTreeMap;

use ofair::catalog::{ItemCatalog, ItemIdx, ProtectedSpec, RawItem};
use ofair::metrics::{self, MetricsRow};
use ofair::rerank::Algorithm;

fn item(id: &str, sector: &str) -> RawItem {
    let mut f = BTreeMap::new();
    f.insert("sector".to_string(), [sector.to_string()].into());
    (id.to_string(), f)
}

fn main() -> ofair::Result<()> {
    let catalog = ItemCatalog::from_raw(&[
        item("a", "food"),
        item("b", "food"),
        item("c", "arts"),
        item("d", "education"),
    ])?;
    let group = ProtectedSpec::new([("sector", "education")], 1.0)?.resolve(catalog.schema())?;
    let list: Vec<ItemIdx> = ["b", "c", "d"]
        .iter()
        .map(|id| catalog.find(id).unwrap())
        .collect();
    let items: Vec<_> = list.iter().map(|&i| catalog.item(i)).collect();
    let relevant = [catalog.find("d").unwrap()];

    println!("ndcg@3       {:.3}", metrics::ndcg(&list, &relevant, 3));
    println!(
        "p/r@3        {:?}",
        metrics::precision_recall(&list, &relevant, 3)
    );
    println!("ild          {:.3}", metrics::ild(&items, catalog.schema()));
    println!(
        "list entropy {:.3}",
        metrics::list_entropy(&items, catalog.schema())?
    );
    println!(
        "exposure     {:.3}",
        metrics::exposure(&items, &group, 3).protected
    );

    let row = |lambda: f64, ndcg: f64, exposure: f64| MetricsRow {
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
    };
    let curve = [
        row(0.5, 0.080, 0.31),
        row(0.8, 0.104, 0.20),
        row(0.9, 0.108, 0.15),
        row(1.0, 0.110, 0.11),
    ];
    let report = metrics::tradeoff_table(&curve, &[0.01, 0.02, 0.03, 0.5])?;
    println!();
    for (level, exposure) in &report.levels {
        let shown = exposure.map_or("NA".to_string(), |e| format!("{e:.4}"));
        println!("exposure at {:>4.1}% nDCG loss: {shown}", level * 100.0);
    }
    Ok(())
}
