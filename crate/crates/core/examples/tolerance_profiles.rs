//! Per-feature tolerance of a small loan portfolio, and the weights it yields.
//!
//!     cargo run --example tolerance_profiles

use std::collections::BTreeMap;

use ofair::catalog::{Item, ItemCatalog, ProtectedSpec, RawItem};
use ofair::profiles::{combine_weights, tolerance};

fn loan(id: &str, region: &str, sector: &str) -> RawItem {
    let mut f = BTreeMap::new();
    f.insert("region".to_string(), [region.to_string()].into());
    f.insert("sector".to_string(), [sector.to_string()].into());
    (id.to_string(), f)
}

fn main() -> ofair::Result<()> {
    let catalog = ItemCatalog::from_raw(&[
        loan("l1", "Africa", "Agriculture"),
        loan("l2", "Africa", "Health"),
        loan("l3", "Africa", "Clothing"),
        loan("l4", "Asia", "Education"),
        loan("l5", "Americas", "Agriculture"),
    ])?;
    let schema = catalog.schema();
    let portfolio: Vec<&Item> = ["l1", "l2", "l3"]
        .iter()
        .map(|id| catalog.item(catalog.find(id).unwrap()))
        .collect();

    let profile = tolerance("user1", &portfolio, schema)?;
    for (f, tau) in schema.features().iter().zip(profile.tau()) {
        println!("tau[{}] = {tau:.4} bits", f.name);
    }

    let group =
        ProtectedSpec::new([("sector", "Education"), ("region", "Asia")], 1.0)?.resolve(schema)?;
    let z = combine_weights(&profile, group.mask())?;
    println!("\n{:<10} {:<12} {:>10}", "feature", "value", "z");
    for (d, w) in z.as_slice().iter().enumerate() {
        let (f, v) = schema.dummy_label(d);
        println!("{f:<10} {v:<12} {w:>10.2e}");
    }
    Ok(())
}
