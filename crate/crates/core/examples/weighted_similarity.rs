//! How per-user weights change which items look alike.
//!
//!     cargo run --example weighted_similarity

use std::collections::BTreeMap;

use ofair::catalog::{ItemCatalog, RawItem};
use ofair::profiles::CombinedWeights;
use ofair::rerank::SparseCosine;

fn item(id: &str, country: &str, sector: &str) -> RawItem {
    let mut f = BTreeMap::new();
    f.insert("country".to_string(), [country.to_string()].into());
    f.insert("sector".to_string(), [sector.to_string()].into());
    (id.to_string(), f)
}

fn main() -> ofair::Result<()> {
    let catalog = ItemCatalog::from_raw(&[
        item("a", "Kenya", "Food"),
        item("b", "Kenya", "Education"),
        item("c", "Peru", "Food"),
    ])?;
    let schema = catalog.schema();
    let dim = schema.dim();
    let country = schema.feature_index("country").unwrap();

    // plain cosine, then a user who cares about country far more than sector
    let plain = CombinedWeights::uniform("u", dim);
    let z: Vec<f64> = (0..dim)
        .map(|d| {
            if schema.feature_of(d) == country {
                10.0
            } else {
                0.1
            }
        })
        .collect();
    let skewed = CombinedWeights::from_weights("u", z)?;

    for (name, w) in [("uniform", &plain), ("country-heavy", &skewed)] {
        let cos = SparseCosine::new(w);
        let sim = |x: &str, y: &str| {
            let (a, b) = (
                catalog.item(catalog.find(x).unwrap()),
                catalog.item(catalog.find(y).unwrap()),
            );
            cos.similarity(
                a.held(),
                &cos.prepare(a.held()),
                b.held(),
                &cos.prepare(b.held()),
            )
        };
        println!(
            "{name:>14}: sim(a,b) = {:.3}  sim(a,c) = {:.3}",
            sim("a", "b"),
            sim("a", "c")
        );
    }
    Ok(())
}
