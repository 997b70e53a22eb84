//! Trains the matrix-factorization baseline and prints its objective trace
//! and a top-5 list.
//!
//!     cargo run --release --example nmf_baseline

use ofair::baseline::{self, NmfConfig};
use ofair::catalog::{Split, UserIdx};
use ofair::ingest::{synth_dataset, SynthSpec};

fn main() -> ofair::Result<()> {
    let data = synth_dataset(&SynthSpec::default())?;
    for implicit_zeros in [false, true] {
        let config = NmfConfig {
            rank: 10,
            epochs: 50,
            seed: 1,
            implicit_zeros,
        };
        let model = baseline::train(&data.interactions, data.catalog.len(), config)?;
        let trace = model.objective_trace();
        let train = data
            .interactions
            .ratings()
            .iter()
            .filter(|r| r.split == Split::Train);
        let test = data
            .interactions
            .ratings()
            .iter()
            .filter(|r| r.split == Split::Test);
        println!(
            "implicit_zeros={implicit_zeros}: objective {:.1} -> {:.1}, train rmse {:.3}, test rmse {:.3}",
            trace[0],
            trace[trace.len() - 1],
            model.rmse(train.map(|r| (r.user, r.item, r.value))),
            model.rmse(test.map(|r| (r.user, r.item, r.value))),
        );
        let seen = &data.interactions.items_by_user(Split::Train)[0];
        let top = baseline::top_k(&model, UserIdx(0), seen, 5)?;
        for c in top.entries() {
            println!("    {} {:.3}", data.catalog.item(c.item).id(), c.score);
        }
    }
    Ok(())
}
