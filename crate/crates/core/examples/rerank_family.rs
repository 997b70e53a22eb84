//! One user's candidate list re-ranked by every algorithm.
//!
//!     cargo run --example rerank_family -- 0.3

use ofair::baseline::{self, NmfConfig};
use ofair::catalog::{ProtectedSpec, Split, UserIdx};
use ofair::ingest::{synth_dataset, SynthSpec};
use ofair::metrics;
use ofair::profiles::profile_users;
use ofair::rerank::{Algorithm, RerankConfig, Reranker};

fn main() -> ofair::Result<()> {
    let lambda: f64 = std::env::args()
        .nth(1)
        .map_or(0.3, |s| s.parse().expect("lambda"));
    let data = synth_dataset(&SynthSpec {
        seed: 5,
        ..SynthSpec::default()
    })?;
    let schema = data.catalog.schema();
    let group = ProtectedSpec::new(data.protected.clone(), 1.0)?.resolve(schema)?;
    let sector = schema.feature_index("sector").unwrap();

    let config = NmfConfig {
        rank: 8,
        epochs: 60,
        ..NmfConfig::default()
    };
    let model = baseline::train(&data.interactions, data.catalog.len(), config)?;
    let user = UserIdx(0);
    let seen = &data.interactions.items_by_user(Split::Train)[user.0];
    let candidates = baseline::top_k(&model, user, seen, 100)?;
    let profiles = profile_users(&data.catalog, &data.interactions);
    let profile = profiles[user.0].as_ref();
    let id = data.interactions.user_id(user);
    println!("user {id}, tau = {:?}\n", profile.unwrap().tau());

    let reranker = Reranker::new(&data.catalog, &group);
    for alg in Algorithm::ALL {
        let rc = RerankConfig::new(alg, lambda, 10)?.with_sensitive_feature(sector);
        let list = reranker.rerank(id, &candidates, profile, &rc)?;
        let items: Vec<_> = list.item_ids().map(|i| data.catalog.item(i)).collect();
        let exposure = metrics::exposure(&items, &group, 10).protected;
        let ids: Vec<&str> = items.iter().map(|i| i.id()).collect();
        println!(
            "{:<14} exposure {exposure:.1}  {}",
            alg.as_str(),
            ids.join(" ")
        );
    }
    Ok(())
}
