//! Fairness-aware re-ranking for recommender systems.
//!
//! The crate learns how much diversity each user tolerates on each item
//! feature (the entropy of their profile) and uses it, together with weights
//! marking protected feature values, to greedily re-rank a baseline
//! recommender's candidate lists. Protected items are promoted on the
//! dimensions where a user's history shows they are open to variety.
//!
//! Modules, bottom up:
//!
//! - [`catalog`]: feature schema, items, dummy encoding, protected values, interactions
//! - [`profiles`]: per-user tolerance vectors and combined weights
//! - [`baseline`]: NMF recommender and candidate lists
//! - [`rerank`]: MMR, xQuAD, FAR, PFAR, OFAiR and the two OFAiR ablations
//! - [`metrics`]: accuracy, diversity and exposure metrics, tradeoff tables
//! - [`ingest`]: feature categorization, pseudo-items, synthetic data
//! - [`experiment`]: configuration-driven end-to-end sweeps

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod catalog;
pub mod error;
pub mod experiment;
pub mod ingest;
pub mod metrics;
pub mod profiles;
pub mod rerank;

pub use error::{Error, Result};
