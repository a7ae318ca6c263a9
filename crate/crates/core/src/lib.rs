//! Language-agnostic topic classification of wiki articles.
//!
//! Every article is reduced to the set of entity IDs (`Q`-prefixed Wikidata
//! items) of the articles it links to. The pipeline is:
//!
//! 1. [`ingest`]: page/redirect/pagelink/sitelink tables to [`ingest::LinkBag`]s.
//! 2. [`labeling`]: project tags to multi-label topic sets, propagated across
//!    languages by entity ID, with grouped train/validation/test splits.
//! 3. [`classifier`]: averaged link embeddings with one-vs-all logistic outputs.
//! 4. [`metrics`]: per-topic confusion counts, precision/recall/F1 and
//!    average precision.

pub mod classifier;
pub mod error;
pub mod ingest;
pub mod labeling;
pub mod metrics;
pub mod qid;
pub mod synth;
mod tsv;

pub use error::{Error, Result};
pub use qid::Qid;
