//! Multi-label ground truth and grouped dataset splits.

mod split;
mod taxonomy;
mod topics;

pub use split::{
    split_dataset, stable_hash, unit_interval, Split, SplitAssignment, SplitRatios, Splitter,
};
pub use taxonomy::{TopicTaxonomy, STANDARD_TOPICS, TOPIC_COUNT};
pub use topics::{
    derive_topic_sets, normalize_project, propagate_labels, read_labels, write_labels, ArticleKey,
    LabeledArticle, LabelingReport, ProjectTopicMap, PropagationStats, SitelinkIndex, TopicCount,
    TopicSet,
};
