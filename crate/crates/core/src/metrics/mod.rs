//! Multi-label evaluation: per-topic confusion counts, precision, recall,
//! F1 and average precision, with micro and macro aggregation.
//!
//! Degenerate ratios are 0: precision when nothing was predicted, recall
//! when a topic has no positives, F1 when both are 0.

mod ap;
mod confusion;
mod report;

pub use ap::{average_precision, average_precision_summary, ApSummary, MacroApPolicy};
pub use confusion::{
    align_predictions, confusion_counts, precision_recall_f1, weighted_prf, BinaryCounts,
    ConfusionCounts, Prf, ScoredArticle, ThresholdMetrics,
};
pub use report::{evaluate, AggregateRow, EvalReport, TopicRow};
