use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{what}, line {line}: {message}")]
    Parse {
        what: &'static str,
        line: u64,
        message: String,
    },

    #[error("duplicate page ({wiki}, {page_id})")]
    DuplicatePage { wiki: String, page_id: u64 },

    #[error("duplicate topic id {0:?}")]
    DuplicateTopic(String),

    #[error("invalid topic id {0:?}: expected lowercase hyphenated identifier")]
    InvalidTopicId(String),

    #[error("taxonomy has {0} topics, expected 64")]
    TaxonomySize(usize),

    #[error("unknown topic id {0:?}")]
    UnknownTopic(String),

    #[error("invalid split ratios {train}/{validation}/{test}: must be non-negative and sum to 1")]
    InvalidRatios {
        train: f64,
        validation: f64,
        test: f64,
    },

    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),

    #[error("vocabulary is empty after pruning at min_count {0}")]
    EmptyVocabulary(u32),

    #[error("bag has no in-vocabulary links")]
    NoUsableLinks,

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("evaluation set is empty")]
    EmptyEvaluation,

    #[error("prediction for ({wiki}, {page_id}) has no gold record")]
    MissingGold { wiki: String, page_id: u64 },

    #[error("gold record ({wiki}, {page_id}) has no prediction")]
    MissingPrediction { wiki: String, page_id: u64 },

    #[error("no positive labels in any ranking")]
    NoPositives,

    #[error("label count mismatch: expected {expected}, got {actual}")]
    LabelCount { expected: usize, actual: usize },

    #[error("model file: {0}")]
    Format(String),
}
