use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::labeling::ArticleKey;
use crate::{Error, Result};

/// Binary confusion counts of one topic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl BinaryCounts {
    /// Gold positives.
    pub fn n(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn add(&mut self, other: &BinaryCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.tn += other.tn;
        self.fn_ += other.fn_;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Prf {
            precision,
            recall,
            f1,
        }
    }

    pub fn from_counts(counts: &BinaryCounts) -> Self {
        Self::new(counts.precision(), counts.recall())
    }
}

/// Model output for one article, aligned with its gold topics.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredArticle {
    /// `None` when the article had no usable links.
    pub probs: Option<Vec<f64>>,
    pub gold: Vec<usize>,
}

/// Per-topic confusion counts over a set of articles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub topics: Vec<BinaryCounts>,
    pub articles: u64,
}

impl ConfusionCounts {
    pub fn new(labels: usize) -> Self {
        ConfusionCounts {
            topics: vec![BinaryCounts::default(); labels],
            articles: 0,
        }
    }

    pub fn from_topics(topics: Vec<BinaryCounts>) -> Self {
        let articles = topics.first().map_or(0, BinaryCounts::total);
        ConfusionCounts { topics, articles }
    }

    /// Adds one article. A topic is predicted when its probability is
    /// strictly above `threshold`; an article without probabilities
    /// predicts nothing.
    pub fn record(&mut self, probs: Option<&[f64]>, gold: &[usize], threshold: f64) -> Result<()> {
        let labels = self.topics.len();
        if let Some(p) = probs {
            if p.len() != labels {
                return Err(Error::LabelCount {
                    expected: labels,
                    actual: p.len(),
                });
            }
        }
        if let Some(&k) = gold.iter().find(|&&k| k >= labels) {
            return Err(Error::LabelCount {
                expected: labels,
                actual: k + 1,
            });
        }
        for (k, counts) in self.topics.iter_mut().enumerate() {
            let predicted = probs.is_some_and(|p| p[k] > threshold);
            match (predicted, gold.contains(&k)) {
                (true, true) => counts.tp += 1,
                (true, false) => counts.fp += 1,
                (false, true) => counts.fn_ += 1,
                (false, false) => counts.tn += 1,
            }
        }
        self.articles += 1;
        Ok(())
    }

    pub fn from_scored(labels: usize, scored: &[ScoredArticle], threshold: f64) -> Result<Self> {
        let mut counts = Self::new(labels);
        for a in scored {
            counts.record(a.probs.as_deref(), &a.gold, threshold)?;
        }
        Ok(counts)
    }

    pub fn merge(&mut self, other: &ConfusionCounts) -> Result<()> {
        if self.topics.len() != other.topics.len() {
            return Err(Error::LabelCount {
                expected: self.topics.len(),
                actual: other.topics.len(),
            });
        }
        for (a, b) in self.topics.iter_mut().zip(&other.topics) {
            a.add(b);
        }
        self.articles += other.articles;
        Ok(())
    }

    /// Counts summed over topics.
    pub fn pooled(&self) -> BinaryCounts {
        let mut total = BinaryCounts::default();
        for c in &self.topics {
            total.add(c);
        }
        total
    }
}

/// Pairs predictions with gold records by article. Every prediction needs a
/// gold record and every gold record a prediction.
pub fn align_predictions(
    predictions: Vec<(ArticleKey, Option<Vec<f64>>)>,
    gold: &HashMap<ArticleKey, Vec<usize>>,
) -> Result<Vec<ScoredArticle>> {
    let mut seen = HashSet::with_capacity(predictions.len());
    let mut out = Vec::with_capacity(predictions.len());
    for (key, probs) in predictions {
        let Some(topics) = gold.get(&key) else {
            return Err(Error::MissingGold {
                wiki: key.wiki,
                page_id: key.page_id,
            });
        };
        out.push(ScoredArticle {
            probs,
            gold: topics.clone(),
        });
        seen.insert(key);
    }
    if let Some(missing) = gold.keys().find(|k| !seen.contains(*k)) {
        return Err(Error::MissingPrediction {
            wiki: missing.wiki.clone(),
            page_id: missing.page_id,
        });
    }
    Ok(out)
}

pub fn confusion_counts(
    predictions: Vec<(ArticleKey, Option<Vec<f64>>)>,
    gold: &HashMap<ArticleKey, Vec<usize>>,
    labels: usize,
    threshold: f64,
) -> Result<ConfusionCounts> {
    ConfusionCounts::from_scored(labels, &align_predictions(predictions, gold)?, threshold)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMetrics {
    pub per_topic: Vec<Prf>,
    /// Metrics of the pooled counts.
    pub micro: Prf,
    /// Unweighted mean of the per-topic metrics.
    pub macro_: Prf,
}

pub fn precision_recall_f1(counts: &ConfusionCounts) -> ThresholdMetrics {
    let per_topic: Vec<Prf> = counts.topics.iter().map(Prf::from_counts).collect();
    let micro = Prf::from_counts(&counts.pooled());
    let k = per_topic.len().max(1) as f64;
    let macro_ = Prf {
        precision: per_topic.iter().map(|m| m.precision).sum::<f64>() / k,
        recall: per_topic.iter().map(|m| m.recall).sum::<f64>() / k,
        f1: per_topic.iter().map(|m| m.f1).sum::<f64>() / k,
    };
    ThresholdMetrics {
        per_topic,
        micro,
        macro_,
    }
}

/// Mean of the per-topic metrics weighted by gold positives.
pub fn weighted_prf(counts: &ConfusionCounts) -> Prf {
    let support: u64 = counts.topics.iter().map(BinaryCounts::n).sum();
    if support == 0 {
        return Prf::default();
    }
    let mut acc = Prf::default();
    for c in &counts.topics {
        let m = Prf::from_counts(c);
        let w = c.n() as f64 / support as f64;
        acc.precision += w * m.precision;
        acc.recall += w * m.recall;
        acc.f1 += w * m.f1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probs(labels: usize, on: &[usize]) -> Vec<f64> {
        (0..labels)
            .map(|k| if on.contains(&k) { 0.9 } else { 0.1 })
            .collect()
    }

    #[test]
    fn correct_prediction() {
        let mut c = ConfusionCounts::new(64);
        c.record(Some(&probs(64, &[3])), &[3], 0.5).unwrap();
        assert_eq!(
            c.topics[3],
            BinaryCounts {
                tp: 1,
                fp: 0,
                tn: 0,
                fn_: 0
            }
        );
        assert!(c.topics.iter().enumerate().all(|(k, b)| k == 3
            || *b
                == BinaryCounts {
                    tn: 1,
                    ..Default::default()
                }));
    }

    #[test]
    fn wrong_prediction() {
        let mut c = ConfusionCounts::new(64);
        c.record(Some(&probs(64, &[1])), &[0], 0.5).unwrap();
        assert_eq!(c.topics[0].fn_, 1);
        assert_eq!(c.topics[1].fp, 1);
        assert_eq!(c.topics[2].tn, 1);
    }

    #[test]
    fn empty_prediction_is_all_negative() {
        let mut c = ConfusionCounts::new(4);
        c.record(None, &[0, 1], 0.5).unwrap();
        assert_eq!(
            (c.topics[0].fn_, c.topics[1].fn_, c.topics[2].tn),
            (1, 1, 1)
        );
        assert!(c.topics.iter().all(|b| b.total() == 1));
    }

    #[test]
    fn threshold_is_strict() {
        let mut c = ConfusionCounts::new(1);
        c.record(Some(&[0.5]), &[0], 0.5).unwrap();
        assert_eq!(c.topics[0].fn_, 1);
    }

    #[test]
    fn shape_errors() {
        let mut c = ConfusionCounts::new(3);
        assert!(c.record(Some(&[0.1, 0.2]), &[], 0.5).is_err());
        assert!(c.record(None, &[3], 0.5).is_err());
        assert!(c.merge(&ConfusionCounts::new(2)).is_err());
    }

    #[test]
    fn published_rows() {
        // europe and sports rows: TP, FP, FN -> P, R, F1 at 3 decimals.
        let europe = Prf::from_counts(&BinaryCounts {
            tp: 681_220,
            fp: 90_139,
            tn: 1_544_254,
            fn_: 102_087,
        });
        assert_eq!(
            format!(
                "{:.3} {:.3} {:.3}",
                europe.precision, europe.recall, europe.f1
            ),
            "0.883 0.870 0.876"
        );
        let sports = Prf::from_counts(&BinaryCounts {
            tp: 315_905,
            fp: 10_497,
            tn: 2_072_429,
            fn_: 18_869,
        });
        assert_eq!(
            format!(
                "{:.3} {:.3} {:.3}",
                sports.precision, sports.recall, sports.f1
            ),
            "0.968 0.944 0.956"
        );
    }

    #[test]
    fn degenerate_denominators() {
        let m = Prf::from_counts(&BinaryCounts {
            tp: 0,
            fp: 0,
            tn: 5,
            fn_: 2,
        });
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
        let m = Prf::from_counts(&BinaryCounts::default());
        assert_eq!(m, Prf::default());
    }

    #[test]
    fn micro_and_macro() {
        let counts = ConfusionCounts::from_topics(vec![
            BinaryCounts {
                tp: 3,
                fp: 1,
                tn: 5,
                fn_: 1,
            },
            BinaryCounts {
                tp: 0,
                fp: 2,
                tn: 7,
                fn_: 1,
            },
        ]);
        let m = precision_recall_f1(&counts);
        assert_eq!(m.micro.precision, 3.0 / 6.0);
        assert_eq!(m.micro.recall, 3.0 / 5.0);
        assert_eq!(m.macro_.precision, (0.75 + 0.0) / 2.0);
        assert_eq!(m.macro_.recall, (0.75 + 0.0) / 2.0);
        assert_eq!(counts.articles, 10);
        let w = weighted_prf(&counts);
        assert!((w.recall - (4.0 * 0.75 + 1.0 * 0.0) / 5.0).abs() < 1e-15);
    }

    #[test]
    fn alignment() {
        let key = |p| ArticleKey {
            wiki: "enwiki".into(),
            page_id: p,
        };
        let gold: HashMap<_, _> = [(key(1), vec![0]), (key(2), vec![1])].into_iter().collect();
        let preds = vec![(key(1), Some(vec![0.9, 0.1])), (key(2), None)];
        let c = confusion_counts(preds, &gold, 2, 0.5).unwrap();
        assert_eq!(c.topics[0].tp, 1);
        assert_eq!(c.topics[1].fn_, 1);
        let extra = vec![(key(1), None), (key(2), None), (key(3), None)];
        assert!(matches!(
            confusion_counts(extra, &gold, 2, 0.5),
            Err(Error::MissingGold { page_id: 3, .. })
        ));
        let short = vec![(key(1), None)];
        assert!(matches!(
            confusion_counts(short, &gold, 2, 0.5),
            Err(Error::MissingPrediction { page_id: 2, .. })
        ));
    }
}
