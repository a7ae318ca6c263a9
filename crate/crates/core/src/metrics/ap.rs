use serde::{Deserialize, Serialize};

use super::ScoredArticle;
use crate::{Error, Result};

/// Non-interpolated average precision of a ranking.
///
/// Pairs are sorted by descending score; each distinct score is one
/// threshold, and tied pairs enter together. The result is
/// `sum_n (R_n - R_{n-1}) P_n` over those thresholds, `None` without
/// positives. Scores must not be NaN.
pub fn average_precision(pairs: &mut [(f64, bool)]) -> Option<f64> {
    let positives = pairs.iter().filter(|p| p.1).count();
    if positives == 0 {
        return None;
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let score = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == score {
            if pairs[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let recall = tp as f64 / positives as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Some(ap)
}

/// How topics without gold positives enter the macro average.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MacroApPolicy {
    #[default]
    ExcludeEmpty,
    IncludeAsZero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApSummary {
    pub per_topic: Vec<Option<f64>>,
    /// All (article, topic) pairs ranked together.
    pub micro: f64,
    pub macro_: f64,
}

/// Per-topic, micro and macro average precision. Articles without
/// probabilities score 0 on every topic.
pub fn average_precision_summary(
    labels: usize,
    scored: &[ScoredArticle],
    policy: MacroApPolicy,
) -> Result<ApSummary> {
    let mut per_label: Vec<Vec<(f64, bool)>> = vec![Vec::with_capacity(scored.len()); labels];
    for a in scored {
        if let Some(p) = &a.probs {
            if p.len() != labels {
                return Err(Error::LabelCount {
                    expected: labels,
                    actual: p.len(),
                });
            }
        }
        for (k, pairs) in per_label.iter_mut().enumerate() {
            let score = a.probs.as_ref().map_or(0.0, |p| p[k]);
            pairs.push((score, a.gold.contains(&k)));
        }
    }
    let mut all: Vec<(f64, bool)> = per_label.iter().flatten().copied().collect();
    let micro = average_precision(&mut all).ok_or(Error::NoPositives)?;

    let per_topic: Vec<Option<f64>> = per_label.iter_mut().map(|p| average_precision(p)).collect();
    for (k, ap) in per_topic.iter().enumerate() {
        if ap.is_none() && policy == MacroApPolicy::ExcludeEmpty {
            log::warn!("topic {k} has no positives; excluded from macro average precision");
        }
    }
    let included: Vec<f64> = match policy {
        MacroApPolicy::ExcludeEmpty => per_topic.iter().flatten().copied().collect(),
        MacroApPolicy::IncludeAsZero => per_topic.iter().map(|ap| ap.unwrap_or(0.0)).collect(),
    };
    let macro_ = included.iter().sum::<f64>() / included.len().max(1) as f64;
    Ok(ApSummary {
        per_topic,
        micro,
        macro_,
    })
}
