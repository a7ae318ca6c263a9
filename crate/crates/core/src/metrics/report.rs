use std::io::Write;

use serde::{Deserialize, Serialize};

use super::ap::{average_precision_summary, MacroApPolicy};
use super::confusion::{precision_recall_f1, ConfusionCounts, ScoredArticle};
use crate::classifier::Model;
use crate::{Error, Qid, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopicRow {
    pub topic: String,
    pub n: u64,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub average_precision: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub average_precision: f64,
}

/// Per-topic table plus micro and macro aggregates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub threshold: f64,
    pub articles: u64,
    /// Articles without usable links, scored as predicting nothing.
    pub skipped: u64,
    pub counts: ConfusionCounts,
    pub topics: Vec<TopicRow>,
    pub micro: AggregateRow,
    #[serde(rename = "macro")]
    pub macro_: AggregateRow,
}

impl EvalReport {
    pub fn from_scored(
        labels: &[String],
        scored: &[ScoredArticle],
        threshold: f64,
        policy: MacroApPolicy,
    ) -> Result<Self> {
        if scored.is_empty() {
            return Err(Error::EmptyEvaluation);
        }
        let counts = ConfusionCounts::from_scored(labels.len(), scored, threshold)?;
        let metrics = precision_recall_f1(&counts);
        let ap = average_precision_summary(labels.len(), scored, policy)?;
        let topics = labels
            .iter()
            .zip(&counts.topics)
            .zip(metrics.per_topic.iter().zip(&ap.per_topic))
            .map(|((topic, c), (m, ap))| TopicRow {
                topic: topic.clone(),
                n: c.n(),
                tp: c.tp,
                fp: c.fp,
                tn: c.tn,
                fn_: c.fn_,
                precision: m.precision,
                recall: m.recall,
                f1: m.f1,
                average_precision: *ap,
            })
            .collect();
        Ok(EvalReport {
            threshold,
            articles: scored.len() as u64,
            skipped: scored.iter().filter(|a| a.probs.is_none()).count() as u64,
            topics,
            micro: AggregateRow {
                precision: metrics.micro.precision,
                recall: metrics.micro.recall,
                f1: metrics.micro.f1,
                average_precision: ap.micro,
            },
            macro_: AggregateRow {
                precision: metrics.macro_.precision,
                recall: metrics.macro_.recall,
                f1: metrics.macro_.f1,
                average_precision: ap.macro_,
            },
            counts,
        })
    }

    /// One row per topic, then `micro` (pooled counts) and `macro` rows.
    /// Metrics have 3 decimals; a topic without positives has AP `NA`.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "topic\tn\tTP\tFP\tTN\tFN\tprecision\trecall\tf1\taverage_precision"
        )?;
        for r in &self.topics {
            let ap = r
                .average_precision
                .map_or_else(|| "NA".to_owned(), |v| format!("{v:.3}"));
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{:.3}\t{:.3}\t{:.3}\t{ap}",
                r.topic, r.n, r.tp, r.fp, r.tn, r.fn_, r.precision, r.recall, r.f1
            )?;
        }
        let pooled = self.counts.pooled();
        let m = &self.micro;
        writeln!(
            out,
            "micro\t{}\t{}\t{}\t{}\t{}\t{:.3}\t{:.3}\t{:.3}\t{:.3}",
            pooled.n(),
            pooled.tp,
            pooled.fp,
            pooled.tn,
            pooled.fn_,
            m.precision,
            m.recall,
            m.f1,
            m.average_precision
        )?;
        let m = &self.macro_;
        writeln!(
            out,
            "macro\t\t\t\t\t\t{:.3}\t{:.3}\t{:.3}\t{:.3}",
            m.precision, m.recall, m.f1, m.average_precision
        )?;
        Ok(())
    }
}

/// Predicts every `(links, gold topics)` article and reports against its
/// gold topics.
pub fn evaluate<'a, I>(
    model: &Model,
    articles: I,
    threshold: f64,
    policy: MacroApPolicy,
) -> Result<EvalReport>
where
    I: IntoIterator<Item = (&'a [Qid], &'a [usize])>,
{
    let scored: Vec<ScoredArticle> = articles
        .into_iter()
        .map(|(links, gold)| ScoredArticle {
            probs: model.predict(links, threshold).probs,
            gold: gold.to_vec(),
        })
        .collect();
    EvalReport::from_scored(model.labels(), &scored, threshold, policy)
}
