use std::collections::HashMap;

use crate::{Error, Qid, Result};

/// Retained link entity IDs with dense indices and training-corpus counts.
///
/// Index order is descending count, ties broken by ascending textual ID.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<Qid>,
    counts: Vec<u64>,
    index: HashMap<Qid, u32>,
}

impl Vocabulary {
    /// Builds a vocabulary from entries already in index order.
    pub fn from_entries(entries: Vec<(Qid, u64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyVocabulary(0));
        }
        if entries.len() > u32::MAX as usize {
            return Err(Error::Format("vocabulary too large".into()));
        }
        let mut index = HashMap::with_capacity(entries.len());
        let mut tokens = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        for (i, (qid, count)) in entries.into_iter().enumerate() {
            if index.insert(qid, i as u32).is_some() {
                return Err(Error::Format(format!("duplicate vocabulary entry {qid}")));
            }
            tokens.push(qid);
            counts.push(count);
        }
        Ok(Vocabulary {
            tokens,
            counts,
            index,
        })
    }

    pub fn get(&self, qid: Qid) -> Option<u32> {
        self.index.get(&qid).copied()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token(&self, index: u32) -> Qid {
        self.tokens[index as usize]
    }

    pub fn count(&self, index: u32) -> u64 {
        self.counts[index as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Qid, u64)> + '_ {
        self.tokens.iter().copied().zip(self.counts.iter().copied())
    }
}

/// Counts, per entity ID, the training bags containing it and keeps those
/// seen in at least `min_count` bags.
pub fn build_vocabulary<'a, I>(bags: I, min_count: u32) -> Result<Vocabulary>
where
    I: IntoIterator<Item = &'a [Qid]>,
{
    let mut counts: HashMap<Qid, u64> = HashMap::new();
    let mut scratch = Vec::new();
    for bag in bags {
        scratch.clear();
        scratch.extend_from_slice(bag);
        scratch.sort_unstable();
        scratch.dedup();
        for &q in &scratch {
            *counts.entry(q).or_default() += 1;
        }
    }
    let mut kept: Vec<(String, Qid, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= u64::from(min_count))
        .map(|(q, c)| (q.to_string(), q, c))
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary(min_count));
    }
    kept.sort_by(|a, b| b.2.cmp(&a.2).then_with(|| a.0.cmp(&b.0)));
    Vocabulary::from_entries(kept.into_iter().map(|(_, q, c)| (q, c)).collect())
}
