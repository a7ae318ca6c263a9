use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::taxonomy::TopicTaxonomy;
use crate::ingest::{LinkBag, Tables};
use crate::tsv::for_each_row;
use crate::{Error, Qid, Result};

/// Canonical form of a project name: trimmed, lowercase, underscores as
/// spaces, runs of whitespace collapsed, and a leading "wikiproject "
/// removed.
pub fn normalize_project(name: &str) -> String {
    let lowered = name.replace('_', " ").to_lowercase();
    let collapsed = lowered.split_whitespace().collect::<Vec<_>>().join(" ");
    match collapsed.strip_prefix("wikiproject ") {
        Some(rest) if !rest.is_empty() => rest.to_owned(),
        _ => collapsed,
    }
}

/// Project name to the topics it maps to.
#[derive(Clone, Debug, Default)]
pub struct ProjectTopicMap {
    map: HashMap<String, Vec<usize>>,
}

impl ProjectTopicMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, project: &str, topic: usize) {
        let topics = self.map.entry(normalize_project(project)).or_default();
        if let Err(pos) = topics.binary_search(&topic) {
            topics.insert(pos, topic);
        }
    }

    /// Reads `project\ttopic_id` rows. Unknown topic ids are fatal.
    pub fn load<R: BufRead>(reader: R, taxonomy: &TopicTaxonomy) -> Result<Self> {
        let mut map = Self::new();
        for_each_row(reader, |line, fields| {
            let [project, topic] = fields else {
                return Err(Error::Parse {
                    what: "project map",
                    line,
                    message: format!("expected 2 fields, got {}", fields.len()),
                });
            };
            let index = taxonomy
                .index_of(topic.trim())
                .ok_or_else(|| Error::UnknownTopic((*topic).to_owned()))?;
            map.insert(project, index);
            Ok(())
        })?;
        Ok(map)
    }

    pub fn topics(&self, project: &str) -> Option<&[usize]> {
        self.map.get(&normalize_project(project)).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Gold topics of one entity. `topics` is sorted, unique and non-empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopicSet {
    pub qid: Qid,
    pub topics: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicCount {
    pub topic: String,
    pub count: u64,
}

/// Corpus statistics of label derivation and propagation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelingReport {
    pub assessment_rows: u64,
    pub malformed_rows: u64,
    pub other_wiki_rows: u64,
    pub unmapped_page_rows: u64,
    pub unmapped_project_rows: u64,
    pub labeled_source_items: u64,
    pub labels_total: u64,
    pub labels_per_item_mean: f64,
    pub propagated_article_count: u64,
    pub qids_without_sitelinks: u64,
    pub topic_counts: Vec<TopicCount>,
    pub unmatched_projects: BTreeMap<String, u64>,
}

/// Derives per-entity topic sets from `wiki\tpage_id\tproject` rows.
///
/// Only rows from `label_wikis` are used. Each page is mapped to its
/// entity ID with `qid_of`; its topics are the union over all its mapped
/// projects. Entities left with no topics are omitted. Output is ordered by
/// entity ID.
pub fn derive_topic_sets<R, F>(
    assessments: R,
    projects: &ProjectTopicMap,
    taxonomy: &TopicTaxonomy,
    label_wikis: &[String],
    qid_of: F,
) -> Result<(Vec<TopicSet>, LabelingReport)>
where
    R: BufRead,
    F: Fn(&str, u64) -> Option<Qid>,
{
    let mut report = LabelingReport::default();
    let mut labels: BTreeMap<Qid, BTreeSet<usize>> = BTreeMap::new();

    for_each_row(assessments, |_, fields| {
        report.assessment_rows += 1;
        let [wiki, page_id, project] = fields else {
            report.malformed_rows += 1;
            return Ok(());
        };
        let Ok(page_id) = page_id.parse::<u64>() else {
            report.malformed_rows += 1;
            return Ok(());
        };
        if !label_wikis.iter().any(|w| w == wiki) {
            report.other_wiki_rows += 1;
            return Ok(());
        }
        let Some(topics) = projects.topics(project) else {
            report.unmapped_project_rows += 1;
            *report
                .unmatched_projects
                .entry(normalize_project(project))
                .or_default() += 1;
            return Ok(());
        };
        let Some(qid) = qid_of(wiki, page_id) else {
            report.unmapped_page_rows += 1;
            return Ok(());
        };
        if !topics.is_empty() {
            labels
                .entry(qid)
                .or_default()
                .extend(topics.iter().copied());
        }
        Ok(())
    })?;

    let sets: Vec<TopicSet> = labels
        .into_iter()
        .map(|(qid, topics)| TopicSet {
            qid,
            topics: topics.into_iter().collect(),
        })
        .collect();

    let mut counts = vec![0u64; taxonomy.len()];
    for set in &sets {
        for &t in &set.topics {
            counts[t] += 1;
        }
    }
    report.labeled_source_items = sets.len() as u64;
    report.labels_total = counts.iter().sum();
    report.labels_per_item_mean = if sets.is_empty() {
        0.0
    } else {
        report.labels_total as f64 / sets.len() as f64
    };
    report.topic_counts = counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| TopicCount {
            topic: taxonomy.id(i).to_owned(),
            count,
        })
        .collect();
    Ok((sets, report))
}

/// Identifies one article across all ingested wikis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArticleKey {
    pub wiki: String,
    pub page_id: u64,
}

/// Entity ID to every article about it.
#[derive(Clone, Debug, Default)]
pub struct SitelinkIndex {
    articles: HashMap<Qid, Vec<ArticleKey>>,
}

impl SitelinkIndex {
    pub fn insert(&mut self, qid: Qid, wiki: &str, page_id: u64) {
        let keys = self.articles.entry(qid).or_default();
        let key = ArticleKey {
            wiki: wiki.to_owned(),
            page_id,
        };
        if let Err(pos) = keys.binary_search(&key) {
            keys.insert(pos, key);
        }
    }

    /// Index of the articles that produced link bags.
    pub fn from_bags<'a, I: IntoIterator<Item = &'a LinkBag>>(bags: I) -> Self {
        let mut index = Self::default();
        for bag in bags {
            if let Some(qid) = bag.qid {
                index.insert(qid, &bag.wiki, bag.page_id);
            }
        }
        index
    }

    /// Index of every non-redirect article in the tables.
    pub fn from_tables(tables: &Tables) -> Self {
        let mut index = Self::default();
        for (wiki, wt) in tables.wikis() {
            for page_id in wt.article_ids() {
                if let Some(qid) = wt.qids.get(page_id) {
                    index.insert(qid, wiki, page_id);
                }
            }
        }
        index
    }

    pub fn articles(&self, qid: Qid) -> &[ArticleKey] {
        self.articles.get(&qid).map_or(&[], Vec::as_slice)
    }
}

/// One language version of a labeled entity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledArticle {
    pub key: ArticleKey,
    pub qid: Qid,
    pub topics: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PropagationStats {
    pub propagated_articles: u64,
    pub qids_without_sitelinks: u64,
}

impl LabelingReport {
    pub fn record_propagation(&mut self, stats: &PropagationStats) {
        self.propagated_article_count = stats.propagated_articles;
        self.qids_without_sitelinks = stats.qids_without_sitelinks;
    }
}

/// Emits one labeled article per wiki that has an article for each
/// entity.
pub fn propagate_labels(
    sets: &[TopicSet],
    index: &SitelinkIndex,
) -> (Vec<LabeledArticle>, PropagationStats) {
    let mut out = Vec::new();
    let mut stats = PropagationStats::default();
    for set in sets {
        let keys = index.articles(set.qid);
        if keys.is_empty() {
            stats.qids_without_sitelinks += 1;
        }
        for key in keys {
            out.push(LabeledArticle {
                key: key.clone(),
                qid: set.qid,
                topics: set.topics.clone(),
            });
        }
    }
    stats.propagated_articles = out.len() as u64;
    (out, stats)
}

#[derive(Serialize, Deserialize)]
struct LabelRecord {
    qid: Qid,
    topics: Vec<String>,
}

/// Writes `{"qid": .., "topics": [..]}` lines with topic ids sorted.
pub fn write_labels<W: Write>(
    mut out: W,
    sets: &[TopicSet],
    taxonomy: &TopicTaxonomy,
) -> Result<()> {
    for set in sets {
        let mut topics: Vec<String> = set
            .topics
            .iter()
            .map(|&t| taxonomy.id(t).to_owned())
            .collect();
        topics.sort();
        serde_json::to_writer(
            &mut out,
            &LabelRecord {
                qid: set.qid,
                topics,
            },
        )?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_labels<R: BufRead>(reader: R, taxonomy: &TopicTaxonomy) -> Result<Vec<TopicSet>> {
    let mut sets = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let record: LabelRecord = serde_json::from_str(&line)?;
        let mut topics = record
            .topics
            .iter()
            .map(|t| {
                taxonomy
                    .index_of(t)
                    .ok_or_else(|| Error::UnknownTopic(t.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        topics.sort_unstable();
        topics.dedup();
        sets.push(TopicSet {
            qid: record.qid,
            topics,
        });
    }
    Ok(sets)
}
