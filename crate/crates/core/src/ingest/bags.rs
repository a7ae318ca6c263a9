use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::redirect::DEFAULT_MAX_REDIRECT_DEPTH;
use super::tables::{LinkPair, LinkTarget, Tables};
use super::LinkBag;
use crate::qid::sort_lexicographic;
use crate::Qid;

/// Counters from link-bag construction.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildStats {
    pub bags: u64,
    pub zero_link_bags: u64,
    pub bags_without_qid: u64,
    pub links_seen: u64,
    pub links_kept: u64,
    pub links_unknown_source: u64,
    pub links_cyclic: u64,
    pub links_dangling: u64,
    pub links_unmapped: u64,
    pub links_duplicate: u64,
    pub links_self: u64,
}

impl BuildStats {
    pub fn merge(&mut self, other: &BuildStats) {
        self.bags += other.bags;
        self.zero_link_bags += other.zero_link_bags;
        self.bags_without_qid += other.bags_without_qid;
        self.links_seen += other.links_seen;
        self.links_kept += other.links_kept;
        self.links_unknown_source += other.links_unknown_source;
        self.links_cyclic += other.links_cyclic;
        self.links_dangling += other.links_dangling;
        self.links_unmapped += other.links_unmapped;
        self.links_duplicate += other.links_duplicate;
        self.links_self += other.links_self;
    }

    /// Fraction of emitted bags with no surviving links.
    pub fn zero_link_fraction(&self) -> f64 {
        if self.bags == 0 {
            0.0
        } else {
            self.zero_link_bags as f64 / self.bags as f64
        }
    }
}

/// Accumulates resolved link targets per source article.
///
/// Pairs may arrive in any order; each one is resolved to an entity ID as it
/// arrives so only surviving targets are retained.
pub struct LinkBagBuilder<'t> {
    tables: &'t Tables,
    max_depth: usize,
    pending: HashMap<String, HashMap<u64, Vec<Qid>>>,
    stats: BuildStats,
}

impl<'t> LinkBagBuilder<'t> {
    pub fn new(tables: &'t Tables) -> Self {
        Self::with_max_depth(tables, DEFAULT_MAX_REDIRECT_DEPTH)
    }

    pub fn with_max_depth(tables: &'t Tables, max_depth: usize) -> Self {
        LinkBagBuilder {
            tables,
            max_depth,
            pending: HashMap::new(),
            stats: BuildStats::default(),
        }
    }

    pub fn add(&mut self, pair: &LinkPair<'_>) {
        self.stats.links_seen += 1;
        let Some(wt) = self.tables.wiki(pair.wiki) else {
            self.stats.links_unknown_source += 1;
            return;
        };
        if !wt.is_article_page(pair.source_page_id) {
            self.stats.links_unknown_source += 1;
            return;
        }
        let qid = match wt.link_target(pair.target_title, self.max_depth) {
            LinkTarget::Qid(q) => q,
            LinkTarget::Cyclic => {
                self.stats.links_cyclic += 1;
                return;
            }
            LinkTarget::Dangling => {
                self.stats.links_dangling += 1;
                return;
            }
            LinkTarget::Unmapped => {
                self.stats.links_unmapped += 1;
                return;
            }
        };
        let per_wiki = match self.pending.get_mut(pair.wiki) {
            Some(m) => m,
            None => self.pending.entry(pair.wiki.to_owned()).or_default(),
        };
        per_wiki.entry(pair.source_page_id).or_default().push(qid);
    }

    /// Emits one bag per non-redirect article, ordered by wiki then page ID,
    /// including articles with no surviving links.
    pub fn finish(mut self) -> (Vec<LinkBag>, BuildStats) {
        let mut bags = Vec::new();
        for (wiki, wt) in self.tables.wikis() {
            let mut pending = self.pending.remove(wiki).unwrap_or_default();
            for page_id in wt.article_ids() {
                let qid = wt.qids.get(page_id);
                let mut links = pending.remove(&page_id).unwrap_or_default();
                let before = links.len();
                links.sort_unstable();
                links.dedup();
                self.stats.links_duplicate += (before - links.len()) as u64;
                if let Some(own) = qid {
                    let before = links.len();
                    links.retain(|&q| q != own);
                    self.stats.links_self += (before - links.len()) as u64;
                }
                sort_lexicographic(&mut links);

                self.stats.bags += 1;
                self.stats.links_kept += links.len() as u64;
                if links.is_empty() {
                    self.stats.zero_link_bags += 1;
                }
                if qid.is_none() {
                    self.stats.bags_without_qid += 1;
                }
                bags.push(LinkBag {
                    wiki: wiki.to_owned(),
                    page_id,
                    qid,
                    links,
                });
            }
        }
        (bags, self.stats)
    }
}

/// Builds link bags from an in-memory sequence of link pairs.
pub fn build_link_bags<'a, I>(tables: &Tables, pairs: I) -> (Vec<LinkBag>, BuildStats)
where
    I: IntoIterator<Item = LinkPair<'a>>,
{
    let mut builder = LinkBagBuilder::new(tables);
    for pair in pairs {
        builder.add(&pair);
    }
    builder.finish()
}
