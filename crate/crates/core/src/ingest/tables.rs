use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::redirect::{RedirectMap, Resolution};
use super::PageRecord;
use crate::tsv::for_each_row;
use crate::{Error, Qid, Result};

/// Row counters from table parsing. Counters from independent runs are
/// combined with [`ParseStats::merge`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseStats {
    pub pages: u64,
    pub redirect_pages: u64,
    pub pages_malformed: u64,
    pub pages_other_namespace: u64,
    pub pages_duplicate_title: u64,
    pub redirects: u64,
    pub redirects_malformed: u64,
    pub redirects_unknown_source: u64,
    pub sitelinks: u64,
    pub sitelinks_malformed: u64,
    pub sitelinks_conflicting: u64,
    pub links: u64,
    pub links_malformed: u64,
}

impl ParseStats {
    pub fn merge(&mut self, other: &ParseStats) {
        self.pages += other.pages;
        self.redirect_pages += other.redirect_pages;
        self.pages_malformed += other.pages_malformed;
        self.pages_other_namespace += other.pages_other_namespace;
        self.pages_duplicate_title += other.pages_duplicate_title;
        self.redirects += other.redirects;
        self.redirects_malformed += other.redirects_malformed;
        self.redirects_unknown_source += other.redirects_unknown_source;
        self.sitelinks += other.sitelinks;
        self.sitelinks_malformed += other.sitelinks_malformed;
        self.sitelinks_conflicting += other.sitelinks_conflicting;
        self.links += other.links;
        self.links_malformed += other.links_malformed;
    }
}

/// Page ID to entity ID, for one wiki.
#[derive(Clone, Debug, Default)]
pub struct QidMap {
    by_page: HashMap<u64, Qid>,
}

impl QidMap {
    pub fn get(&self, page_id: u64) -> Option<Qid> {
        self.by_page.get(&page_id).copied()
    }

    pub fn len(&self) -> usize {
        self.by_page.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_page.is_empty()
    }

    /// Inserts a mapping; returns `false` and keeps the old value if the page
    /// is already mapped to a different entity.
    pub fn insert(&mut self, page_id: u64, qid: Qid) -> bool {
        match self.by_page.entry(page_id) {
            std::collections::hash_map::Entry::Occupied(e) => *e.get() == qid,
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(qid);
                true
            }
        }
    }
}

#[derive(Clone, Debug)]
struct PageEntry {
    title: String,
    is_redirect: bool,
}

/// Namespace-0 pages, redirects and entity IDs of one wiki.
#[derive(Clone, Debug, Default)]
pub struct WikiTables {
    pages: BTreeMap<u64, PageEntry>,
    articles: HashMap<String, u64>,
    redirect_titles: HashMap<String, u64>,
    pub redirects: RedirectMap,
    pub qids: QidMap,
}

impl WikiTables {
    /// Page ID of the non-redirect article with this title.
    pub fn article_id(&self, title: &str) -> Option<u64> {
        self.articles.get(title).copied()
    }

    pub fn is_page(&self, page_id: u64) -> bool {
        self.pages.contains_key(&page_id)
    }

    pub fn is_article_page(&self, page_id: u64) -> bool {
        self.pages.get(&page_id).is_some_and(|p| !p.is_redirect)
    }

    /// Non-redirect article IDs in ascending order.
    pub fn article_ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.pages
            .iter()
            .filter(|(_, p)| !p.is_redirect)
            .map(|(&id, _)| id)
    }

    pub fn resolve_title<'a>(&'a self, title: &'a str, max_depth: usize) -> Resolution<'a> {
        self.redirects
            .resolve(title, |t| self.articles.contains_key(t), max_depth)
    }

    /// Entity ID of the article a link title points to, after redirects.
    pub fn link_target(&self, title: &str, max_depth: usize) -> LinkTarget {
        match self.resolve_title(title, max_depth) {
            Resolution::Cyclic => LinkTarget::Cyclic,
            Resolution::Dangling => LinkTarget::Dangling,
            Resolution::Canonical(t) => {
                match self.articles.get(t).and_then(|&id| self.qids.get(id)) {
                    Some(q) => LinkTarget::Qid(q),
                    None => LinkTarget::Unmapped,
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkTarget {
    Qid(Qid),
    Cyclic,
    Dangling,
    Unmapped,
}

/// In-memory page, redirect and sitelink tables for every wiki in a run.
#[derive(Clone, Debug, Default)]
pub struct Tables {
    wikis: BTreeMap<String, WikiTables>,
}

impl Tables {
    pub fn wiki(&self, wiki: &str) -> Option<&WikiTables> {
        self.wikis.get(wiki)
    }

    pub fn wikis(&self) -> impl Iterator<Item = (&str, &WikiTables)> {
        self.wikis.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// All retained page records, ordered by wiki then page ID.
    pub fn records(&self) -> impl Iterator<Item = PageRecord> + '_ {
        self.wikis.iter().flat_map(|(wiki, t)| {
            t.pages.iter().map(move |(&page_id, p)| PageRecord {
                wiki: wiki.clone(),
                page_id,
                title: p.title.clone(),
                is_redirect: p.is_redirect,
            })
        })
    }

    /// Looks up the entity ID of a page.
    pub fn qid(&self, wiki: &str, page_id: u64) -> Option<Qid> {
        self.wikis.get(wiki).and_then(|t| t.qids.get(page_id))
    }

    pub fn add_page(&mut self, record: PageRecord, stats: &mut ParseStats) -> Result<()> {
        let tables = self.wikis.entry(record.wiki.clone()).or_default();
        if tables.pages.contains_key(&record.page_id) {
            return Err(Error::DuplicatePage {
                wiki: record.wiki,
                page_id: record.page_id,
            });
        }
        let titles = if record.is_redirect {
            &mut tables.redirect_titles
        } else {
            &mut tables.articles
        };
        if titles.contains_key(&record.title) {
            stats.pages_duplicate_title += 1;
            return Ok(());
        }
        titles.insert(record.title.clone(), record.page_id);
        tables.pages.insert(
            record.page_id,
            PageEntry {
                title: record.title,
                is_redirect: record.is_redirect,
            },
        );
        if record.is_redirect {
            stats.redirect_pages += 1;
        } else {
            stats.pages += 1;
        }
        Ok(())
    }
}

fn parse_page_id(field: &str) -> Option<u64> {
    field.parse().ok().filter(|&id| id > 0)
}

fn parse_page_row(fields: &[&str], stats: &mut ParseStats) -> Option<PageRecord> {
    let [wiki, page_id, title, namespace, is_redirect] = fields else {
        stats.pages_malformed += 1;
        return None;
    };
    let (Some(page_id), Ok(namespace), redirect) = (
        parse_page_id(page_id),
        namespace.parse::<i64>(),
        *is_redirect,
    ) else {
        stats.pages_malformed += 1;
        return None;
    };
    let is_redirect = match redirect {
        "0" => false,
        "1" => true,
        _ => {
            stats.pages_malformed += 1;
            return None;
        }
    };
    if wiki.is_empty() || title.is_empty() {
        stats.pages_malformed += 1;
        return None;
    }
    if namespace != 0 {
        stats.pages_other_namespace += 1;
        return None;
    }
    Some(PageRecord {
        wiki: (*wiki).to_owned(),
        page_id,
        title: (*title).to_owned(),
        is_redirect,
    })
}

/// Reads the page, redirect and sitelink tables.
///
/// Malformed rows are counted and skipped. A repeated `(wiki, page_id)` is
/// fatal.
pub fn parse_tables<P, R, S>(page: P, redirect: R, sitelink: S) -> Result<(Tables, ParseStats)>
where
    P: BufRead,
    R: BufRead,
    S: BufRead,
{
    let mut tables = Tables::default();
    let mut stats = ParseStats::default();

    for_each_row(page, |_, fields| match parse_page_row(fields, &mut stats) {
        Some(record) => tables.add_page(record, &mut stats),
        None => Ok(()),
    })?;

    for_each_row(redirect, |_, fields| {
        let [wiki, source, target] = fields else {
            stats.redirects_malformed += 1;
            return Ok(());
        };
        let Some(source) = parse_page_id(source).filter(|_| !target.is_empty()) else {
            stats.redirects_malformed += 1;
            return Ok(());
        };
        let Some(wt) = tables.wikis.get_mut(*wiki) else {
            stats.redirects_unknown_source += 1;
            return Ok(());
        };
        match wt.pages.get(&source) {
            Some(p) if p.is_redirect => {
                wt.redirects.insert(p.title.clone(), *target);
                stats.redirects += 1;
            }
            _ => stats.redirects_unknown_source += 1,
        }
        Ok(())
    })?;

    for_each_row(sitelink, |_, fields| {
        let [wiki, page_id, qid] = fields else {
            stats.sitelinks_malformed += 1;
            return Ok(());
        };
        let (Some(page_id), Ok(qid)) = (parse_page_id(page_id), qid.parse::<Qid>()) else {
            stats.sitelinks_malformed += 1;
            return Ok(());
        };
        if wiki.is_empty() {
            stats.sitelinks_malformed += 1;
            return Ok(());
        }
        let wt = tables.wikis.entry((*wiki).to_owned()).or_default();
        if wt.qids.insert(page_id, qid) {
            stats.sitelinks += 1;
        } else {
            stats.sitelinks_conflicting += 1;
        }
        Ok(())
    })?;

    Ok((tables, stats))
}

/// One pagelink row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinkPair<'a> {
    pub wiki: &'a str,
    pub source_page_id: u64,
    pub target_title: &'a str,
}

/// Streams the pagelink table, calling `sink` for each well-formed row.
pub fn parse_link_pairs<L, F>(pagelink: L, stats: &mut ParseStats, mut sink: F) -> Result<()>
where
    L: BufRead,
    F: FnMut(LinkPair<'_>),
{
    for_each_row(pagelink, |_, fields| {
        let [wiki, source, target] = fields else {
            stats.links_malformed += 1;
            return Ok(());
        };
        match parse_page_id(source) {
            Some(source_page_id) if !wiki.is_empty() && !target.is_empty() => {
                stats.links += 1;
                sink(LinkPair {
                    wiki,
                    source_page_id,
                    target_title: target,
                });
            }
            _ => stats.links_malformed += 1,
        }
        Ok(())
    })
}
