//! Raw wiki tables to per-article bags of entity IDs.
//!
//! Input tables are tab-separated, UTF-8, LF-terminated, without header:
//!
//! | file           | columns                                           |
//! |----------------|---------------------------------------------------|
//! | `page.tsv`     | wiki, page_id, title, namespace, is_redirect(0/1) |
//! | `redirect.tsv` | wiki, source_page_id, target_title                |
//! | `pagelink.tsv` | wiki, source_page_id, target_title                |
//! | `sitelink.tsv` | wiki, page_id, qid                                |
//!
//! Page, redirect and sitelink tables are held in memory. The pagelink table
//! is consumed one row at a time and never buffered.

mod bags;
mod histogram;
mod redirect;
mod tables;

use std::io::BufRead;

use serde::{Deserialize, Serialize};

pub use bags::{build_link_bags, BuildStats, LinkBagBuilder};
pub use histogram::{link_histogram, LinkHistogram, DEFAULT_HISTOGRAM_CAP};
pub use redirect::{RedirectMap, Resolution, DEFAULT_MAX_REDIRECT_DEPTH};
pub use tables::{
    parse_link_pairs, parse_tables, LinkPair, LinkTarget, ParseStats, QidMap, Tables, WikiTables,
};

use crate::{Qid, Result};

/// One row of the page table, after namespace filtering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PageRecord {
    pub wiki: String,
    pub page_id: u64,
    pub title: String,
    pub is_redirect: bool,
}

/// An article and the deduplicated entity IDs of the articles it links to.
///
/// `links` never contains `qid` and is kept sorted by textual form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkBag {
    pub wiki: String,
    pub page_id: u64,
    pub qid: Option<Qid>,
    pub links: Vec<Qid>,
}

/// Output of a full ingestion run.
#[derive(Debug)]
pub struct Ingested {
    pub bags: Vec<LinkBag>,
    pub parse: ParseStats,
    pub build: BuildStats,
}

/// Parses all four tables and builds the link bags in one call.
pub fn ingest<P, R, L, S>(page: P, redirect: R, pagelink: L, sitelink: S) -> Result<Ingested>
where
    P: BufRead,
    R: BufRead,
    L: BufRead,
    S: BufRead,
{
    let (tables, mut parse) = parse_tables(page, redirect, sitelink)?;
    let mut builder = LinkBagBuilder::new(&tables);
    parse_link_pairs(pagelink, &mut parse, |pair| builder.add(&pair))?;
    let (bags, build) = builder.finish();
    Ok(Ingested { bags, parse, build })
}

/// Writes bags as JSON lines.
pub fn write_link_bags<W: std::io::Write>(mut out: W, bags: &[LinkBag]) -> Result<()> {
    for bag in bags {
        serde_json::to_writer(&mut out, bag)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads bags written by [`write_link_bags`].
pub fn read_link_bags<R: BufRead>(reader: R) -> Result<Vec<LinkBag>> {
    let mut bags = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        bags.push(serde_json::from_str(&line)?);
    }
    Ok(bags)
}
