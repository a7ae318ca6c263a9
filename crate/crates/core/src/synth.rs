//! Planted-topic synthetic corpora for tests and demos.
//!
//! Each topic owns a block of signature entities. An article draws most of
//! its links from the signatures of its topics and the rest from a shared
//! noise pool.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::labeling::STANDARD_TOPICS;
use crate::{Qid, Result};

const SIGNATURE_BASE: u64 = 10_000_000;
const NOISE_BASE: u64 = 20_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct PlantedConfig {
    pub topics: usize,
    pub signature_links: usize,
    pub articles_per_topic: usize,
    pub min_links: usize,
    pub max_links: usize,
    /// Probability that a link comes from the article's own signatures.
    pub signal: f64,
    pub noise_pool: usize,
    /// Probability that an article carries a second topic.
    pub second_topic: f64,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            topics: 64,
            signature_links: 50,
            articles_per_topic: 2000,
            min_links: 10,
            max_links: 30,
            signal: 0.8,
            noise_pool: 5000,
            second_topic: 0.2,
            seed: 20_210_101,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlantedArticle {
    pub qid: Qid,
    /// Sorted and unique.
    pub links: Vec<Qid>,
    /// Sorted and unique.
    pub topics: Vec<usize>,
}

pub fn signature_qid(topic: usize, i: usize, cfg: &PlantedConfig) -> Qid {
    Qid(SIGNATURE_BASE + (topic * cfg.signature_links + i) as u64)
}

pub fn noise_qid(i: usize) -> Qid {
    Qid(NOISE_BASE + i as u64)
}

/// `articles_per_topic` articles per primary topic, entity IDs `Q1..`.
pub fn planted_corpus(cfg: &PlantedConfig) -> Vec<PlantedArticle> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.topics * cfg.articles_per_topic);
    for i in 0..cfg.topics * cfg.articles_per_topic {
        let primary = i / cfg.articles_per_topic;
        let mut topics = vec![primary];
        if cfg.topics > 1 && rng.gen_bool(cfg.second_topic) {
            let other = (primary + rng.gen_range(1..cfg.topics)) % cfg.topics;
            topics.push(other);
        }
        topics.sort_unstable();

        let count = rng.gen_range(cfg.min_links..=cfg.max_links);
        let mut links = Vec::with_capacity(count);
        for _ in 0..count {
            if rng.gen_bool(cfg.signal) {
                let topic = *topics.choose(&mut rng).expect("non-empty");
                links.push(signature_qid(
                    topic,
                    rng.gen_range(0..cfg.signature_links),
                    cfg,
                ));
            } else {
                links.push(noise_qid(rng.gen_range(0..cfg.noise_pool)));
            }
        }
        links.sort_unstable();
        links.dedup();
        out.push(PlantedArticle {
            qid: Qid(i as u64 + 1),
            links,
            topics,
        });
    }
    out
}

/// Writes a multi-wiki table set for a planted corpus into `dir`:
/// `page.tsv`, `redirect.tsv`, `pagelink.tsv`, `sitelink.tsv`,
/// `assessments.tsv`, `project_map.tsv` and `taxonomy.txt`.
///
/// Every entity gets a page in every wiki. The first wiki carries all
/// project tags; other wikis hold each article with probability 1/2 and
/// drop a quarter of its links. Every tenth link goes through a redirect.
pub fn write_tables(
    articles: &[PlantedArticle],
    cfg: &PlantedConfig,
    wikis: &[&str],
    dir: &Path,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5EED);
    let create = |name: &str| -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(dir.join(name))?))
    };
    let mut page = create("page.tsv")?;
    let mut redirect = create("redirect.tsv")?;
    let mut pagelink = create("pagelink.tsv")?;
    let mut sitelink = create("sitelink.tsv")?;
    let mut assessments = create("assessments.tsv")?;

    let mut entities: Vec<Qid> = articles.iter().map(|a| a.qid).collect();
    for t in 0..cfg.topics {
        entities.extend((0..cfg.signature_links).map(|i| signature_qid(t, i, cfg)));
    }
    entities.extend((0..cfg.noise_pool).map(noise_qid));

    for (w, wiki) in wikis.iter().enumerate() {
        let lang = wiki.trim_end_matches("wiki");
        let mut page_id = 0u64;
        let mut next_id = || {
            page_id += 1;
            page_id
        };
        let mut article_ids = std::collections::HashMap::new();
        for &qid in &entities {
            let id = next_id();
            writeln!(page, "{wiki}\t{id}\t{lang} {qid}\t0\t0")?;
            writeln!(sitelink, "{wiki}\t{id}\t{qid}")?;
            article_ids.insert(qid, id);
            let alias = next_id();
            writeln!(page, "{wiki}\t{alias}\t{lang} alias {qid}\t0\t1")?;
            writeln!(redirect, "{wiki}\t{alias}\t{lang} {qid}")?;
        }
        for (i, a) in articles.iter().enumerate() {
            let id = article_ids[&a.qid];
            if w > 0 && !rng.gen_bool(0.5) {
                continue;
            }
            for (j, link) in a.links.iter().enumerate() {
                if w > 0 && rng.gen_bool(0.25) {
                    continue;
                }
                if (i + j) % 10 == 0 {
                    writeln!(pagelink, "{wiki}\t{id}\t{lang} alias {link}")?;
                } else {
                    writeln!(pagelink, "{wiki}\t{id}\t{lang} {link}")?;
                }
            }
            if w == 0 {
                for &t in &a.topics {
                    writeln!(assessments, "{wiki}\t{id}\tWikiProject {}", project_name(t))?;
                }
            }
        }
    }

    let mut project_map = create("project_map.tsv")?;
    let mut taxonomy = create("taxonomy.txt")?;
    for (t, topic) in STANDARD_TOPICS.iter().enumerate() {
        writeln!(project_map, "{}\t{topic}", project_name(t))?;
        writeln!(taxonomy, "{topic}")?;
    }
    for mut f in [
        page,
        redirect,
        pagelink,
        sitelink,
        assessments,
        project_map,
        taxonomy,
    ] {
        f.flush()?;
    }
    Ok(())
}

fn project_name(topic: usize) -> String {
    format!(
        "Synthetic {}",
        STANDARD_TOPICS[topic % STANDARD_TOPICS.len()]
    )
}
