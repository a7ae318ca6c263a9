//! Pipeline stages. Each reads its inputs, writes its outputs atomically
//! into the output directory and records a manifest.

use std::collections::HashMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use linktopic::classifier::{
    build_vocabulary, init_model, load_model, train, write_model, TrainingExample,
};
use linktopic::ingest::{ingest, link_histogram, read_link_bags, write_link_bags, LinkBag};
use linktopic::labeling::{
    derive_topic_sets, propagate_labels, read_labels, split_dataset, write_labels, ProjectTopicMap,
    SitelinkIndex, Split, SplitAssignment, TopicTaxonomy,
};
use linktopic::metrics::evaluate;
use linktopic::Qid;
use serde::Serialize;

use crate::config::{required, PipelineConfig};
use crate::manifest::{check_upstream, require_files, write_atomic, write_json, Manifest};

pub const LINK_BAGS: &str = "linkbags.jsonl";
pub const INGEST_STATS: &str = "ingest_stats.json";
pub const LABELS: &str = "labels.jsonl";
pub const LABELING_REPORT: &str = "labeling_report.json";
pub const SPLITS: &str = "splits.tsv";
pub const MODEL: &str = "model.bin";
pub const TRAIN_REPORT: &str = "train_report.json";
pub const PREDICTIONS: &str = "predictions.tsv";
pub const REPORT_TSV: &str = "report.tsv";
pub const REPORT_JSON: &str = "report.json";
pub const HISTOGRAM: &str = "histogram.tsv";

pub struct Stage<'a> {
    pub config: &'a PipelineConfig,
    pub force: bool,
}

impl Stage<'_> {
    fn out(&self, name: &str) -> PathBuf {
        self.config.out_dir.join(name)
    }

    fn upstream(&self, stage: &str, upstream: &[&str], outputs: &[&str]) -> Result<()> {
        let paths: Vec<PathBuf> = outputs.iter().map(|n| self.out(n)).collect();
        require_files(&paths.iter().map(PathBuf::as_path).collect::<Vec<_>>())?;
        check_upstream(&self.config.out_dir, stage, upstream, self.force)
    }

    fn taxonomy(&self) -> Result<TopicTaxonomy> {
        match &self.config.taxonomy {
            Some(path) => {
                require_files(&[path])?;
                Ok(
                    TopicTaxonomy::load(open(path)?, self.config.strict_taxonomy)
                        .with_context(|| format!("loading taxonomy {}", path.display()))?,
                )
            }
            None => Ok(TopicTaxonomy::standard()),
        }
    }

    /// Records `inputs`, the upstream files `consumed` from the output
    /// directory and the stage's `outputs`.
    fn finish(
        &self,
        mut manifest: Manifest,
        inputs: &[&Path],
        consumed: &[&str],
        outputs: &[&str],
    ) -> Result<()> {
        for path in inputs {
            manifest.add_input(path)?;
        }
        for name in consumed {
            manifest.add_input(&self.out(name))?;
        }
        for name in outputs {
            manifest.add_output(&self.config.out_dir, name)?;
        }
        manifest.save(&self.config.out_dir)
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn read_bags(path: &Path) -> Result<Vec<LinkBag>> {
    read_link_bags(open(path)?).with_context(|| format!("reading {}", path.display()))
}

fn read_label_map(path: &Path, taxonomy: &TopicTaxonomy) -> Result<HashMap<Qid, Vec<usize>>> {
    let sets = read_labels(open(path)?, taxonomy)
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(sets.into_iter().map(|s| (s.qid, s.topics)).collect())
}

fn read_splits(ctx: &Stage<'_>) -> Result<SplitAssignment> {
    let path = ctx.out(SPLITS);
    SplitAssignment::read_tsv(open(&path)?, ctx.config.ratios, ctx.config.split_seed)
        .with_context(|| format!("reading {}", path.display()))
}

#[derive(Serialize)]
struct IngestSummary {
    articles: u64,
    zero_link_articles: u64,
    zero_link_fraction: f64,
    parse: linktopic::ingest::ParseStats,
    build: linktopic::ingest::BuildStats,
}

pub fn cmd_ingest(ctx: &Stage<'_>) -> Result<()> {
    let c = ctx.config;
    let page = required(&c.page, "page")?;
    let redirect = required(&c.redirect, "redirect")?;
    let pagelink = required(&c.pagelink, "pagelink")?;
    let sitelink = required(&c.sitelink, "sitelink")?;
    let inputs = [page, redirect, pagelink, sitelink];
    require_files(&inputs)?;

    let out = ingest(
        open(page)?,
        open(redirect)?,
        open(pagelink)?,
        open(sitelink)?,
    )?;
    write_atomic(&ctx.out(LINK_BAGS), |w| Ok(write_link_bags(w, &out.bags)?))?;
    let summary = IngestSummary {
        articles: out.build.bags,
        zero_link_articles: out.build.zero_link_bags,
        zero_link_fraction: out.build.zero_link_fraction(),
        parse: out.parse,
        build: out.build,
    };
    write_json(&ctx.out(INGEST_STATS), &summary)?;
    log::info!(
        "ingest: {} articles, {} links kept, zero-link fraction {:.4}",
        summary.articles,
        summary.build.links_kept,
        summary.zero_link_fraction
    );
    ctx.finish(
        Manifest::new("ingest", c.snapshot_of(&[])),
        &inputs,
        &[],
        &[LINK_BAGS, INGEST_STATS],
    )
}

pub fn cmd_labels(ctx: &Stage<'_>) -> Result<()> {
    let c = ctx.config;
    let assessments = required(&c.assessments, "assessments")?;
    let project_map = required(&c.project_map, "project_map")?;
    require_files(&[assessments, project_map])?;
    ctx.upstream("labels", &["ingest"], &[LINK_BAGS])?;
    let taxonomy = ctx.taxonomy()?;

    let bags = read_bags(&ctx.out(LINK_BAGS))?;
    let qids: HashMap<(&str, u64), Qid> = bags
        .iter()
        .filter_map(|b| b.qid.map(|q| ((b.wiki.as_str(), b.page_id), q)))
        .collect();
    let projects = ProjectTopicMap::load(open(project_map)?, &taxonomy)
        .with_context(|| format!("loading {}", project_map.display()))?;
    let (sets, mut report) = derive_topic_sets(
        open(assessments)?,
        &projects,
        &taxonomy,
        &c.label_wikis,
        |wiki, page_id| qids.get(&(wiki, page_id)).copied(),
    )
    .with_context(|| format!("reading {}", assessments.display()))?;
    let (_, propagation) = propagate_labels(&sets, &SitelinkIndex::from_bags(&bags));
    report.record_propagation(&propagation);

    write_atomic(&ctx.out(LABELS), |w| Ok(write_labels(w, &sets, &taxonomy)?))?;
    write_json(&ctx.out(LABELING_REPORT), &report)?;
    log::info!(
        "labels: {} labeled items, {:.2} labels per item, {} articles across languages",
        report.labeled_source_items,
        report.labels_per_item_mean,
        report.propagated_article_count
    );

    let mut inputs = vec![assessments, project_map];
    inputs.extend(c.taxonomy.as_deref());
    let manifest = Manifest::new("labels", c.snapshot_of(&["label_wiki", "strict_taxonomy"]));
    ctx.finish(manifest, &inputs, &[LINK_BAGS], &[LABELS, LABELING_REPORT])
}

pub fn cmd_split(ctx: &Stage<'_>) -> Result<()> {
    let c = ctx.config;
    ctx.upstream("split", &["labels"], &[LABELS])?;
    let taxonomy = ctx.taxonomy()?;
    let labels = read_label_map(&ctx.out(LABELS), &taxonomy)?;
    let split = split_dataset(labels.keys().copied(), c.ratios, c.split_seed)?;
    write_atomic(&ctx.out(SPLITS), |w| Ok(split.write_tsv(w)?))?;
    let [train, validation, test] = split.counts();
    log::info!("split: {train} train, {validation} validation, {test} test");

    let manifest = Manifest::new(
        "split",
        c.snapshot_of(&[
            "train_ratio",
            "validation_ratio",
            "test_ratio",
            "split_seed",
        ]),
    );
    let inputs: Vec<&Path> = c.taxonomy.as_deref().into_iter().collect();
    ctx.finish(manifest, &inputs, &[LABELS], &[SPLITS])
}

#[derive(Serialize)]
struct TrainSummary {
    hyperparams: linktopic::classifier::Hyperparams,
    vocabulary: usize,
    labeled_train_articles: usize,
    articles_without_usable_links: usize,
    #[serde(flatten)]
    report: linktopic::classifier::TrainReport,
}

pub fn cmd_train(ctx: &Stage<'_>) -> Result<()> {
    let c = ctx.config;
    ctx.upstream(
        "train",
        &["ingest", "labels", "split"],
        &[LINK_BAGS, LABELS, SPLITS],
    )?;
    let taxonomy = ctx.taxonomy()?;
    let bags = read_bags(&ctx.out(LINK_BAGS))?;
    let labels = read_label_map(&ctx.out(LABELS), &taxonomy)?;
    let split = read_splits(ctx)?;

    let train_bags: Vec<(&LinkBag, &[usize])> = bags
        .iter()
        .filter_map(|b| {
            let qid = b.qid?;
            let gold = labels.get(&qid)?;
            (split.get(qid) == Some(Split::Train)).then_some((b, gold.as_slice()))
        })
        .collect();
    if train_bags.is_empty() {
        bail!("no labeled articles in the train split");
    }
    let vocab = build_vocabulary(
        train_bags.iter().map(|(b, _)| b.links.as_slice()),
        c.hyper.min_count,
    )?;
    let mut model = init_model(vocab, &taxonomy, c.hyper.clone())?;
    let examples: Vec<TrainingExample> = train_bags
        .iter()
        .filter_map(|(b, gold)| TrainingExample::new(&model, &b.links, gold))
        .collect();
    let report = train(&mut model, &examples)?;
    write_atomic(&ctx.out(MODEL), |w| Ok(write_model(w, &model)?))?;
    let summary = TrainSummary {
        hyperparams: c.hyper.clone(),
        vocabulary: model.vocab().len(),
        labeled_train_articles: train_bags.len(),
        articles_without_usable_links: train_bags.len() - examples.len(),
        report,
    };
    write_json(&ctx.out(TRAIN_REPORT), &summary)?;
    log::info!(
        "train: {} examples, vocabulary {}, epoch losses {:?}",
        summary.report.examples,
        summary.vocabulary,
        summary.report.epoch_losses
    );

    let inputs: Vec<&Path> = c.taxonomy.as_deref().into_iter().collect();
    let keys = [
        "dim",
        "min_count",
        "epochs",
        "lr",
        "window",
        "seed",
        "workers",
    ];
    ctx.finish(
        Manifest::new("train", c.snapshot_of(&keys)),
        &inputs,
        &[LINK_BAGS, LABELS, SPLITS],
        &[MODEL, TRAIN_REPORT],
    )
}

fn in_scope(ctx: &Stage<'_>, bag: &LinkBag, split: &SplitAssignment) -> bool {
    let wiki_ok = ctx.config.eval_wikis.is_empty() || ctx.config.eval_wikis.contains(&bag.wiki);
    wiki_ok
        && bag
            .qid
            .is_some_and(|q| split.get(q) == Some(ctx.config.eval_split))
}

pub fn cmd_predict(ctx: &Stage<'_>) -> Result<()> {
    let c = ctx.config;
    ctx.upstream(
        "predict",
        &["ingest", "split", "train"],
        &[MODEL, LINK_BAGS, SPLITS],
    )?;
    let model = load_model(ctx.out(MODEL))
        .with_context(|| format!("loading {}", ctx.out(MODEL).display()))?;
    let bags = read_bags(&ctx.out(LINK_BAGS))?;
    let split = read_splits(ctx)?;

    let (mut articles, mut skipped, mut rows) = (0u64, 0u64, 0u64);
    write_atomic(&ctx.out(PREDICTIONS), |w| {
        writeln!(w, "wiki\tpage_id\tqid\ttopic\tprobability")?;
        for bag in bags.iter().filter(|b| in_scope(ctx, b, &split)) {
            articles += 1;
            let prediction = model.predict(&bag.links, c.hyper.threshold);
            if prediction.no_usable_links() {
                skipped += 1;
            }
            let qid = bag.qid.map(|q| q.to_string()).unwrap_or_default();
            for (k, p) in prediction.topics {
                writeln!(
                    w,
                    "{}\t{}\t{qid}\t{}\t{p:.4}",
                    bag.wiki,
                    bag.page_id,
                    model.labels()[k]
                )?;
                rows += 1;
            }
        }
        Ok(())
    })?;
    log::info!(
        "predict: {articles} {} articles, {skipped} without usable links, {rows} topic rows",
        c.eval_split
    );

    let manifest = Manifest::new(
        "predict",
        c.snapshot_of(&["threshold", "eval_split", "eval_wiki"]),
    );
    ctx.finish(manifest, &[], &[MODEL, LINK_BAGS, SPLITS], &[PREDICTIONS])
}

pub fn cmd_evaluate(ctx: &Stage<'_>) -> Result<()> {
    let c = ctx.config;
    ctx.upstream(
        "evaluate",
        &["ingest", "labels", "split", "train"],
        &[MODEL, LINK_BAGS, LABELS, SPLITS],
    )?;
    let taxonomy = ctx.taxonomy()?;
    let model = load_model(ctx.out(MODEL))
        .with_context(|| format!("loading {}", ctx.out(MODEL).display()))?;
    if model.labels() != taxonomy.ids() {
        bail!("model topics differ from the configured taxonomy");
    }
    let bags = read_bags(&ctx.out(LINK_BAGS))?;
    let labels = read_label_map(&ctx.out(LABELS), &taxonomy)?;
    let split = read_splits(ctx)?;

    let articles = bags
        .iter()
        .filter(|b| in_scope(ctx, b, &split))
        .filter_map(|b| {
            let gold = labels.get(&b.qid?)?;
            Some((b.links.as_slice(), gold.as_slice()))
        });
    let report = evaluate(&model, articles, c.hyper.threshold, c.macro_ap)?;
    write_atomic(&ctx.out(REPORT_TSV), |w| Ok(report.write_tsv(w)?))?;
    write_json(&ctx.out(REPORT_JSON), &report)?;
    log::info!(
        "evaluate: {} articles ({} without usable links); micro F1 {:.3}, macro F1 {:.3}",
        report.articles,
        report.skipped,
        report.micro.f1,
        report.macro_.f1
    );

    let manifest = Manifest::new(
        "evaluate",
        c.snapshot_of(&["threshold", "eval_split", "eval_wiki", "macro_ap"]),
    );
    let inputs: Vec<&Path> = c.taxonomy.as_deref().into_iter().collect();
    ctx.finish(
        manifest,
        &inputs,
        &[MODEL, LINK_BAGS, LABELS, SPLITS],
        &[REPORT_TSV, REPORT_JSON],
    )
}

pub fn cmd_stats(ctx: &Stage<'_>) -> Result<()> {
    let c = ctx.config;
    ctx.upstream("stats", &["ingest"], &[LINK_BAGS])?;
    let bags = read_bags(&ctx.out(LINK_BAGS))?;
    let hist = link_histogram(&bags, c.hist_cap);
    write_atomic(&ctx.out(HISTOGRAM), |w| Ok(hist.write_tsv(w)?))?;
    log::info!(
        "stats: {} articles, {:.4} with at least one link, {:.4} at or above {} links",
        hist.total,
        hist.covered_fraction(),
        hist.fraction(hist.cap),
        hist.cap
    );
    ctx.finish(
        Manifest::new("stats", c.snapshot_of(&["hist_cap"])),
        &[],
        &[LINK_BAGS],
        &[HISTOGRAM],
    )
}
