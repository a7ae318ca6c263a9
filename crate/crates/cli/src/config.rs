//! Flat `key = value` pipeline configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Relative paths are
//! taken relative to the directory holding the config file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use linktopic::classifier::Hyperparams;
use linktopic::ingest::DEFAULT_HISTOGRAM_CAP;
use linktopic::labeling::{Split, SplitRatios};
use linktopic::metrics::MacroApPolicy;

const KEYS: &[&str] = &[
    "page",
    "redirect",
    "pagelink",
    "sitelink",
    "assessments",
    "taxonomy",
    "project_map",
    "out_dir",
    "dim",
    "min_count",
    "epochs",
    "lr",
    "window",
    "threshold",
    "seed",
    "workers",
    "train_ratio",
    "validation_ratio",
    "test_ratio",
    "split_seed",
    "label_wiki",
    "strict_taxonomy",
    "hist_cap",
    "eval_split",
    "eval_wiki",
    "macro_ap",
];

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub page: Option<PathBuf>,
    pub redirect: Option<PathBuf>,
    pub pagelink: Option<PathBuf>,
    pub sitelink: Option<PathBuf>,
    pub assessments: Option<PathBuf>,
    /// Built-in 64-topic taxonomy when unset.
    pub taxonomy: Option<PathBuf>,
    pub project_map: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub hyper: Hyperparams,
    pub ratios: SplitRatios,
    pub split_seed: u64,
    pub label_wikis: Vec<String>,
    pub strict_taxonomy: bool,
    pub hist_cap: usize,
    pub eval_split: Split,
    /// Restricts prediction and evaluation to these wikis when non-empty.
    pub eval_wikis: Vec<String>,
    pub macro_ap: MacroApPolicy,
    /// Every setting after defaults and overrides, for manifests.
    pub snapshot: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub threshold: Option<f64>,
}

fn defaults() -> BTreeMap<String, String> {
    let h = Hyperparams::default();
    let r = SplitRatios::default();
    [
        ("out_dir", "out".to_owned()),
        ("dim", h.dim.to_string()),
        ("min_count", h.min_count.to_string()),
        ("epochs", h.epochs.to_string()),
        ("lr", h.lr.to_string()),
        ("window", h.window.to_string()),
        ("threshold", h.threshold.to_string()),
        ("seed", h.seed.to_string()),
        ("workers", h.workers.to_string()),
        ("train_ratio", r.train.to_string()),
        ("validation_ratio", r.validation.to_string()),
        ("test_ratio", r.test.to_string()),
        ("split_seed", "0".to_owned()),
        ("label_wiki", "enwiki".to_owned()),
        ("strict_taxonomy", "true".to_owned()),
        ("hist_cap", DEFAULT_HISTOGRAM_CAP.to_string()),
        ("eval_split", "test".to_owned()),
        ("eval_wiki", String::new()),
        ("macro_ap", "exclude-empty".to_owned()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_owned(), v))
    .collect()
}

pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key = value, got {raw:?}", i + 1))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            bail!("line {}: unknown key {key:?}", i + 1);
        }
        if out
            .insert(key.to_owned(), value.trim().to_owned())
            .is_some()
        {
            bail!("line {}: duplicate key {key:?}", i + 1);
        }
    }
    Ok(out)
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let (pairs, base) = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                let pairs =
                    parse_pairs(&text).with_context(|| format!("in config {}", p.display()))?;
                (pairs, p.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (BTreeMap::new(), PathBuf::new()),
        };
        Self::from_pairs(pairs, &base, overrides)
    }

    pub fn from_pairs(
        pairs: BTreeMap<String, String>,
        base: &Path,
        overrides: &Overrides,
    ) -> Result<Self> {
        let mut values = defaults();
        values.extend(pairs);
        if let Some(seed) = overrides.seed {
            values.insert("seed".into(), seed.to_string());
        }
        if let Some(workers) = overrides.workers {
            values.insert("workers".into(), workers.to_string());
        }
        if let Some(threshold) = overrides.threshold {
            values.insert("threshold".into(), threshold.to_string());
        }

        let path = |key: &str| {
            values
                .get(key)
                .filter(|v| !v.is_empty())
                .map(|v| base.join(v))
        };
        fn num<T: std::str::FromStr>(values: &BTreeMap<String, String>, key: &str) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            let v = &values[key];
            v.parse().map_err(|e| anyhow!("{key} = {v:?}: {e}"))
        }
        let flag = |key: &str| match values[key].as_str() {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(anyhow!("{key} = {other:?}: expected true or false")),
        };

        let hyper = Hyperparams {
            dim: num(&values, "dim")?,
            min_count: num(&values, "min_count")?,
            epochs: num(&values, "epochs")?,
            lr: num(&values, "lr")?,
            window: num(&values, "window")?,
            threshold: num(&values, "threshold")?,
            seed: num(&values, "seed")?,
            workers: num(&values, "workers")?,
        };
        hyper.validate()?;
        let ratios = SplitRatios::new(
            num(&values, "train_ratio")?,
            num(&values, "validation_ratio")?,
            num(&values, "test_ratio")?,
        )?;
        let macro_ap = match values["macro_ap"].as_str() {
            "exclude-empty" => MacroApPolicy::ExcludeEmpty,
            "include-as-zero" => MacroApPolicy::IncludeAsZero,
            other => bail!("macro_ap = {other:?}: expected exclude-empty or include-as-zero"),
        };
        let label_wikis = list(&values["label_wiki"]);
        if label_wikis.is_empty() {
            bail!("label_wiki must name at least one wiki");
        }

        Ok(PipelineConfig {
            page: path("page"),
            redirect: path("redirect"),
            pagelink: path("pagelink"),
            sitelink: path("sitelink"),
            assessments: path("assessments"),
            taxonomy: path("taxonomy"),
            project_map: path("project_map"),
            out_dir: base.join(&values["out_dir"]),
            hyper,
            ratios,
            split_seed: num(&values, "split_seed")?,
            label_wikis,
            strict_taxonomy: flag("strict_taxonomy")?,
            hist_cap: num(&values, "hist_cap")?,
            eval_split: num(&values, "eval_split")?,
            eval_wikis: list(&values["eval_wiki"]),
            macro_ap,
            snapshot: values,
        })
    }

    /// Snapshot restricted to `keys`, so that a stage's manifest only
    /// changes when a setting it uses changes.
    pub fn snapshot_of(&self, keys: &[&str]) -> BTreeMap<String, String> {
        keys.iter()
            .filter_map(|&k| self.snapshot.get(k).map(|v| (k.to_owned(), v.clone())))
            .collect()
    }
}

/// The configured path for `key`, or an error naming the missing key.
pub fn required<'a>(value: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| anyhow!("config key {key} is not set"))
}
