//! Stage manifests, content digests and atomic output files.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

/// What a stage read and wrote, and the settings it ran with.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: String,
    /// Input path to SHA-256 digest.
    pub inputs: BTreeMap<String, String>,
    /// Output file name, relative to the output directory, to digest.
    pub outputs: BTreeMap<String, String>,
    pub config: BTreeMap<String, String>,
}

pub fn manifest_path(out_dir: &Path, stage: &str) -> PathBuf {
    out_dir.join(format!("{stage}.manifest.json"))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut hasher = Sha256::new();
    io::copy(&mut file, &mut hasher).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(hasher.finalize()))
}

/// Writes `path` through a temporary file in the same directory that is
/// renamed into place only after `fill` succeeds.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let tmp = NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    let mut out = BufWriter::new(tmp);
    fill(&mut out).with_context(|| format!("writing {}", path.display()))?;
    let tmp = out.into_inner().map_err(|e| e.into_error())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value)?;
        out.write_all(b"\n")?;
        Ok(())
    })
}

impl Manifest {
    pub fn new(stage: &str, config: BTreeMap<String, String>) -> Self {
        Manifest {
            stage: stage.to_owned(),
            config,
            ..Default::default()
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs
            .insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    pub fn add_output(&mut self, out_dir: &Path, name: &str) -> Result<()> {
        self.outputs
            .insert(name.to_owned(), sha256_file(&out_dir.join(name))?);
        Ok(())
    }

    pub fn save(&self, out_dir: &Path) -> Result<()> {
        write_json(&manifest_path(out_dir, &self.stage), self)
    }

    pub fn load(out_dir: &Path, stage: &str) -> Result<Option<Self>> {
        let path = manifest_path(out_dir, stage);
        match fs::read(&path) {
            Ok(bytes) => Ok(Some(
                serde_json::from_slice(&bytes)
                    .with_context(|| format!("parsing {}", path.display()))?,
            )),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e).with_context(|| format!("reading {}", path.display())),
        }
    }

    /// Files whose current digest differs from the recorded one.
    pub fn stale_files(&self, out_dir: &Path) -> Vec<String> {
        let inputs = self.inputs.iter().map(|(p, d)| (PathBuf::from(p), d));
        let outputs = self.outputs.iter().map(|(n, d)| (out_dir.join(n), d));
        inputs
            .chain(outputs)
            .filter(|(path, digest)| sha256_file(path).map_or(true, |now| &now != *digest))
            .map(|(path, _)| path.display().to_string())
            .collect()
    }
}

/// Refuses to continue when an upstream stage has no manifest or its
/// recorded inputs or outputs have changed since it ran, unless `force`.
pub fn check_upstream(out_dir: &Path, stage: &str, upstream: &[&str], force: bool) -> Result<()> {
    for &up in upstream {
        let problem = match Manifest::load(out_dir, up)? {
            None => format!(
                "no manifest for upstream stage `{up}` in {}",
                out_dir.display()
            ),
            Some(m) => {
                let stale = m.stale_files(out_dir);
                if stale.is_empty() {
                    continue;
                }
                format!(
                    "upstream stage `{up}` is stale; changed since it ran: {}",
                    stale.join(", ")
                )
            }
        };
        if force {
            log::warn!("{stage}: {problem}; continuing because of --force");
        } else {
            bail!("{stage}: {problem}; rerun `{up}` or pass --force");
        }
    }
    Ok(())
}

/// Fails with the offending path if any input file is missing.
pub fn require_files(paths: &[&Path]) -> Result<()> {
    for path in paths {
        if !path.is_file() {
            bail!("input file not found: {}", path.display());
        }
    }
    Ok(())
}
