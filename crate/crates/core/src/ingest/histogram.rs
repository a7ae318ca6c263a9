use std::io::Write;

use serde::{Deserialize, Serialize};

use super::LinkBag;
use crate::Result;

pub const DEFAULT_HISTOGRAM_CAP: usize = 200;

/// Number of articles per outlink count. The last bin collects every
/// article with `cap` or more links.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkHistogram {
    pub cap: usize,
    pub bins: Vec<u64>,
    pub total: u64,
}

impl LinkHistogram {
    pub fn new(cap: usize) -> Self {
        LinkHistogram {
            cap,
            bins: vec![0; cap + 1],
            total: 0,
        }
    }

    pub fn add(&mut self, links: usize) {
        self.bins[links.min(self.cap)] += 1;
        self.total += 1;
    }

    pub fn fraction(&self, bin: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.bins[bin] as f64 / self.total as f64
        }
    }

    /// Fraction of articles with at least one link.
    pub fn covered_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            1.0 - self.fraction(0)
        }
    }

    /// Writes `links\tcount\tfraction` with one row per bin.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "links\tcount\tfraction")?;
        for (k, &count) in self.bins.iter().enumerate() {
            writeln!(out, "{k}\t{count}\t{:.6}", self.fraction(k))?;
        }
        Ok(())
    }
}

pub fn link_histogram<'a, I>(bags: I, cap: usize) -> LinkHistogram
where
    I: IntoIterator<Item = &'a LinkBag>,
{
    let mut hist = LinkHistogram::new(cap);
    for bag in bags {
        hist.add(bag.links.len());
    }
    hist
}
