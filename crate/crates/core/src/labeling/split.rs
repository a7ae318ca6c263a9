use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::tsv::for_each_row;
use crate::{Error, Qid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "validation" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.90,
            validation: 0.02,
            test: 0.08,
        }
    }
}

impl SplitRatios {
    pub fn new(train: f64, validation: f64, test: f64) -> Result<Self> {
        let ratios = SplitRatios {
            train,
            validation,
            test,
        };
        ratios.validate()?;
        Ok(ratios)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.test];
        let ok = parts.iter().all(|r| r.is_finite() && *r >= 0.0)
            && (parts.iter().sum::<f64>() - 1.0).abs() <= 1e-9;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidRatios {
                train: self.train,
                validation: self.validation,
                test: self.test,
            })
        }
    }

    pub fn get(&self, split: Split) -> f64 {
        match split {
            Split::Train => self.train,
            Split::Validation => self.validation,
            Split::Test => self.test,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeded 64-bit string hash: FNV-1a over the bytes, starting from a
/// seed-dependent basis, followed by a splitmix64 finalizer.
pub fn stable_hash(seed: u64, key: &str) -> u64 {
    let mut h = 0xCBF2_9CE4_8422_2325 ^ splitmix64(seed);
    for b in key.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    splitmix64(h)
}

/// Maps a hash to [0, 1) using its top 53 bits.
pub fn unit_interval(hash: u64) -> f64 {
    (hash >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Assigns entity IDs to splits by hashing their textual form.
#[derive(Clone, Copy, Debug)]
pub struct Splitter {
    ratios: SplitRatios,
    seed: u64,
}

impl Splitter {
    pub fn new(ratios: SplitRatios, seed: u64) -> Result<Self> {
        ratios.validate()?;
        Ok(Splitter { ratios, seed })
    }

    pub fn assign_key(&self, key: &str) -> Split {
        let u = unit_interval(stable_hash(self.seed, key));
        if u < self.ratios.train {
            Split::Train
        } else if u < self.ratios.train + self.ratios.validation {
            Split::Validation
        } else {
            Split::Test
        }
    }

    pub fn assign(&self, qid: Qid) -> Split {
        self.assign_key(&qid.to_string())
    }
}

/// Split membership of every labeled entity ID.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitAssignment {
    pub ratios: SplitRatios,
    pub seed: u64,
    assignments: BTreeMap<Qid, Split>,
}

impl SplitAssignment {
    pub fn get(&self, qid: Qid) -> Option<Split> {
        self.assignments.get(&qid).copied()
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Qid, Split)> + '_ {
        self.assignments.iter().map(|(&q, &s)| (q, s))
    }

    /// Number of entity IDs in train, validation and test.
    pub fn counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for split in self.assignments.values() {
            counts[*split as usize] += 1;
        }
        counts
    }

    /// Writes `qid\tsplit` rows in entity ID order.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        for (qid, split) in &self.assignments {
            writeln!(out, "{qid}\t{split}")?;
        }
        Ok(())
    }

    /// Reads rows written by [`SplitAssignment::write_tsv`]. Ratios and seed
    /// are not part of the file and must be supplied.
    pub fn read_tsv<R: BufRead>(reader: R, ratios: SplitRatios, seed: u64) -> Result<Self> {
        let mut assignments = BTreeMap::new();
        for_each_row(reader, |line, fields| {
            let parse_err = |message: String| Error::Parse {
                what: "splits",
                line,
                message,
            };
            let [qid, split] = fields else {
                return Err(parse_err(format!(
                    "expected 2 fields, got {}",
                    fields.len()
                )));
            };
            let qid: Qid = qid.parse().map_err(|e| parse_err(format!("{e}")))?;
            let split: Split = split.parse().map_err(parse_err)?;
            if assignments
                .insert(qid, split)
                .is_some_and(|old| old != split)
            {
                return Err(parse_err(format!("{qid} assigned to two splits")));
            }
            Ok(())
        })?;
        Ok(SplitAssignment {
            ratios,
            seed,
            assignments,
        })
    }
}

/// Assigns every entity ID to a split. Articles sharing an entity ID share
/// its split by construction.
pub fn split_dataset<I>(qids: I, ratios: SplitRatios, seed: u64) -> Result<SplitAssignment>
where
    I: IntoIterator<Item = Qid>,
{
    let splitter = Splitter::new(ratios, seed)?;
    let assignments = qids.into_iter().map(|q| (q, splitter.assign(q))).collect();
    Ok(SplitAssignment {
        ratios,
        seed,
        assignments,
    })
}
