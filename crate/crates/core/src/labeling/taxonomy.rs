use std::collections::HashMap;
use std::io::BufRead;

use log::warn;

use crate::tsv::for_each_row;
use crate::{Error, Result};

/// Size of the standard topic label space.
pub const TOPIC_COUNT: usize = 64;

/// The standard 64 topic ids.
pub const STANDARD_TOPICS: [&str; TOPIC_COUNT] = [
    "europe",
    "biography",
    "stem",
    "asia",
    "sports",
    "media",
    "western-europe",
    "north-america",
    "biology",
    "geographical",
    "eastern-europe",
    "southern-europe",
    "northern-europe",
    "history",
    "music",
    "women",
    "films",
    "east-asia",
    "military-and-warfare",
    "politics-and-government",
    "west-asia",
    "philosophy-and-religion",
    "visual-arts",
    "transportation",
    "literature",
    "south-asia",
    "africa",
    "south-america",
    "north-asia",
    "oceania",
    "business-and-economics",
    "technology",
    "engineering",
    "architecture",
    "medicine-and-health",
    "earth-and-environment",
    "television",
    "society",
    "southeast-asia",
    "space",
    "linguistics",
    "computing",
    "central-america",
    "entertainment",
    "internet-culture",
    "education",
    "chemistry",
    "northern-africa",
    "food-and-drink",
    "performing-arts",
    "physics",
    "books",
    "video-games",
    "mathematics",
    "eastern-africa",
    "comics-and-anime",
    "software",
    "western-africa",
    "southern-africa",
    "central-asia",
    "central-africa",
    "fashion",
    "radio",
    "libraries-and-information",
];

/// Ordered topic identifiers. Indices follow file order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopicTaxonomy {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

fn valid_topic_id(id: &str) -> bool {
    !id.is_empty()
        && id.split('-').all(|part| {
            !part.is_empty()
                && part
                    .bytes()
                    .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit())
        })
}

impl TopicTaxonomy {
    /// Builds a taxonomy; ids must be unique lowercase hyphenated words.
    /// With `strict`, anything other than 64 topics is an error; otherwise
    /// it is logged.
    pub fn new<I, S>(ids: I, strict: bool) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut taxonomy = TopicTaxonomy {
            ids: Vec::new(),
            index: HashMap::new(),
        };
        for id in ids {
            let id = id.into();
            if !valid_topic_id(&id) {
                return Err(Error::InvalidTopicId(id));
            }
            if taxonomy.index.contains_key(&id) {
                return Err(Error::DuplicateTopic(id));
            }
            taxonomy.index.insert(id.clone(), taxonomy.ids.len());
            taxonomy.ids.push(id);
        }
        if taxonomy.len() != TOPIC_COUNT {
            if strict {
                return Err(Error::TaxonomySize(taxonomy.len()));
            }
            warn!(
                "taxonomy has {} topics, expected {TOPIC_COUNT}",
                taxonomy.len()
            );
        }
        Ok(taxonomy)
    }

    pub fn standard() -> Self {
        Self::new(STANDARD_TOPICS, true).expect("standard taxonomy is valid")
    }

    /// Reads one topic id per line; blank lines are ignored.
    pub fn load<R: BufRead>(reader: R, strict: bool) -> Result<Self> {
        let mut ids = Vec::new();
        for_each_row(reader, |_, fields| {
            let id = fields.join("\t");
            let id = id.trim();
            if !id.is_empty() {
                ids.push(id.to_owned());
            }
            Ok(())
        })?;
        Self::new(ids, strict)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }
}
