use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Language-independent entity ID, `Q` followed by decimal digits.
///
/// Stored as its numeric part. Leading zeros are rejected so that the
/// textual form round-trips exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Qid(pub u64);

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("invalid entity ID {0:?}")]
pub struct ParseQidError(pub String);

impl FromStr for Qid {
    type Err = ParseQidError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseQidError(s.to_owned());
        let digits = s.strip_prefix('Q').ok_or_else(err)?;
        if digits.is_empty()
            || !digits.bytes().all(|b| b.is_ascii_digit())
            || (digits.len() > 1 && digits.starts_with('0'))
        {
            return Err(err());
        }
        digits.parse().map(Qid).map_err(|_| err())
    }
}

impl fmt::Display for Qid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}", self.0)
    }
}

impl Serialize for Qid {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Qid {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <std::borrow::Cow<'de, str>>::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Sorts entity IDs by their textual form ("Q10" before "Q9").
pub fn sort_lexicographic(qids: &mut [Qid]) {
    qids.sort_by_cached_key(|q| q.to_string());
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_displays() {
        let q: Qid = "Q1297".parse().unwrap();
        assert_eq!(q, Qid(1297));
        assert_eq!(q.to_string(), "Q1297");
        assert_eq!("Q0".parse::<Qid>().unwrap(), Qid(0));
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "Q",
            "q12",
            "P31",
            "Q12a",
            "Q-1",
            " Q1",
            "Q01",
            "Q99999999999999999999999",
        ] {
            assert!(bad.parse::<Qid>().is_err(), "{bad:?} accepted");
        }
    }

    #[test]
    fn lexicographic_order() {
        let mut v = vec![Qid(9), Qid(10), Qid(100), Qid(1)];
        sort_lexicographic(&mut v);
        assert_eq!(v, vec![Qid(1), Qid(10), Qid(100), Qid(9)]);
    }

    #[test]
    fn serde_as_string() {
        let json = serde_json::to_string(&Qid(42)).unwrap();
        assert_eq!(json, "\"Q42\"");
        assert_eq!(serde_json::from_str::<Qid>(&json).unwrap(), Qid(42));
        assert!(serde_json::from_str::<Qid>("\"42\"").is_err());
    }
}
