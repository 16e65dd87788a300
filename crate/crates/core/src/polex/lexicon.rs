use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Seed,
    Expanded,
    Manual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub term: String,
    pub rho: Option<f64>,
    pub provenance: Provenance,
}

/// Political terms keyed by lowercased token.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    entries: BTreeMap<String, LexiconEntry>,
}

impl Lexicon {
    pub fn from_terms<I, S>(terms: I, provenance: Provenance) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut lex = Lexicon::default();
        for t in terms {
            lex.insert(t.into(), None, provenance);
        }
        lex
    }

    /// Adds a term unless already present; existing provenance wins.
    pub fn insert(&mut self, term: String, rho: Option<f64>, provenance: Provenance) -> bool {
        let term = term.to_lowercase();
        if self.entries.contains_key(&term) {
            return false;
        }
        self.entries.insert(
            term.clone(),
            LexiconEntry {
                term,
                rho,
                provenance,
            },
        );
        true
    }

    pub fn remove(&mut self, term: &str) -> Option<LexiconEntry> {
        self.entries.remove(term)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.entries.contains_key(term)
    }

    pub fn get(&self, term: &str) -> Option<&LexiconEntry> {
        self.entries.get(term)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = &LexiconEntry> {
        self.entries.values()
    }

    pub fn count(&self, provenance: Provenance) -> usize {
        self.entries.values().filter(|e| e.provenance == provenance).count()
    }

    pub fn union(&self, other: &Lexicon) -> Lexicon {
        let mut out = self.clone();
        for e in other.entries() {
            out.insert(e.term.clone(), e.rho, e.provenance);
        }
        out
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        let list: Vec<&LexiconEntry> = self.entries.values().collect();
        serde_json::to_writer_pretty(w, &list)?;
        Ok(())
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        let list: Vec<LexiconEntry> = serde_json::from_reader(r)?;
        let mut lex = Lexicon::default();
        for e in list {
            lex.insert(e.term, e.rho, e.provenance);
        }
        Ok(lex)
    }
}

pub(crate) fn word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub(crate) fn to_hash(set: &BTreeSet<String>) -> HashSet<&str> {
    set.iter().map(String::as_str).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let mut lex = Lexicon::default();
        lex.insert("vote".into(), Some(0.1), Provenance::Seed);
        lex.insert("#ge2015".into(), None, Provenance::Manual);
        let mut buf = Vec::new();
        lex.write_json(&mut buf).unwrap();
        let back = Lexicon::read_json(buf.as_slice()).unwrap();
        assert_eq!(back, lex);
    }

    #[test]
    fn first_provenance_kept() {
        let mut lex = Lexicon::from_terms(["vote"], Provenance::Seed);
        assert!(!lex.insert("vote".into(), None, Provenance::Expanded));
        assert_eq!(lex.get("vote").unwrap().provenance, Provenance::Seed);
    }
}
