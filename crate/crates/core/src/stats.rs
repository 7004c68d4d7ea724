//! Class censuses: descending per-class counts over a raw corpus, for either
//! aspect categories or quad-pattern signatures, and the live counters the
//! augmentation loop advances.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Sample};
use crate::pattern::sample_signature;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("class {0:?} is not in the census")]
    UnknownClass(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    Category,
    Pattern,
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassKind::Category => "category",
            ClassKind::Pattern => "pattern",
        })
    }
}

/// The classes a sample belongs to under `kind`: its distinct categories in
/// ascending order, or its single pattern signature key.
pub fn sample_classes(sample: &Sample, kind: ClassKind) -> Vec<String> {
    match kind {
        ClassKind::Category => sample.categories().into_iter().map(String::from).collect(),
        ClassKind::Pattern => vec![sample_signature(sample).canonical_key],
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusEntry {
    pub class: String,
    pub count: u64,
    /// 1-based descending rank.
    pub pos: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "CensusRecord", into = "CensusRecord")]
pub struct ClassCensus {
    kind: ClassKind,
    entries: Vec<CensusEntry>,
    pos_index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct CensusRecord {
    kind: ClassKind,
    entries: Vec<CensusEntry>,
    n1: u64,
}

impl From<CensusRecord> for ClassCensus {
    fn from(record: CensusRecord) -> Self {
        ClassCensus::from_counts(record.kind, record.entries.into_iter().map(|e| (e.class, e.count)))
    }
}

impl From<ClassCensus> for CensusRecord {
    fn from(census: ClassCensus) -> Self {
        CensusRecord {
            kind: census.kind,
            n1: census.n1(),
            entries: census.entries,
        }
    }
}

impl ClassCensus {
    /// Orders raw counts by count descending, ties by ascending class key.
    pub fn from_counts(kind: ClassKind, counts: impl IntoIterator<Item = (String, u64)>) -> Self {
        let mut pairs: Vec<(String, u64)> = counts.into_iter().collect();
        pairs.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let entries: Vec<CensusEntry> = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (class, count))| CensusEntry {
                class,
                count,
                pos: i + 1,
            })
            .collect();
        let pos_index = entries.iter().map(|e| (e.class.clone(), e.pos)).collect();
        ClassCensus {
            kind,
            entries,
            pos_index,
        }
    }

    pub fn kind(&self) -> ClassKind {
        self.kind
    }

    pub fn entries(&self) -> &[CensusEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest raw class count.
    pub fn n1(&self) -> u64 {
        self.entries.first().map_or(0, |e| e.count)
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.count).sum()
    }

    pub fn count(&self, class: &str) -> Option<u64> {
        self.pos_index.get(class).map(|&pos| self.entries[pos - 1].count)
    }

    pub fn contains(&self, class: &str) -> bool {
        self.pos_index.contains_key(class)
    }

    pub fn lookup_pos(&self, class: &str) -> Result<usize, StatsError> {
        self.pos_index
            .get(class)
            .copied()
            .ok_or_else(|| StatsError::UnknownClass(class.to_string()))
    }
}

pub fn census(corpus: &Corpus, kind: ClassKind) -> Result<ClassCensus, StatsError> {
    if corpus.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for sample in corpus.samples() {
        for class in sample_classes(sample, kind) {
            *counts.entry(class).or_default() += 1;
        }
    }
    Ok(ClassCensus::from_counts(kind, counts))
}

pub fn lookup_pos(census: &ClassCensus, class: &str) -> Result<usize, StatsError> {
    census.lookup_pos(class)
}

/// Live per-class counts, laid out in census rank order and seeded with the
/// raw counts. Ranks never change while counts grow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicCounter {
    kind: ClassKind,
    counts: Vec<u64>,
}

impl DynamicCounter {
    pub fn from_census(census: &ClassCensus) -> Self {
        DynamicCounter {
            kind: census.kind,
            counts: census.entries.iter().map(|e| e.count).collect(),
        }
    }

    pub fn kind(&self) -> ClassKind {
        self.kind
    }

    pub fn at_pos(&self, pos: usize) -> u64 {
        self.counts[pos - 1]
    }

    pub fn increment_pos(&mut self, pos: usize) {
        self.counts[pos - 1] += 1;
    }

    pub fn get(&self, census: &ClassCensus, class: &str) -> Result<u64, StatsError> {
        Ok(self.at_pos(census.lookup_pos(class)?))
    }

    pub fn increment(&mut self, census: &ClassCensus, class: &str) -> Result<(), StatsError> {
        self.increment_pos(census.lookup_pos(class)?);
        Ok(())
    }

    /// (class, current count) pairs in census rank order.
    pub fn snapshot(&self, census: &ClassCensus) -> Vec<(String, u64)> {
        census
            .entries
            .iter()
            .map(|e| (e.class.clone(), self.counts[e.pos - 1]))
            .collect()
    }
}
