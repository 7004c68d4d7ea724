//! Corpus data model: quads, samples, corpora, and their on-disk formats.
//!
//! A [`Sample`] is a pre-tokenized sentence plus the quads annotated on it.
//! Explicit aspect and opinion terms are stored as normalized token text and
//! must occur as a contiguous token run inside the sentence.

mod io;
mod legacy;
mod synth;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{load_corpus, write_corpus, Format};
pub use legacy::{parse_legacy_line, Element, ElementOrder};
pub use synth::{generate_synthetic, PatternMix, SynthSpec};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed line: {0}")]
    MalformedLine(String),
    #[error("term {term:?} does not occur in the sentence")]
    SpanNotFound { term: String },
    #[error("unknown sentiment {0:?}")]
    UnknownSentiment(String),
    #[error("sample {0} has no quads")]
    NoQuads(String),
    #[error("sample {id} repeats quad {quad}")]
    DuplicateQuad { id: String, quad: String },
    #[error("duplicate sample id {0}")]
    DuplicateId(String),
    #[error("category {0:?} listed twice in the inventory")]
    DuplicateCategory(String),
    #[error("category {0:?} is not in the category inventory")]
    UnknownCategory(String),
    #[error("cannot concatenate sample {0} with itself")]
    SelfConcat(String),
    #[error("invalid synthetic corpus spec: {0}")]
    InvalidSpec(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<CorpusError>,
    },
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Positive,
    Negative,
    Neutral,
}

impl Sentiment {
    pub const ALL: [Sentiment; 3] = [Sentiment::Positive, Sentiment::Negative, Sentiment::Neutral];

    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Positive => "positive",
            Sentiment::Negative => "negative",
            Sentiment::Neutral => "neutral",
        }
    }
}

impl FromStr for Sentiment {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" | "pos" => Ok(Sentiment::Positive),
            "negative" | "neg" => Ok(Sentiment::Negative),
            "neutral" | "neu" => Ok(Sentiment::Neutral),
            _ => Err(CorpusError::UnknownSentiment(s.to_string())),
        }
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An aspect or opinion slot: a surface term, or implicit when the sentence
/// carries no span for it. Serialized as a string or `null`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Option<String>", into = "Option<String>")]
pub enum Term {
    Implicit,
    Explicit(String),
}

impl Term {
    /// Builds an explicit term, collapsing internal whitespace to single
    /// spaces. Returns `None` for blank input.
    pub fn explicit(text: &str) -> Option<Term> {
        let normalized = text.split_whitespace().collect::<Vec<_>>().join(" ");
        if normalized.is_empty() {
            None
        } else {
            Some(Term::Explicit(normalized))
        }
    }

    pub fn text(&self) -> Option<&str> {
        match self {
            Term::Implicit => None,
            Term::Explicit(text) => Some(text),
        }
    }

    pub fn is_implicit(&self) -> bool {
        matches!(self, Term::Implicit)
    }
}

impl TryFrom<Option<String>> for Term {
    type Error = String;

    fn try_from(value: Option<String>) -> Result<Self, Self::Error> {
        match value {
            None => Ok(Term::Implicit),
            Some(text) => Term::explicit(&text).ok_or_else(|| "blank term text".to_string()),
        }
    }
}

impl From<Term> for Option<String> {
    fn from(term: Term) -> Self {
        match term {
            Term::Implicit => None,
            Term::Explicit(text) => Some(text),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Implicit => f.write_str("NULL"),
            Term::Explicit(text) => f.write_str(text),
        }
    }
}

/// One (aspect, opinion, category, sentiment) annotation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Quad {
    pub aspect: Term,
    pub opinion: Term,
    pub category: String,
    pub sentiment: Sentiment,
}

impl Quad {
    pub fn new(aspect: Term, opinion: Term, category: impl Into<String>, sentiment: Sentiment) -> Self {
        Quad {
            aspect,
            opinion,
            category: category.into(),
            sentiment,
        }
    }
}

impl fmt::Display for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.aspect, self.opinion, self.category, self.sentiment
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Raw,
    /// Built from the listed parents, in text order. A single parent marks a
    /// plain duplicate; a parent listed twice marks a self-concatenation.
    Concat(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

/// Serialized shape of a sample: one JSON object per corpus line.
#[derive(Serialize, Deserialize)]
struct SampleRecord {
    id: String,
    text: String,
    quads: Vec<Quad>,
    provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SampleRecord", into = "SampleRecord")]
pub struct Sample {
    id: String,
    tokens: Vec<String>,
    quads: Vec<Quad>,
    provenance: Provenance,
}

impl Sample {
    /// Validates and builds a sample from whitespace-tokenized `text`.
    pub fn new(
        id: impl Into<String>,
        text: &str,
        quads: Vec<Quad>,
        provenance: Provenance,
    ) -> Result<Sample, CorpusError> {
        let tokens = text.split_whitespace().map(str::to_string).collect();
        Sample::from_tokens(id.into(), tokens, quads, provenance)
    }

    pub fn from_tokens(
        id: String,
        tokens: Vec<String>,
        quads: Vec<Quad>,
        provenance: Provenance,
    ) -> Result<Sample, CorpusError> {
        if quads.is_empty() {
            return Err(CorpusError::NoQuads(id));
        }
        for quad in &quads {
            for term in [&quad.aspect, &quad.opinion] {
                if let Term::Explicit(text) = term {
                    if find_span(&tokens, text).is_none() {
                        return Err(CorpusError::SpanNotFound { term: text.clone() });
                    }
                }
            }
        }
        // Distinct parents contribute disjoint label sets, so repeats are only
        // legitimate for self-concatenations (every quad appears once per copy).
        let max_repeat = match &provenance {
            Provenance::Concat(parents) if parents.len() > 1 && parents.iter().all(|p| p == &parents[0]) => {
                parents.len()
            }
            _ => 1,
        };
        let mut seen: HashMap<&Quad, usize> = HashMap::new();
        for quad in &quads {
            let n = seen.entry(quad).or_default();
            *n += 1;
            if *n > max_repeat {
                return Err(CorpusError::DuplicateQuad {
                    id,
                    quad: quad.to_string(),
                });
            }
        }
        Ok(Sample {
            id,
            tokens,
            quads,
            provenance,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn quads(&self) -> &[Quad] {
        &self.quads
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Distinct categories of this sample in ascending order.
    pub fn categories(&self) -> BTreeSet<&str> {
        self.quads.iter().map(|q| q.category.as_str()).collect()
    }

    /// Returns a copy of this sample under a new id with the given provenance.
    pub fn relabeled(&self, id: impl Into<String>, provenance: Provenance) -> Sample {
        Sample {
            id: id.into(),
            tokens: self.tokens.clone(),
            quads: self.quads.clone(),
            provenance,
        }
    }

    /// True when the two samples share at least one identical quad.
    pub fn shares_quad_with(&self, other: &Sample) -> bool {
        self.quads.iter().any(|q| other.quads.contains(q))
    }
}

impl TryFrom<SampleRecord> for Sample {
    type Error = CorpusError;

    fn try_from(record: SampleRecord) -> Result<Self, Self::Error> {
        Sample::new(record.id, &record.text, record.quads, record.provenance)
    }
}

impl From<Sample> for SampleRecord {
    fn from(sample: Sample) -> Self {
        SampleRecord {
            text: sample.text(),
            id: sample.id,
            quads: sample.quads,
            provenance: sample.provenance,
        }
    }
}

/// Token offset of the first occurrence of `term` (whitespace tokenized) in
/// `tokens`, matched case-sensitively.
pub fn find_span(tokens: &[String], term: &str) -> Option<usize> {
    let needle: Vec<&str> = term.split_whitespace().collect();
    if needle.is_empty() || needle.len() > tokens.len() {
        return None;
    }
    tokens
        .windows(needle.len())
        .position(|window| window.iter().zip(&needle).all(|(a, b)| a == b))
}

/// Concatenates two distinct samples: `a`'s text then `b`'s, joined by a
/// single space, with the quads of both in the same order.
///
/// Fails with [`CorpusError::SelfConcat`] when both have the same id and
/// with [`CorpusError::DuplicateQuad`] when the parents share an identical
/// quad, which would leave the result with a repeated label.
pub fn concat_samples(a: &Sample, b: &Sample) -> Result<Sample, CorpusError> {
    if a.id == b.id {
        return Err(CorpusError::SelfConcat(a.id.clone()));
    }
    let id = format!("{}+{}", a.id, b.id);
    if let Some(shared) = a.quads.iter().find(|q| b.quads.contains(q)) {
        return Err(CorpusError::DuplicateQuad {
            id,
            quad: shared.to_string(),
        });
    }
    Ok(join_unchecked(id, a, b))
}

/// Concatenation without the distinct-parent checks; used for opt-in
/// self-pairs, where the result legitimately carries every quad twice.
pub(crate) fn join_unchecked(id: String, a: &Sample, b: &Sample) -> Sample {
    let mut tokens = Vec::with_capacity(a.tokens.len() + b.tokens.len());
    tokens.extend_from_slice(&a.tokens);
    tokens.extend_from_slice(&b.tokens);
    let mut quads = Vec::with_capacity(a.quads.len() + b.quads.len());
    quads.extend_from_slice(&a.quads);
    quads.extend_from_slice(&b.quads);
    Sample {
        id,
        tokens,
        quads,
        provenance: Provenance::Concat(vec![a.id.clone(), b.id.clone()]),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    samples: Vec<Sample>,
    categories: Vec<String>,
    split: Split,
}

impl Corpus {
    /// Builds a corpus with an explicit category inventory.
    pub fn new(samples: Vec<Sample>, categories: Vec<String>, split: Split) -> Result<Corpus, CorpusError> {
        let mut ids = HashSet::with_capacity(samples.len());
        for sample in &samples {
            if !ids.insert(sample.id.as_str()) {
                return Err(CorpusError::DuplicateId(sample.id.clone()));
            }
        }
        let mut inventory: HashSet<&str> = HashSet::with_capacity(categories.len());
        for category in &categories {
            if !inventory.insert(category) {
                return Err(CorpusError::DuplicateCategory(category.clone()));
            }
        }
        for sample in &samples {
            for quad in &sample.quads {
                if !inventory.contains(quad.category.as_str()) {
                    return Err(CorpusError::UnknownCategory(quad.category.clone()));
                }
            }
        }
        Ok(Corpus {
            samples,
            categories,
            split,
        })
    }

    /// Builds a corpus whose inventory is the sorted set of observed categories.
    pub fn from_samples(samples: Vec<Sample>, split: Split) -> Result<Corpus, CorpusError> {
        let categories = io::observed_categories(&samples);
        Corpus::new(samples, categories, split)
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Sample> {
        self.samples.iter().find(|s| s.id == id)
    }

    pub fn with_split(mut self, split: Split) -> Corpus {
        self.split = split;
        self
    }

    pub fn into_samples(self) -> Vec<Sample> {
        self.samples
    }

    /// Same inventory and split, different samples.
    pub fn with_samples(&self, samples: Vec<Sample>) -> Result<Corpus, CorpusError> {
        Corpus::new(samples, self.categories.clone(), self.split)
    }
}
