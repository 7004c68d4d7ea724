//! Seeded synthetic corpora with a controlled quad-pattern mix and a
//! Zipf-distributed category inventory.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusError, Provenance, Quad, Sample, Sentiment, Split, Term};

/// Restaurant-domain style labels; extended with generated ones when more
/// categories are requested.
const CATEGORY_LABELS: [&str; 13] = [
    "FOOD#QUALITY",
    "SERVICE#GENERAL",
    "RESTAURANT#GENERAL",
    "AMBIENCE#GENERAL",
    "FOOD#STYLE_OPTIONS",
    "RESTAURANT#MISCELLANEOUS",
    "FOOD#PRICES",
    "RESTAURANT#PRICES",
    "DRINKS#QUALITY",
    "DRINKS#STYLE_OPTIONS",
    "LOCATION#GENERAL",
    "DRINKS#PRICES",
    "FOOD#GENERAL",
];

const IMPLICIT_ASPECT_RATE: f64 = 0.2;
const IMPLICIT_OPINION_RATE: f64 = 0.1;
const MIN_VOCAB: usize = 16;

/// Target proportions of single / disjoint / overlapping samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternMix {
    pub single: f64,
    pub disjoint: f64,
    pub overlapping: f64,
}

impl PatternMix {
    pub fn new(single: f64, disjoint: f64, overlapping: f64) -> Self {
        PatternMix {
            single,
            disjoint,
            overlapping,
        }
    }

    fn as_array(&self) -> [f64; 3] {
        [self.single, self.disjoint, self.overlapping]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_samples: usize,
    pub pattern_mix: PatternMix,
    pub category_zipf_exponent: f64,
    pub n_categories: usize,
    pub vocab_size: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_samples: 1000,
            pattern_mix: PatternMix::new(0.6, 0.2, 0.2),
            category_zipf_exponent: 1.1,
            n_categories: 13,
            vocab_size: 400,
            seed: 7,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let invalid = |msg: &str| Err(CorpusError::InvalidSpec(msg.to_string()));
        let mix = self.pattern_mix.as_array();
        if mix.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return invalid("pattern proportions must be non-negative");
        }
        if (mix.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return invalid("pattern proportions must sum to 1");
        }
        if self.n_samples == 0 || self.n_categories == 0 {
            return invalid("sample and category counts must be positive");
        }
        if !(self.category_zipf_exponent.is_finite() && self.category_zipf_exponent > 0.0) {
            return invalid("zipf exponent must be positive");
        }
        if self.vocab_size < MIN_VOCAB {
            return invalid("vocabulary needs at least 16 words");
        }
        Ok(())
    }

    pub fn category_labels(&self) -> Vec<String> {
        (0..self.n_categories)
            .map(|i| match CATEGORY_LABELS.get(i) {
                Some(label) => label.to_string(),
                None => format!("TOPIC{:02}#GENERAL", i + 1 - CATEGORY_LABELS.len()),
            })
            .collect()
    }
}

#[derive(Clone, Copy)]
enum Shape {
    Single,
    Disjoint,
    Overlapping,
}

/// Splits `n` by `weights` with the largest-remainder rule so realized
/// counts are within one of `n * weight`.
fn apportion(n: usize, weights: [f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = weights.iter().map(|w| w * n as f64).collect();
    let mut counts: [usize; 3] = [0; 3];
    for (c, e) in counts.iter_mut().zip(&exact) {
        *c = e.floor() as usize;
    }
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let mut left = n - counts.iter().sum::<usize>();
    for idx in order {
        if left == 0 {
            break;
        }
        if weights[idx] > 0.0 {
            counts[idx] += 1;
            left -= 1;
        }
    }
    counts
}

struct Generator {
    rng: ChaCha8Rng,
    vocab: Vec<String>,
    labels: Vec<String>,
    category_dist: WeightedIndex<f64>,
    sentiment_dist: WeightedIndex<f64>,
}

impl Generator {
    fn category(&mut self) -> String {
        self.labels[self.category_dist.sample(&mut self.rng)].clone()
    }

    fn sentiment(&mut self) -> Sentiment {
        Sentiment::ALL[self.sentiment_dist.sample(&mut self.rng)]
    }

    /// Distinct one- or two-word term texts; no word is reused across them.
    fn fresh_terms(&mut self, n: usize) -> Vec<String> {
        let lengths: Vec<usize> = (0..n).map(|_| self.rng.gen_range(1..=2)).collect();
        let words: Vec<&String> = self
            .vocab
            .choose_multiple(&mut self.rng, lengths.iter().sum())
            .collect();
        let mut at = 0;
        lengths
            .iter()
            .map(|len| {
                let term = words[at..at + len]
                    .iter()
                    .map(|w| w.as_str())
                    .collect::<Vec<_>>()
                    .join(" ");
                at += len;
                term
            })
            .collect()
    }

    fn maybe_implicit(&mut self, text: String, rate: f64) -> Term {
        if self.rng.gen_bool(rate) {
            Term::Implicit
        } else {
            Term::Explicit(text)
        }
    }

    fn quads(&mut self, shape: Shape) -> Vec<Quad> {
        let n_quads = match shape {
            Shape::Single => 1,
            _ => self.rng.gen_range(2..=3),
        };
        let mut terms = self.fresh_terms(2 * n_quads).into_iter();
        let mut slots: Vec<(Term, Term)> = Vec::with_capacity(n_quads);
        match shape {
            Shape::Single | Shape::Disjoint => {
                for _ in 0..n_quads {
                    let a = self.maybe_implicit(terms.next().unwrap(), IMPLICIT_ASPECT_RATE);
                    let o = self.maybe_implicit(terms.next().unwrap(), IMPLICIT_OPINION_RATE);
                    slots.push((a, o));
                }
            }
            Shape::Overlapping => {
                // One explicit term is shared by every quad; the other slot
                // varies per quad.
                let shared = Term::Explicit(terms.next().unwrap());
                let share_aspect = self.rng.gen_bool(0.5);
                for _ in 0..n_quads {
                    let other = if share_aspect {
                        self.maybe_implicit(terms.next().unwrap(), IMPLICIT_OPINION_RATE)
                    } else {
                        self.maybe_implicit(terms.next().unwrap(), IMPLICIT_ASPECT_RATE)
                    };
                    slots.push(if share_aspect {
                        (shared.clone(), other)
                    } else {
                        (other, shared.clone())
                    });
                }
            }
        }
        let mut quads: Vec<Quad> = Vec::with_capacity(n_quads);
        for (aspect, opinion) in slots {
            // Two implicit slots next to one shared term can collide; redraw
            // the labels until the quad is new.
            loop {
                let quad = Quad::new(aspect.clone(), opinion.clone(), self.category(), self.sentiment());
                if !quads.contains(&quad) {
                    quads.push(quad);
                    break;
                }
            }
        }
        quads
    }

    fn sentence(&mut self, quads: &[Quad]) -> Vec<String> {
        let mut terms: Vec<&str> = Vec::new();
        for quad in quads {
            for term in [&quad.aspect, &quad.opinion] {
                if let Some(text) = term.text() {
                    if !terms.contains(&text) {
                        terms.push(text);
                    }
                }
            }
        }
        let mut tokens = Vec::new();
        for term in terms {
            for _ in 0..self.rng.gen_range(1..=3) {
                tokens.push(self.vocab.choose(&mut self.rng).unwrap().clone());
            }
            tokens.extend(term.split(' ').map(str::to_string));
        }
        if tokens.is_empty() {
            tokens.push(self.vocab.choose(&mut self.rng).unwrap().clone());
        }
        tokens.push(".".to_string());
        tokens
    }
}

/// Generates a train-split corpus; a pure function of `spec`.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<Corpus, CorpusError> {
    spec.validate()?;
    let labels = spec.category_labels();
    let zipf: Vec<f64> = (1..=labels.len())
        .map(|rank| (rank as f64).powf(-spec.category_zipf_exponent))
        .collect();
    let mut gen = Generator {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        vocab: (0..spec.vocab_size).map(|i| format!("w{i}")).collect(),
        labels,
        category_dist: WeightedIndex::new(zipf).expect("positive weights"),
        sentiment_dist: WeightedIndex::new([0.6, 0.3, 0.1]).expect("positive weights"),
    };

    let [single, disjoint, overlapping] = apportion(spec.n_samples, spec.pattern_mix.as_array());
    let mut shapes: Vec<Shape> = std::iter::repeat_n(Shape::Single, single)
        .chain(std::iter::repeat_n(Shape::Disjoint, disjoint))
        .chain(std::iter::repeat_n(Shape::Overlapping, overlapping))
        .collect();
    shapes.shuffle(&mut gen.rng);

    let mut samples = Vec::with_capacity(spec.n_samples);
    for (i, shape) in shapes.into_iter().enumerate() {
        let quads = gen.quads(shape);
        let tokens = gen.sentence(&quads);
        samples.push(Sample::from_tokens(
            format!("s{:06}", i + 1),
            tokens,
            quads,
            Provenance::Raw,
        )?);
    }
    Corpus::new(samples, gen.labels, Split::Train)
}
