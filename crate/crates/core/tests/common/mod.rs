#![allow(dead_code)]

use ada_asqp::corpus::{Corpus, Provenance, Quad, Sample, Sentiment, Split, Term};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CATEGORIES: [&str; 5] = [
    "FOOD#QUALITY",
    "FOOD#PRICES",
    "SERVICE#GENERAL",
    "AMBIENCE#GENERAL",
    "LAPTOP_BATTERY",
];

/// Words that stress the target grammar: `of` and `and` may appear inside
/// aspect and opinion terms.
pub const VOCAB: [&str; 8] = ["w0", "w1", "w2", "w3", "w4", "of", "and", "w5"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn span(rng: &mut ChaCha8Rng, tokens: &[String], implicit_rate: f64) -> Term {
    if rng.gen_bool(implicit_rate) {
        return Term::Implicit;
    }
    let start = rng.gen_range(0..tokens.len());
    let len = rng.gen_range(1..=2).min(tokens.len() - start);
    Term::explicit(&tokens[start..start + len].join(" ")).expect("non-empty span")
}

/// Random valid sample over a small vocabulary, so terms repeat and graphs
/// of every coarse class appear.
pub fn random_sample(rng: &mut ChaCha8Rng, id: &str, max_quads: usize) -> Sample {
    let n_tokens = rng.gen_range(2..10);
    let tokens: Vec<String> = (0..n_tokens).map(|_| VOCAB.choose(rng).unwrap().to_string()).collect();
    let n_quads = rng.gen_range(1..=max_quads);
    let mut quads: Vec<Quad> = Vec::new();
    for _ in 0..n_quads {
        let quad = Quad::new(
            span(rng, &tokens, 0.25),
            span(rng, &tokens, 0.2),
            *CATEGORIES.choose(rng).unwrap(),
            *Sentiment::ALL.choose(rng).unwrap(),
        );
        if !quads.contains(&quad) {
            quads.push(quad);
        }
    }
    Sample::from_tokens(id.to_string(), tokens, quads, Provenance::Raw).expect("generated sample is valid")
}

pub fn random_corpus(seed: u64, n: usize, max_quads: usize) -> Corpus {
    let mut rng = rng(seed);
    let samples = (0..n)
        .map(|i| random_sample(&mut rng, &format!("r{i}"), max_quads))
        .collect();
    Corpus::from_samples(samples, Split::Train).unwrap()
}
