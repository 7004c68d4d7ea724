//! Naive concatenation oversampling: every class of one kind is raised to
//! the largest raw class count.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AugmentError, IdAllocator};
use crate::corpus::{concat_samples, join_unchecked, Corpus, Provenance, Sample};
use crate::stats::{census, sample_classes, ClassKind};

const RANDOM_PAIR_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OversampleConfig {
    pub kind: ClassKind,
    pub seed: u64,
    pub allow_self_pairs: bool,
    /// Fill classes that cannot be paired with plain duplicates instead of
    /// failing.
    pub duplicate_singletons: bool,
}

impl OversampleConfig {
    pub fn new(kind: ClassKind, seed: u64) -> Self {
        OversampleConfig {
            kind,
            seed,
            allow_self_pairs: false,
            duplicate_singletons: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AddedSample {
    pub class: String,
    pub id: String,
    pub parents: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OversampleReport {
    pub config: OversampleConfig,
    pub n1: u64,
    pub added: Vec<AddedSample>,
    /// (class, count) in raw rank order after balancing.
    pub final_counts: Vec<(String, u64)>,
}

/// Balances `raw` so that every class of `cfg.kind` reaches `n1`.
///
/// Each added sample is credited only to the class it was drawn for: a
/// concatenation of two samples of class `c` adds 2 to `c`, a duplicate adds
/// 1 (used when one occurrence is left over, or when no valid distinct pair
/// exists). For categories, samples whose only category is `c` are
/// preferred as parents so other classes are not inflated.
pub fn run_oversampling(raw: &Corpus, cfg: &OversampleConfig) -> Result<(Corpus, OversampleReport), AugmentError> {
    if raw.is_empty() {
        return Err(AugmentError::EmptyCorpus);
    }
    let census = census(raw, cfg.kind)?;
    let n1 = census.n1();
    let samples = raw.samples();
    let classes: Vec<Vec<String>> = samples.iter().map(|s| sample_classes(s, cfg.kind)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut ids = IdAllocator::new(raw);
    let mut added_samples: Vec<Sample> = Vec::new();
    let mut added: Vec<AddedSample> = Vec::new();
    let mut final_counts = Vec::with_capacity(census.len());

    for entry in census.entries() {
        let mut count = entry.count;
        let members: Vec<usize> = (0..samples.len())
            .filter(|&k| classes[k].contains(&entry.class))
            .collect();
        let exclusive: Vec<usize> = members.iter().copied().filter(|&k| classes[k].len() == 1).collect();
        let pool = if exclusive.is_empty() { members } else { exclusive };

        while n1 - count >= 2 {
            let sample = match pick_pair(samples, &pool, &mut rng) {
                Some((a, b)) => {
                    let joined = concat_samples(&samples[a], &samples[b])?;
                    let id = ids.claim(joined.id().to_string());
                    joined.relabeled(id, joined.provenance().clone())
                }
                None if cfg.allow_self_pairs => {
                    let a = &samples[*pool.choose(&mut rng).expect("class has members")];
                    join_unchecked(ids.claim(format!("{}+{}", a.id(), a.id())), a, a)
                }
                None if cfg.duplicate_singletons => break,
                None => return Err(AugmentError::SingletonClassUnreachable(entry.class.clone())),
            };
            count += 2;
            record(&mut added, &mut added_samples, &entry.class, sample);
        }
        while count < n1 {
            let a = &samples[*pool.choose(&mut rng).expect("class has members")];
            let id = ids.claim(format!("{}~dup", a.id()));
            let dup = a.relabeled(id, Provenance::Concat(vec![a.id().to_string()]));
            count += 1;
            record(&mut added, &mut added_samples, &entry.class, dup);
        }
        final_counts.push((entry.class.clone(), count));
    }

    let mut all = samples.to_vec();
    all.extend(added_samples);
    let balanced = raw.with_samples(all)?;
    Ok((
        balanced,
        OversampleReport {
            config: cfg.clone(),
            n1,
            added,
            final_counts,
        },
    ))
}

fn record(added: &mut Vec<AddedSample>, samples: &mut Vec<Sample>, class: &str, sample: Sample) {
    let parents = match sample.provenance() {
        Provenance::Concat(parents) => parents.clone(),
        Provenance::Raw => Vec::new(),
    };
    added.push(AddedSample {
        class: class.to_string(),
        id: sample.id().to_string(),
        parents,
    });
    samples.push(sample);
}

/// A random ordered pair of distinct pool members that share no quad.
fn pick_pair(samples: &[Sample], pool: &[usize], rng: &mut ChaCha8Rng) -> Option<(usize, usize)> {
    if pool.len() < 2 {
        return None;
    }
    let compatible = |a: usize, b: usize| !samples[a].shares_quad_with(&samples[b]);
    for _ in 0..RANDOM_PAIR_ATTEMPTS {
        let i = rng.gen_range(0..pool.len());
        let mut j = rng.gen_range(0..pool.len() - 1);
        if j >= i {
            j += 1;
        }
        if compatible(pool[i], pool[j]) {
            return Some((pool[i], pool[j]));
        }
    }
    let valid: Vec<(usize, usize)> = pool
        .iter()
        .flat_map(|&a| pool.iter().map(move |&b| (a, b)))
        .filter(|&(a, b)| a != b && compatible(a, b))
        .collect();
    valid.choose(rng).copied()
}
