//! Adaptive concatenation augmentation.
//!
//! A class stays augmentable while its live count `n'` is below
//! `kappa * n1 * (exp(gamma * pos) + eta)`, where `pos` is its raw descending
//! rank and `n1` the largest raw class count. A sample passes its strategy
//! gate when the condition value of its pattern class, its categories, or
//! both is strictly positive. Pairs of raw samples that both pass are
//! concatenated until a full round accepts nothing.

mod oversample;
mod sweep;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use log::{debug, info};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{concat_samples, join_unchecked, Corpus, CorpusError, Sample, Split};
use crate::pattern::sample_signature;
use crate::stats::{census, ClassCensus, ClassKind, DynamicCounter, StatsError};

pub use oversample::{run_oversampling, OversampleConfig, OversampleReport};
pub use sweep::{sweep_kappa, SweepReport, SweepRow};

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("augmentation needs a train split, got {0:?}")]
    NotTrainSplit(Split),
    #[error("a sample needs at least one class")]
    NoClasses,
    #[error("invalid augmentation config: {0}")]
    InvalidConfig(String),
    #[error("{0} open samples give too many candidate pairs to enumerate")]
    TooManyCandidates(usize),
    #[error("class {0:?} has a single sample and self pairs are disabled")]
    SingletonClassUnreachable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Pattern,
    Category,
    Joint,
}

impl Strategy {
    /// Whether this strategy gates on classes of `kind`.
    pub fn gates(self, kind: ClassKind) -> bool {
        matches!(
            (self, kind),
            (Strategy::Joint, _) | (Strategy::Pattern, ClassKind::Pattern) | (Strategy::Category, ClassKind::Category)
        )
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pattern" | "p" => Ok(Strategy::Pattern),
            "category" | "c" => Ok(Strategy::Category),
            "joint" | "j" => Ok(Strategy::Joint),
            other => Err(format!("unknown strategy {other:?} (pattern, category, joint)")),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Pattern => "pattern",
            Strategy::Category => "category",
            Strategy::Joint => "joint",
        })
    }
}

/// Published (gamma, eta, kappa) settings for the four public benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    R15,
    R16,
    Rest,
    Lap,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::R15, Preset::R16, Preset::Rest, Preset::Lap];

    /// (gamma, eta, kappa)
    pub fn triple(self) -> (f64, f64, f64) {
        match self {
            Preset::R15 | Preset::R16 => (0.05, 0.5, 2.5),
            Preset::Rest => (0.05, 0.4, 2.0),
            Preset::Lap => (-0.1, 0.0, 1.0),
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "r15" => Ok(Preset::R15),
            "r16" => Ok(Preset::R16),
            "rest" => Ok(Preset::Rest),
            "lap" => Ok(Preset::Lap),
            other => Err(format!("unknown preset {other:?} (r15, r16, rest, lap)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationConfig {
    pub gamma: f64,
    pub eta: f64,
    pub kappa: f64,
    pub strategy: Strategy,
    pub seed: u64,
    pub max_rounds: usize,
    pub allow_self_pairs: bool,
    pub dedupe_pairs: bool,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        AugmentationConfig::from_preset(Preset::R15, Strategy::Joint)
    }
}

impl AugmentationConfig {
    pub fn from_preset(preset: Preset, strategy: Strategy) -> Self {
        let (gamma, eta, kappa) = preset.triple();
        AugmentationConfig {
            gamma,
            eta,
            kappa,
            strategy,
            seed: 0,
            max_rounds: 64,
            allow_self_pairs: false,
            dedupe_pairs: true,
        }
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(AugmentError::InvalidConfig(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        if !self.gamma.is_finite() || !self.eta.is_finite() {
            return Err(AugmentError::InvalidConfig("gamma and eta must be finite".into()));
        }
        if self.max_rounds == 0 {
            return Err(AugmentError::InvalidConfig("max_rounds must be at least 1".into()));
        }
        Ok(())
    }
}

/// `max(exp(gamma * pos) + eta - live / (kappa * n1), 0)`
pub fn condition_value(pos: usize, live: u64, n1: u64, gamma: f64, eta: f64, kappa: f64) -> f64 {
    let bound = (gamma * pos as f64).exp() + eta;
    (bound - live as f64 / (kappa * n1 as f64)).max(0.0)
}

/// Live count at which a class's condition value reaches zero.
pub fn class_cap(pos: usize, n1: u64, cfg: &AugmentationConfig) -> f64 {
    cfg.kappa * n1 as f64 * ((cfg.gamma * pos as f64).exp() + cfg.eta)
}

fn class_condition(
    census: &ClassCensus,
    counter: &DynamicCounter,
    class: &str,
    cfg: &AugmentationConfig,
) -> Result<f64, StatsError> {
    let pos = census.lookup_pos(class)?;
    Ok(condition_value(
        pos,
        counter.at_pos(pos),
        census.n1(),
        cfg.gamma,
        cfg.eta,
        cfg.kappa,
    ))
}

/// Condition value of a pattern class.
pub fn condition_pattern(
    census: &ClassCensus,
    counter: &DynamicCounter,
    class: &str,
    cfg: &AugmentationConfig,
) -> Result<f64, AugmentError> {
    Ok(class_condition(census, counter, class, cfg)?)
}

/// Minimum of the per-category condition values of one sample; positive
/// only when every category is still augmentable.
pub fn condition_category<S: AsRef<str>>(
    census: &ClassCensus,
    counter: &DynamicCounter,
    classes: &[S],
    cfg: &AugmentationConfig,
) -> Result<f64, AugmentError> {
    if classes.is_empty() {
        return Err(AugmentError::NoClasses);
    }
    let mut min = f64::INFINITY;
    for class in classes {
        min = min.min(class_condition(census, counter, class.as_ref(), cfg)?);
    }
    Ok(min)
}

/// Raw-corpus censuses of both kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct Censuses {
    pub pattern: ClassCensus,
    pub category: ClassCensus,
}

impl Censuses {
    pub fn of(corpus: &Corpus) -> Result<Censuses, StatsError> {
        Ok(Censuses {
            pattern: census(corpus, ClassKind::Pattern)?,
            category: census(corpus, ClassKind::Category)?,
        })
    }

    pub fn get(&self, kind: ClassKind) -> &ClassCensus {
        match kind {
            ClassKind::Pattern => &self.pattern,
            ClassKind::Category => &self.category,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counters {
    pub pattern: DynamicCounter,
    pub category: DynamicCounter,
}

impl Counters {
    pub fn new(censuses: &Censuses) -> Counters {
        Counters {
            pattern: DynamicCounter::from_census(&censuses.pattern),
            category: DynamicCounter::from_census(&censuses.category),
        }
    }
}

/// Whether `sample` may take part in a concatenation right now. Samples
/// whose classes are absent from the raw censuses never pass.
pub fn strategy_gate(sample: &Sample, censuses: &Censuses, counters: &Counters, cfg: &AugmentationConfig) -> bool {
    let pattern_open = || {
        let key = sample_signature(sample).canonical_key;
        condition_pattern(&censuses.pattern, &counters.pattern, &key, cfg).is_ok_and(|v| v > 0.0)
    };
    let category_open = || {
        let classes: Vec<&str> = sample.categories().into_iter().collect();
        condition_category(&censuses.category, &counters.category, &classes, cfg).is_ok_and(|v| v > 0.0)
    };
    match cfg.strategy {
        Strategy::Pattern => pattern_open(),
        Strategy::Category => category_open(),
        Strategy::Joint => pattern_open() && category_open(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Fixpoint,
    RoundCap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptedPair {
    pub round: usize,
    pub id: String,
    pub parents: [String; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCount {
    pub class: String,
    pub pos: usize,
    pub raw: u64,
    pub count: u64,
    /// Live count at which the class stops being augmentable.
    pub cap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalCounts {
    pub pattern: Vec<ClassCount>,
    pub category: Vec<ClassCount>,
}

impl FinalCounts {
    fn collect(censuses: &Censuses, counters: &Counters, cfg: &AugmentationConfig) -> FinalCounts {
        let rows = |census: &ClassCensus, counter: &DynamicCounter| {
            census
                .entries()
                .iter()
                .map(|e| ClassCount {
                    class: e.class.clone(),
                    pos: e.pos,
                    raw: e.count,
                    count: counter.at_pos(e.pos),
                    cap: class_cap(e.pos, census.n1(), cfg),
                })
                .collect()
        };
        FinalCounts {
            pattern: rows(&censuses.pattern, &counters.pattern),
            category: rows(&censuses.category, &counters.category),
        }
    }

    pub fn get(&self, kind: ClassKind) -> &[ClassCount] {
        match kind {
            ClassKind::Pattern => &self.pattern,
            ClassKind::Category => &self.category,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationReport {
    pub config: AugmentationConfig,
    pub raw_samples: usize,
    pub rounds_run: usize,
    pub stop_reason: StopReason,
    pub accepted_pairs: Vec<AcceptedPair>,
    pub final_counts: FinalCounts,
}

/// Hands out sample ids, suffixing `~2`, `~3`, ... on reuse.
pub(crate) struct IdAllocator {
    taken: HashSet<String>,
}

impl IdAllocator {
    pub(crate) fn new(corpus: &Corpus) -> Self {
        IdAllocator {
            taken: corpus.samples().iter().map(|s| s.id().to_string()).collect(),
        }
    }

    pub(crate) fn claim(&mut self, base: String) -> String {
        if self.taken.insert(base.clone()) {
            return base;
        }
        (2..)
            .map(|n| format!("{base}~{n}"))
            .find(|candidate| self.taken.insert(candidate.clone()))
            .expect("unbounded suffix range")
    }
}

/// Class positions of every raw sample, resolved once.
struct SampleClasses {
    pattern: Vec<usize>,
    category: Vec<Vec<usize>>,
}

impl SampleClasses {
    fn resolve(raw: &Corpus, censuses: &Censuses) -> Result<SampleClasses, StatsError> {
        let mut pattern = Vec::with_capacity(raw.len());
        let mut category = Vec::with_capacity(raw.len());
        for sample in raw.samples() {
            pattern.push(censuses.pattern.lookup_pos(&sample_signature(sample).canonical_key)?);
            category.push(
                sample
                    .categories()
                    .into_iter()
                    .map(|c| censuses.category.lookup_pos(c))
                    .collect::<Result<Vec<_>, _>>()?,
            );
        }
        Ok(SampleClasses { pattern, category })
    }
}

/// Live gate state for the concatenation loop. Counts only grow, so a
/// closed sample stays closed and is remembered as such.
struct GateState<'a> {
    cfg: &'a AugmentationConfig,
    censuses: &'a Censuses,
    classes: &'a SampleClasses,
    counters: Counters,
    closed: Vec<bool>,
}

impl GateState<'_> {
    fn kind_open(&self, kind: ClassKind, k: usize) -> bool {
        let (census, counter) = match kind {
            ClassKind::Pattern => (&self.censuses.pattern, &self.counters.pattern),
            ClassKind::Category => (&self.censuses.category, &self.counters.category),
        };
        let positions: &[usize] = match kind {
            ClassKind::Pattern => std::slice::from_ref(&self.classes.pattern[k]),
            ClassKind::Category => &self.classes.category[k],
        };
        let n1 = census.n1();
        // min over classes > 0 iff every class value > 0
        positions.iter().all(|&pos| {
            condition_value(
                pos,
                counter.at_pos(pos),
                n1,
                self.cfg.gamma,
                self.cfg.eta,
                self.cfg.kappa,
            ) > 0.0
        })
    }

    fn is_open(&mut self, k: usize) -> bool {
        if self.closed[k] {
            return false;
        }
        let open = [ClassKind::Pattern, ClassKind::Category]
            .into_iter()
            .filter(|&kind| self.cfg.strategy.gates(kind))
            .all(|kind| self.kind_open(kind, k));
        if !open {
            self.closed[k] = true;
        }
        open
    }

    fn credit(&mut self, k: usize) {
        self.counters.pattern.increment_pos(self.classes.pattern[k]);
        for &pos in &self.classes.category[k] {
            self.counters.category.increment_pos(pos);
        }
    }
}

/// Runs the adaptive augmentation loop and returns `raw` followed by the
/// accepted concatenations, plus an audit report.
///
/// Each round shuffles (seeded Fisher–Yates) the ordered pairs of samples
/// that are open at the start of the round and accepts a pair when both
/// members are still open at the moment it is reached. On acceptance both
/// parents credit their raw pattern class and each of their distinct
/// categories. Distinct parents that share an identical quad are never
/// concatenated.
pub fn run_ada(raw: &Corpus, cfg: &AugmentationConfig) -> Result<(Corpus, AugmentationReport), AugmentError> {
    cfg.validate()?;
    if raw.is_empty() {
        return Err(AugmentError::EmptyCorpus);
    }
    if raw.split() != Split::Train {
        return Err(AugmentError::NotTrainSplit(raw.split()));
    }
    let censuses = Censuses::of(raw)?;
    let classes = SampleClasses::resolve(raw, &censuses)?;
    let samples = raw.samples();
    let mut state = GateState {
        cfg,
        censuses: &censuses,
        classes: &classes,
        counters: Counters::new(&censuses),
        closed: vec![false; samples.len()],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut ids = IdAllocator::new(raw);
    let mut used: HashSet<(u32, u32)> = HashSet::new();
    let mut concatenated: Vec<Sample> = Vec::new();
    let mut accepted: Vec<AcceptedPair> = Vec::new();
    let mut stop_reason = StopReason::RoundCap;
    let mut rounds_run = 0;

    for round in 1..=cfg.max_rounds {
        rounds_run = round;
        let open: Vec<u32> = (0..samples.len())
            .filter(|&k| state.is_open(k))
            .map(|k| k as u32)
            .collect();
        let order = candidate_order(open.len(), cfg.allow_self_pairs, &mut rng)?;
        let pair_at = |idx: u32| -> (usize, usize) { decode_pair(idx, open.len(), cfg.allow_self_pairs) };
        let mut accepted_this_round = 0usize;
        for idx in order {
            let (i, j) = pair_at(idx);
            let (k, k2) = (open[i] as usize, open[j] as usize);
            let key = (k.min(k2) as u32, k.max(k2) as u32);
            if cfg.dedupe_pairs && used.contains(&key) {
                continue;
            }
            if !state.is_open(k) || !state.is_open(k2) {
                continue;
            }
            let (a, b) = (&samples[k], &samples[k2]);
            let joined = if k == k2 {
                join_unchecked(ids.claim(format!("{}+{}", a.id(), b.id())), a, b)
            } else {
                match concat_samples(a, b) {
                    Ok(joined) => {
                        let id = ids.claim(joined.id().to_string());
                        joined.relabeled(id, joined.provenance().clone())
                    }
                    Err(CorpusError::DuplicateQuad { .. }) => continue,
                    Err(err) => return Err(err.into()),
                }
            };
            state.credit(k);
            state.credit(k2);
            used.insert(key);
            accepted.push(AcceptedPair {
                round,
                id: joined.id().to_string(),
                parents: [a.id().to_string(), b.id().to_string()],
            });
            concatenated.push(joined);
            accepted_this_round += 1;
        }
        debug!(
            "round {round}: {} open samples, {accepted_this_round} accepted",
            open.len()
        );
        if accepted_this_round == 0 {
            stop_reason = StopReason::Fixpoint;
            break;
        }
    }
    info!(
        "augmentation stopped after {rounds_run} rounds ({stop_reason:?}): {} concatenations",
        concatenated.len()
    );

    let final_counts = FinalCounts::collect(&censuses, &state.counters, cfg);
    let mut all = samples.to_vec();
    all.extend(concatenated);
    let augmented = raw.with_samples(all)?;
    let report = AugmentationReport {
        config: cfg.clone(),
        raw_samples: samples.len(),
        rounds_run,
        stop_reason,
        accepted_pairs: accepted,
        final_counts,
    };
    Ok((augmented, report))
}

/// Seeded Fisher–Yates order over the ordered-pair index space of `m` open
/// samples.
fn candidate_order(m: usize, allow_self: bool, rng: &mut ChaCha8Rng) -> Result<Vec<u32>, AugmentError> {
    let width = if allow_self { m } else { m.saturating_sub(1) };
    let total = m
        .checked_mul(width)
        .filter(|&t| t <= u32::MAX as usize)
        .ok_or(AugmentError::TooManyCandidates(m))?;
    let mut order: Vec<u32> = (0..total as u32).collect();
    order.shuffle(rng);
    Ok(order)
}

fn decode_pair(idx: u32, m: usize, allow_self: bool) -> (usize, usize) {
    let idx = idx as usize;
    if allow_self {
        (idx / m, idx % m)
    } else {
        let (i, r) = (idx / (m - 1), idx % (m - 1));
        (i, if r >= i { r + 1 } else { r })
    }
}

/// Per-kind class tally of an augmented corpus: raw samples count toward
/// their own classes, concatenations toward their parents' raw classes.
/// Classes outside `censuses` are ignored.
pub fn credited_counts(augmented: &Corpus, censuses: &Censuses, kind: ClassKind) -> HashMap<String, u64> {
    let by_id: HashMap<&str, &Sample> = augmented
        .samples()
        .iter()
        .filter(|s| matches!(s.provenance(), crate::corpus::Provenance::Raw))
        .map(|s| (s.id(), s))
        .collect();
    let census = censuses.get(kind);
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut credit = |sample: &Sample| {
        for class in crate::stats::sample_classes(sample, kind) {
            if census.contains(&class) {
                *counts.entry(class).or_default() += 1;
            }
        }
    };
    for sample in augmented.samples() {
        match sample.provenance() {
            crate::corpus::Provenance::Raw => credit(sample),
            crate::corpus::Provenance::Concat(parents) => {
                for parent in parents {
                    if let Some(p) = by_id.get(parent.as_str()) {
                        credit(p);
                    }
                }
            }
        }
    }
    counts
}
