//! `ada` command-line front end.
//!
//! Every subcommand reads an optional JSON [`RunConfig`] and lets flags
//! override it. Outputs go under `--out` with fixed file names, alongside a
//! `config.json` echo of the effective configuration. Exit status is 0 on
//! success, 1 for invalid input or configuration, 2 when a run fails.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use log::info;
use serde::{Deserialize, Serialize};

use crate::augment::{
    run_ada, run_oversampling, sweep_kappa, AugmentError, AugmentationConfig, OversampleConfig, Preset, Strategy,
};
use crate::corpus::{generate_synthetic, load_corpus, write_corpus, Corpus, ElementOrder, Format, Split, SynthSpec};
use crate::eval::{breakdown, load_predictions, score_quads, BreakdownMode, EvalReport, DEFAULT_HEAD_THRESHOLD};
use crate::pattern::{build_pattern_graph, CoarseClass};
use crate::serialize::{build_input, build_target, SurfaceMaps, SurfaceOverrides};
use crate::stats::{census, ClassCensus, ClassKind};

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const REPORT_FILE: &str = "report.json";
pub const INPUTS_FILE: &str = "inputs.txt";
pub const TARGETS_FILE: &str = "targets.txt";
pub const SCORES_FILE: &str = "scores.json";
pub const CONFIG_FILE: &str = "config.json";

pub const DEFAULT_SWEEP_GRID: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 2.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatName {
    Legacy,
    Jsonl,
}

/// Settings shared by all subcommands. Every field is optional; a subcommand
/// reads the ones it needs and falls back to its defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<FormatName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
    /// Not echoed: identical runs into different directories must produce
    /// identical files.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allow_self_pairs: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duplicate_singletons: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<ClassKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface_map: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gold: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pred: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub breakdown: Option<BreakdownMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthSpec>,
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> anyhow::Result<RunConfig> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn augmentation(&self) -> AugmentationConfig {
        let mut cfg = AugmentationConfig::from_preset(
            self.preset.unwrap_or(Preset::R15),
            self.strategy.unwrap_or(Strategy::Joint),
        );
        if let Some(gamma) = self.gamma {
            cfg.gamma = gamma;
        }
        if let Some(eta) = self.eta {
            cfg.eta = eta;
        }
        if let Some(kappa) = self.kappa {
            cfg.kappa = kappa;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(rounds) = self.max_rounds {
            cfg.max_rounds = rounds;
        }
        if let Some(allow) = self.allow_self_pairs {
            cfg.allow_self_pairs = allow;
        }
        cfg
    }
}

macro_rules! set_if_some {
    ($cfg:expr, $($field:ident = $value:expr),* $(,)?) => {
        $(if let Some(v) = $value { $cfg.$field = Some(v); })*
    };
}

#[derive(Parser)]
#[command(
    name = "ada",
    version,
    about = "Adaptive data augmentation toolkit for aspect sentiment quad prediction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a corpus file to the canonical JSON-lines format.
    Import(ImportArgs),
    /// Generate a seeded synthetic corpus.
    Synth(SynthArgs),
    /// Category and pattern censuses of a corpus.
    Stats(StatsArgs),
    /// Run adaptive concatenation augmentation.
    Augment(AugmentArgs),
    /// Balance every class to the largest class count.
    Oversample(OversampleArgs),
    /// Write model input and target sequences.
    Serialize(SerializeArgs),
    /// Score predictions against a gold corpus.
    Eval(EvalArgs),
    /// Run augmentation over a grid of kappa values.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// legacy or jsonl; inferred from the file extension when omitted.
    #[arg(long, value_parser = parse_format)]
    format: Option<FormatName>,
    /// Element order of legacy quad lists, e.g. a,c,s,o.
    #[arg(long)]
    order: Option<String>,
}

#[derive(Args)]
struct AugmentFlags {
    #[arg(long)]
    seed: Option<u64>,
    /// r15, r16, rest or lap.
    #[arg(long)]
    preset: Option<Preset>,
    /// pattern, category or joint.
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<f64>,
    #[arg(long)]
    max_rounds: Option<usize>,
    #[arg(long)]
    allow_self_pairs: bool,
}

#[derive(Args)]
struct ImportArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    input: InputArgs,
    /// Split recorded in the output header.
    #[arg(long)]
    split: Option<Split>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    n_categories: Option<usize>,
    #[arg(long)]
    zipf: Option<f64>,
    #[arg(long)]
    vocab_size: Option<usize>,
    /// single,disjoint,overlapping proportions.
    #[arg(long, value_delimiter = ',')]
    mix: Option<Vec<f64>>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Args)]
struct AugmentArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    aug: AugmentFlags,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<f64>,
}

#[derive(Args)]
struct OversampleArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// category or pattern.
    #[arg(long, value_parser = parse_kind)]
    kind: Option<ClassKind>,
    #[arg(long)]
    allow_self_pairs: bool,
    /// Fail instead of duplicating classes that cannot be paired.
    #[arg(long)]
    no_duplicates: bool,
}

#[derive(Args)]
struct SerializeArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    input: InputArgs,
    /// JSON file overriding category phrases and sentiment words.
    #[arg(long)]
    surface_map: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Predictions: JSON lines {id, quads}, or one decoder output per line.
    #[arg(long)]
    pred: Option<PathBuf>,
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Train corpus, needed for the category head/tail breakdown.
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<FormatName>,
    #[arg(long)]
    order: Option<String>,
    /// category-headtail or pattern-coarse.
    #[arg(long, value_parser = parse_breakdown)]
    breakdown: Option<BreakdownMode>,
    /// Train count at or above which a category is head.
    #[arg(long)]
    threshold: Option<u64>,
    #[arg(long)]
    surface_map: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    aug: AugmentFlags,
    /// Comma-separated kappa grid.
    #[arg(long, value_delimiter = ',')]
    kappa: Option<Vec<f64>>,
}

fn parse_format(s: &str) -> Result<FormatName, String> {
    match s {
        "legacy" => Ok(FormatName::Legacy),
        "jsonl" => Ok(FormatName::Jsonl),
        other => Err(format!("unknown format {other:?} (legacy, jsonl)")),
    }
}

fn parse_kind(s: &str) -> Result<ClassKind, String> {
    match s {
        "category" => Ok(ClassKind::Category),
        "pattern" => Ok(ClassKind::Pattern),
        other => Err(format!("unknown class kind {other:?} (category, pattern)")),
    }
}

fn parse_breakdown(s: &str) -> Result<BreakdownMode, String> {
    s.parse().map_err(|e: crate::eval::EvalError| e.to_string())
}

/// Failure classes mapped to exit statuses 1 and 2.
#[derive(Debug)]
enum Failure {
    Invalid(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    fn status(&self) -> i32 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn invalid(msg: impl std::fmt::Display) -> Failure {
    Failure::Invalid(anyhow!("{msg}"))
}

type CmdResult = Result<(), Failure>;

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("ADA_LOG", "warn")).try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(failure) => {
            let (Failure::Invalid(e) | Failure::Runtime(e)) = &failure;
            eprintln!("error: {e:#}");
            failure.status()
        }
    }
}

fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::Import(args) => cmd_import(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Augment(args) => cmd_augment(args),
        Command::Oversample(args) => cmd_oversample(args),
        Command::Serialize(args) => cmd_serialize(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn base_config(common: &CommonArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_json_file(path).map_err(Failure::Invalid)?,
        None => RunConfig::default(),
    };
    set_if_some!(cfg, out = common.out.clone());
    Ok(cfg)
}

fn apply_input(cfg: &mut RunConfig, args: &InputArgs) {
    set_if_some!(
        cfg,
        input = args.input.clone(),
        format = args.format,
        order = args.order.clone(),
    );
}

fn apply_augment(cfg: &mut RunConfig, args: &AugmentFlags) {
    set_if_some!(
        cfg,
        seed = args.seed,
        preset = args.preset,
        strategy = args.strategy,
        gamma = args.gamma,
        eta = args.eta,
        max_rounds = args.max_rounds,
    );
    if args.allow_self_pairs {
        cfg.allow_self_pairs = Some(true);
    }
}

fn existing(path: &Option<PathBuf>, what: &str) -> Result<PathBuf, Failure> {
    let path = path.clone().ok_or_else(|| invalid(format!("missing --{what}")))?;
    if !path.is_file() {
        return Err(invalid(format!("{what} file {} does not exist", path.display())));
    }
    Ok(path)
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = cfg.out.clone().ok_or_else(|| invalid("missing --out"))?;
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    Ok(dir)
}

fn format_of(cfg: &RunConfig, path: &Path) -> Result<Format, Failure> {
    let name = cfg
        .format
        .unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => FormatName::Jsonl,
            _ => FormatName::Legacy,
        });
    Ok(match name {
        FormatName::Jsonl => Format::Jsonl,
        FormatName::Legacy => {
            let order = match &cfg.order {
                Some(order) => order.parse::<ElementOrder>().map_err(invalid)?,
                None => ElementOrder::default(),
            };
            Format::Legacy(order)
        }
    })
}

fn load(cfg: &RunConfig, path: &Path) -> Result<Corpus, Failure> {
    let format = format_of(cfg, path)?;
    let corpus = load_corpus(path, format).with_context(|| format!("cannot load {}", path.display()))?;
    info!("loaded {} samples from {}", corpus.len(), path.display());
    Ok(corpus)
}

fn load_input(cfg: &RunConfig) -> Result<Corpus, Failure> {
    let path = existing(&cfg.input, "input")?;
    load(cfg, &path)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn write_lines(path: &Path, lines: &[String]) -> anyhow::Result<()> {
    let mut text = lines.join("\n");
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn echo_config(dir: &Path, cfg: &RunConfig) -> anyhow::Result<()> {
    write_json(&dir.join(CONFIG_FILE), cfg)
}

fn save_corpus(dir: &Path, corpus: &Corpus) -> anyhow::Result<()> {
    let path = dir.join(CORPUS_FILE);
    write_corpus(corpus, &path, Format::Jsonl).with_context(|| format!("cannot write {}", path.display()))
}

fn augment_failure(e: AugmentError) -> Failure {
    match e {
        AugmentError::InvalidConfig(_) | AugmentError::NotTrainSplit(_) => Failure::Invalid(e.into()),
        _ => Failure::Runtime(e.into()),
    }
}

fn cmd_import(args: ImportArgs) -> CmdResult {
    let mut cfg = base_config(&args.common)?;
    apply_input(&mut cfg, &args.input);
    set_if_some!(cfg, split = args.split);
    let mut corpus = load_input(&cfg)?;
    if let Some(split) = cfg.split {
        corpus = corpus.with_split(split);
    }
    let dir = out_dir(&cfg)?;
    save_corpus(&dir, &corpus)?;
    echo_config(&dir, &cfg)?;
    println!(
        "imported {} samples, {} categories",
        corpus.len(),
        corpus.categories().len()
    );
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> CmdResult {
    let mut cfg = base_config(&args.common)?;
    let mut spec = cfg.synth.clone().unwrap_or_default();
    if let Some(seed) = args.seed.or(cfg.seed) {
        spec.seed = seed;
    }
    if let Some(n) = args.n_samples {
        spec.n_samples = n;
    }
    if let Some(n) = args.n_categories {
        spec.n_categories = n;
    }
    if let Some(z) = args.zipf {
        spec.category_zipf_exponent = z;
    }
    if let Some(v) = args.vocab_size {
        spec.vocab_size = v;
    }
    if let Some(mix) = &args.mix {
        if mix.len() != 3 {
            return Err(invalid("--mix takes three proportions: single,disjoint,overlapping"));
        }
        spec.pattern_mix = crate::corpus::PatternMix::new(mix[0], mix[1], mix[2]);
    }
    spec.validate().map_err(invalid)?;
    cfg.seed = Some(spec.seed);
    cfg.synth = Some(spec.clone());
    let dir = out_dir(&cfg)?;
    let corpus = generate_synthetic(&spec).context("generation failed")?;
    save_corpus(&dir, &corpus)?;
    echo_config(&dir, &cfg)?;
    println!("generated {} samples", corpus.len());
    Ok(())
}

#[derive(Serialize)]
struct StatsReport {
    n_samples: usize,
    n_quads: usize,
    coarse: Vec<(CoarseClass, u64)>,
    category: ClassCensus,
    pattern: ClassCensus,
}

fn census_table(census: &ClassCensus) -> String {
    let mut out = format!(
        "# {} census: {} classes, n1 = {}\npos\tcount\tclass\n",
        census.kind(),
        census.len(),
        census.n1()
    );
    for e in census.entries() {
        out.push_str(&format!("{}\t{}\t{}\n", e.pos, e.count, e.class));
    }
    out
}

fn cmd_stats(args: StatsArgs) -> CmdResult {
    let mut cfg = base_config(&args.common)?;
    apply_input(&mut cfg, &args.input);
    let corpus = load_input(&cfg)?;
    let mut coarse: Vec<(CoarseClass, u64)> = CoarseClass::ALL.iter().map(|c| (*c, 0)).collect();
    for sample in corpus.samples() {
        let class = build_pattern_graph(sample).coarse_class();
        coarse.iter_mut().find(|(c, _)| *c == class).expect("listed").1 += 1;
    }
    let report = StatsReport {
        n_samples: corpus.len(),
        n_quads: corpus.samples().iter().map(|s| s.quads().len()).sum(),
        coarse,
        category: census(&corpus, ClassKind::Category).context("category census")?,
        pattern: census(&corpus, ClassKind::Pattern).context("pattern census")?,
    };
    print!("{}", census_table(&report.category));
    print!("{}", census_table(&report.pattern));
    println!("# coarse classes");
    for (class, n) in &report.coarse {
        println!("{class}\t{n}");
    }
    if cfg.out.is_some() {
        let dir = out_dir(&cfg)?;
        write_json(&dir.join(REPORT_FILE), &report)?;
        echo_config(&dir, &cfg)?;
    }
    Ok(())
}

fn cmd_augment(args: AugmentArgs) -> CmdResult {
    let mut cfg = base_config(&args.common)?;
    apply_input(&mut cfg, &args.input);
    apply_augment(&mut cfg, &args.aug);
    set_if_some!(cfg, kappa = args.kappa);
    let aug = cfg.augmentation();
    aug.validate().map_err(augment_failure)?;
    let raw = load_input(&cfg)?;
    let dir = out_dir(&cfg)?;
    let (augmented, report) = run_ada(&raw, &aug).map_err(augment_failure)?;
    save_corpus(&dir, &augmented)?;
    write_json(&dir.join(REPORT_FILE), &report)?;
    echo_config(&dir, &cfg)?;
    println!(
        "{} raw + {} augmented samples after {} rounds ({:?})",
        raw.len(),
        report.accepted_pairs.len(),
        report.rounds_run,
        report.stop_reason
    );
    Ok(())
}

fn cmd_oversample(args: OversampleArgs) -> CmdResult {
    let mut cfg = base_config(&args.common)?;
    apply_input(&mut cfg, &args.input);
    set_if_some!(cfg, seed = args.seed, kind = args.kind);
    if args.allow_self_pairs {
        cfg.allow_self_pairs = Some(true);
    }
    if args.no_duplicates {
        cfg.duplicate_singletons = Some(false);
    }
    let mut over = OversampleConfig::new(cfg.kind.unwrap_or(ClassKind::Category), cfg.seed.unwrap_or(0));
    over.allow_self_pairs = cfg.allow_self_pairs.unwrap_or(false);
    over.duplicate_singletons = cfg.duplicate_singletons.unwrap_or(true);
    let raw = load_input(&cfg)?;
    let dir = out_dir(&cfg)?;
    let (balanced, report) = run_oversampling(&raw, &over).map_err(augment_failure)?;
    save_corpus(&dir, &balanced)?;
    write_json(&dir.join(REPORT_FILE), &report)?;
    echo_config(&dir, &cfg)?;
    println!(
        "{} samples added, every {} class at {}",
        report.added.len(),
        over.kind,
        report.n1
    );
    Ok(())
}

fn surface_maps(cfg: &RunConfig, inventory: &[String]) -> Result<SurfaceMaps, Failure> {
    let overrides = match &cfg.surface_map {
        Some(_) => SurfaceOverrides::from_json_file(existing(&cfg.surface_map, "surface-map")?).map_err(invalid)?,
        None => SurfaceOverrides::default(),
    };
    SurfaceMaps::with_overrides(inventory, &overrides).map_err(invalid)
}

fn cmd_serialize(args: SerializeArgs) -> CmdResult {
    let mut cfg = base_config(&args.common)?;
    apply_input(&mut cfg, &args.input);
    set_if_some!(cfg, surface_map = args.surface_map.clone());
    let corpus = load_input(&cfg)?;
    let maps = surface_maps(&cfg, corpus.categories())?;
    let dir = out_dir(&cfg)?;
    let mut inputs = Vec::with_capacity(corpus.len());
    let mut targets = Vec::with_capacity(corpus.len());
    for sample in corpus.samples() {
        inputs.push(build_input(sample, corpus.categories(), &maps).context("input construction")?);
        targets.push(build_target(sample.quads(), &maps).context("target rendering")?.text);
    }
    write_lines(&dir.join(INPUTS_FILE), &inputs)?;
    write_lines(&dir.join(TARGETS_FILE), &targets)?;
    echo_config(&dir, &cfg)?;
    println!("wrote {} input/target pairs", corpus.len());
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> CmdResult {
    let mut cfg = base_config(&args.common)?;
    set_if_some!(
        cfg,
        pred = args.pred.clone(),
        gold = args.gold.clone(),
        train = args.train.clone(),
        format = args.format,
        order = args.order.clone(),
        breakdown = args.breakdown,
        threshold = args.threshold,
        surface_map = args.surface_map.clone(),
    );
    let gold_path = existing(&cfg.gold, "gold")?;
    let pred_path = existing(&cfg.pred, "pred")?;
    let train_path = match &cfg.train {
        Some(_) => Some(existing(&cfg.train, "train")?),
        None => None,
    };
    if cfg.breakdown == Some(BreakdownMode::CategoryHeadtail) && train_path.is_none() {
        return Err(invalid("category-headtail breakdown needs --train"));
    }
    let gold = load(&cfg, &gold_path)?;
    let maps = surface_maps(&cfg, gold.categories())?;
    let (pred, diagnostics) = load_predictions(&pred_path, &gold, &maps).context("cannot load predictions")?;
    let train_census = match &train_path {
        Some(path) => Some(census(&load(&cfg, path)?, ClassKind::Category).context("train census")?),
        None => None,
    };
    let overall = score_quads(&pred, &gold).context("scoring failed")?;
    let breakdown = match cfg.breakdown {
        Some(mode) => Some(
            breakdown(
                &pred,
                &gold,
                mode,
                train_census.as_ref(),
                cfg.threshold.unwrap_or(DEFAULT_HEAD_THRESHOLD),
            )
            .context("breakdown failed")?,
        ),
        None => None,
    };
    let report = EvalReport {
        overall,
        breakdown,
        diagnostics,
    };
    print!("{}", report.to_text());
    if !report.diagnostics.is_empty() {
        eprintln!("{} decoder segments could not be parsed", report.diagnostics.len());
    }
    if cfg.out.is_some() {
        let dir = out_dir(&cfg)?;
        write_json(&dir.join(SCORES_FILE), &report)?;
        echo_config(&dir, &cfg)?;
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> CmdResult {
    let mut cfg = base_config(&args.common)?;
    apply_input(&mut cfg, &args.input);
    apply_augment(&mut cfg, &args.aug);
    set_if_some!(cfg, sweep_grid = args.kappa.clone());
    let grid = cfg.sweep_grid.clone().unwrap_or_else(|| DEFAULT_SWEEP_GRID.to_vec());
    if grid.is_empty() || grid.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
        return Err(invalid("sweep grid values must be positive"));
    }
    cfg.sweep_grid = Some(grid.clone());
    let base = cfg.augmentation();
    base.validate().map_err(augment_failure)?;
    let raw = load_input(&cfg)?;
    let report = sweep_kappa(&raw, &base, &grid).map_err(augment_failure)?;
    print!("{}", report.to_table());
    if cfg.out.is_some() {
        let dir = out_dir(&cfg)?;
        write_json(&dir.join(REPORT_FILE), &report)?;
        echo_config(&dir, &cfg)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(
            &path,
            r#"{"preset": "lap", "kappa": 3.0, "seed": 5, "strategy": "pattern"}"#,
        )
        .unwrap();
        let mut cfg = RunConfig::from_json_file(&path).unwrap();
        let aug = cfg.augmentation();
        assert_eq!((aug.gamma, aug.eta, aug.kappa, aug.seed), (-0.1, 0.0, 3.0, 5));
        assert_eq!(aug.strategy, Strategy::Pattern);
        set_if_some!(cfg, seed = Some(9u64), kappa = Some(0.5));
        let aug = cfg.augmentation();
        assert_eq!((aug.kappa, aug.seed), (0.5, 9));
    }

    #[test]
    fn unknown_config_fields_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(&path, r#"{"kapa": 3.0}"#).unwrap();
        assert!(RunConfig::from_json_file(&path).is_err());
    }

    #[test]
    fn exit_statuses() {
        assert_eq!(run(["ada", "--help"]), 0);
        assert_eq!(run(["ada", "frobnicate"]), 1);
        assert_eq!(run(["ada", "stats", "--input", "/nonexistent/file.txt"]), 1);
        assert_eq!(run(["ada", "augment", "--strategy", "sideways"]), 1);
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.txt");
        fs::write(&bad, "no separator here\n").unwrap();
        assert_eq!(
            run([
                OsString::from("ada"),
                "stats".into(),
                "--input".into(),
                bad.into_os_string()
            ]),
            2
        );
    }
}
