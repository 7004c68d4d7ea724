//! Exact-match quad scoring with head/tail category and pattern-class
//! breakdowns.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Quad, Sample};
use crate::pattern::{build_pattern_graph, CoarseClass};
use crate::serialize::{parse_target, Diagnostic, SurfaceMaps};
use crate::stats::{ClassCensus, ClassKind};

pub const DEFAULT_HEAD_THRESHOLD: u64 = 100;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("predictions do not align with gold: {0}")]
    AlignmentMismatch(String),
    #[error("category breakdown needs a train-split category census")]
    MissingCensus,
    #[error("census kind must be category, got {0}")]
    WrongCensusKind(ClassKind),
    #[error("unknown breakdown mode {0:?} (expected category-headtail or pattern-coarse)")]
    UnknownMode(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub quads: Vec<Quad>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: u64,
    pub n_pred: u64,
    pub n_gold: u64,
}

impl ScoreReport {
    pub fn from_counts(tp: u64, n_pred: u64, n_gold: u64) -> ScoreReport {
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, n_pred);
        let recall = ratio(tp, n_gold);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ScoreReport {
            precision,
            recall,
            f1,
            tp,
            n_pred,
            n_gold,
        }
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    tp: u64,
    n_pred: u64,
    n_gold: u64,
}

impl Tally {
    fn report(self) -> ScoreReport {
        ScoreReport::from_counts(self.tp, self.n_pred, self.n_gold)
    }
}

/// Pairs each gold sample with its predicted quads, deduplicated in first
/// occurrence order.
fn align<'a>(pred: &'a [Prediction], gold: &'a Corpus) -> Result<Vec<(&'a Sample, Vec<&'a Quad>)>, EvalError> {
    let mut by_id: HashMap<&str, &Prediction> = HashMap::with_capacity(pred.len());
    for p in pred {
        if by_id.insert(p.id.as_str(), p).is_some() {
            return Err(EvalError::AlignmentMismatch(format!(
                "duplicate prediction id {:?}",
                p.id
            )));
        }
    }
    if let Some(extra) = pred.iter().find(|p| gold.get(&p.id).is_none()) {
        return Err(EvalError::AlignmentMismatch(format!(
            "prediction id {:?} is not in gold",
            extra.id
        )));
    }
    gold.samples()
        .iter()
        .map(|sample| {
            let p = by_id
                .get(sample.id())
                .ok_or_else(|| EvalError::AlignmentMismatch(format!("no prediction for gold id {:?}", sample.id())))?;
            let mut seen = HashSet::new();
            let quads = p.quads.iter().filter(|q| seen.insert(*q)).collect();
            Ok((sample, quads))
        })
        .collect()
}

/// Micro-averaged exact-match scores over all samples.
pub fn score_quads(pred: &[Prediction], gold: &Corpus) -> Result<ScoreReport, EvalError> {
    let mut tally = Tally::default();
    for (sample, quads) in align(pred, gold)? {
        tally.n_gold += sample.quads().len() as u64;
        tally.n_pred += quads.len() as u64;
        tally.tp += quads.iter().filter(|q| sample.quads().contains(q)).count() as u64;
    }
    Ok(tally.report())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BreakdownMode {
    CategoryHeadtail,
    PatternCoarse,
}

impl FromStr for BreakdownMode {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "category-headtail" => Ok(BreakdownMode::CategoryHeadtail),
            "pattern-coarse" => Ok(BreakdownMode::PatternCoarse),
            _ => Err(EvalError::UnknownMode(s.to_string())),
        }
    }
}

impl fmt::Display for BreakdownMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BreakdownMode::CategoryHeadtail => "category-headtail",
            BreakdownMode::PatternCoarse => "pattern-coarse",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupScore {
    pub group: String,
    #[serde(flatten)]
    pub score: ScoreReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownReport {
    pub mode: BreakdownMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<u64>,
    pub groups: Vec<GroupScore>,
}

impl BreakdownReport {
    pub fn group(&self, name: &str) -> Option<&ScoreReport> {
        self.groups.iter().find(|g| g.group == name).map(|g| &g.score)
    }
}

/// Scores each group separately. In category mode a quad is `cate-head`
/// when its category occurs in at least `threshold` train samples; a
/// prediction is grouped by its own category, which for a true positive is
/// also the gold quad's. In pattern mode every quad of a sample falls in the
/// sample's gold coarse class.
pub fn breakdown(
    pred: &[Prediction],
    gold: &Corpus,
    mode: BreakdownMode,
    train_census: Option<&ClassCensus>,
    threshold: u64,
) -> Result<BreakdownReport, EvalError> {
    let aligned = align(pred, gold)?;
    let (names, threshold): (Vec<&str>, Option<u64>) = match mode {
        BreakdownMode::CategoryHeadtail => (vec!["cate-head", "cate-tail"], Some(threshold)),
        BreakdownMode::PatternCoarse => (CoarseClass::ALL.iter().map(|c| c.as_str()).collect(), None),
    };
    let mut tallies = vec![Tally::default(); names.len()];
    match mode {
        BreakdownMode::CategoryHeadtail => {
            let census = train_census.ok_or(EvalError::MissingCensus)?;
            if census.kind() != ClassKind::Category {
                return Err(EvalError::WrongCensusKind(census.kind()));
            }
            let group = |q: &Quad| usize::from(census.count(&q.category).unwrap_or(0) < threshold.unwrap_or(0));
            for (sample, quads) in aligned {
                for q in sample.quads() {
                    tallies[group(q)].n_gold += 1;
                }
                for q in quads {
                    let t = &mut tallies[group(q)];
                    t.n_pred += 1;
                    if sample.quads().contains(q) {
                        t.tp += 1;
                    }
                }
            }
        }
        BreakdownMode::PatternCoarse => {
            for (sample, quads) in aligned {
                let class = build_pattern_graph(sample).coarse_class();
                let t = &mut tallies[CoarseClass::ALL.iter().position(|c| *c == class).expect("listed")];
                t.n_gold += sample.quads().len() as u64;
                t.n_pred += quads.len() as u64;
                t.tp += quads.iter().filter(|q| sample.quads().contains(q)).count() as u64;
            }
        }
    }
    Ok(BreakdownReport {
        mode,
        threshold,
        groups: names
            .into_iter()
            .zip(tallies)
            .map(|(group, t)| GroupScore {
                group: group.to_string(),
                score: t.report(),
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub overall: ScoreReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub breakdown: Option<BreakdownReport>,
    /// Decoder segments that could not be parsed back into quads.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<LineDiagnostic>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut rows = vec![("overall", &self.overall)];
        if let Some(b) = &self.breakdown {
            rows.extend(b.groups.iter().map(|g| (g.group.as_str(), &g.score)));
        }
        emit_table(&rows)
    }
}

/// Fixed-width table, percentages with two decimals. Groups without gold
/// quads show dashes instead of scores.
pub fn emit_table(rows: &[(&str, &ScoreReport)]) -> String {
    let width = rows.iter().map(|(name, _)| name.len()).max().unwrap_or(0).max(5);
    let mut out = format!(
        "{:<width$}  {:>7}  {:>7}  {:>7}  {:>6}  {:>6}  {:>6}\n",
        "group", "P", "R", "F1", "tp", "n_pred", "n_gold"
    );
    for (name, s) in rows {
        let pct = |v: f64| {
            if s.n_gold == 0 {
                "-".to_string()
            } else {
                format!("{:.2}", v * 100.0)
            }
        };
        out.push_str(&format!(
            "{:<width$}  {:>7}  {:>7}  {:>7}  {:>6}  {:>6}  {:>6}\n",
            name,
            pct(s.precision),
            pct(s.recall),
            pct(s.f1),
            s.tp,
            s.n_pred,
            s.n_gold
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineDiagnostic {
    pub line: usize,
    #[serde(flatten)]
    pub diagnostic: Diagnostic,
}

/// Reads predictions either as JSON lines `{id, quads}` or, when the first
/// non-blank line is not a JSON object, as raw decoder output with one line
/// per gold sample in gold order.
pub fn load_predictions(
    path: impl AsRef<Path>,
    gold: &Corpus,
    maps: &SurfaceMaps,
) -> Result<(Vec<Prediction>, Vec<LineDiagnostic>), EvalError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let is_jsonl = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .is_some_and(|l| l.trim_start().starts_with('{'));
    if is_jsonl {
        let preds = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| EvalError::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<Prediction>, _>>()?;
        return Ok((preds, Vec::new()));
    }
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() != gold.len() {
        return Err(EvalError::AlignmentMismatch(format!(
            "{} decoder lines for {} gold samples",
            lines.len(),
            gold.len()
        )));
    }
    let mut diagnostics = Vec::new();
    let preds = lines
        .iter()
        .zip(gold.samples())
        .enumerate()
        .map(|(i, (line, sample))| {
            let parsed = parse_target(line, maps);
            diagnostics.extend(parsed.diagnostics.into_iter().map(|diagnostic| LineDiagnostic {
                line: i + 1,
                diagnostic,
            }));
            Prediction {
                id: sample.id().to_string(),
                quads: parsed.quads,
            }
        })
        .collect();
    Ok((preds, diagnostics))
}

/// Predictions that reproduce the gold annotation exactly.
pub fn gold_as_predictions(gold: &Corpus) -> Vec<Prediction> {
    gold.samples()
        .iter()
        .map(|s| Prediction {
            id: s.id().to_string(),
            quads: s.quads().to_vec(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Provenance, Sentiment, Split, Term};

    fn t(s: &str) -> Term {
        Term::explicit(s).unwrap()
    }

    fn q(a: &str, o: &str, c: &str) -> Quad {
        Quad::new(t(a), t(o), c, Sentiment::Positive)
    }

    fn gold() -> Corpus {
        Corpus::from_samples(
            vec![
                Sample::new("1", "good pizza", vec![q("pizza", "good", "food")], Provenance::Raw).unwrap(),
                Sample::new(
                    "2",
                    "nice staff and tasty soup",
                    vec![q("staff", "nice", "service"), q("soup", "tasty", "food")],
                    Provenance::Raw,
                )
                .unwrap(),
                Sample::new(
                    "3",
                    "nice staff , rude staff",
                    vec![q("staff", "nice", "service"), q("staff", "rude", "service")],
                    Provenance::Raw,
                )
                .unwrap(),
            ],
            Split::Test,
        )
        .unwrap()
    }

    fn pred(quads: [Vec<Quad>; 3]) -> Vec<Prediction> {
        quads
            .into_iter()
            .enumerate()
            .map(|(i, quads)| Prediction {
                id: (i + 1).to_string(),
                quads,
            })
            .collect()
    }

    #[test]
    fn identity_and_disjoint() {
        let g = gold();
        let s = score_quads(&gold_as_predictions(&g), &g).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        let s = score_quads(&pred([vec![q("x", "y", "food")], vec![], vec![]]), &g).unwrap();
        assert_eq!((s.precision, s.recall, s.f1, s.tp), (0.0, 0.0, 0.0, 0));
        let s = score_quads(&pred([vec![], vec![], vec![]]), &g).unwrap();
        assert_eq!(s.precision, 0.0);
    }

    #[test]
    fn half_right() {
        let g = Corpus::from_samples(
            vec![Sample::new(
                "1",
                "nice staff and tasty soup",
                vec![q("staff", "nice", "service"), q("soup", "tasty", "food")],
                Provenance::Raw,
            )
            .unwrap()],
            Split::Test,
        )
        .unwrap();
        let p = vec![Prediction {
            id: "1".into(),
            quads: vec![q("staff", "nice", "service"), q("soup", "nice", "food")],
        }];
        let s = score_quads(&p, &g).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (0.5, 0.5, 0.5));
    }

    #[test]
    fn duplicates_and_implicit() {
        let g = gold();
        let mut p = gold_as_predictions(&g);
        let first = p[0].quads[0].clone();
        p[0].quads.push(first);
        let s = score_quads(&p, &g).unwrap();
        assert_eq!(s.n_pred, 5);
        assert_eq!(s.f1, 1.0);
        p[0].quads = vec![Quad::new(t("pizza"), Term::Implicit, "food", Sentiment::Positive)];
        assert_eq!(score_quads(&p, &g).unwrap().tp, 4);
    }

    #[test]
    fn alignment_is_checked() {
        let g = gold();
        let mut p = gold_as_predictions(&g);
        p.pop();
        assert!(matches!(score_quads(&p, &g), Err(EvalError::AlignmentMismatch(_))));
        let mut p = gold_as_predictions(&g);
        p[2].id = "9".into();
        assert!(matches!(score_quads(&p, &g), Err(EvalError::AlignmentMismatch(_))));
        let mut p = gold_as_predictions(&g);
        p.push(p[0].clone());
        assert!(matches!(score_quads(&p, &g), Err(EvalError::AlignmentMismatch(_))));
    }

    fn train_census(food: u64, service: u64) -> ClassCensus {
        ClassCensus::from_counts(
            ClassKind::Category,
            [("food".to_string(), food), ("service".to_string(), service)],
        )
    }

    #[test]
    fn head_tail_split() {
        let g = gold();
        let p = gold_as_predictions(&g);
        let census = train_census(150, 20);
        let b = breakdown(&p, &g, BreakdownMode::CategoryHeadtail, Some(&census), 100).unwrap();
        let head = b.group("cate-head").unwrap();
        let tail = b.group("cate-tail").unwrap();
        assert_eq!((head.n_gold, tail.n_gold), (2, 3));
        assert_eq!((head.f1, tail.f1), (1.0, 1.0));

        let census = train_census(150, 100);
        let b = breakdown(&p, &g, BreakdownMode::CategoryHeadtail, Some(&census), 100).unwrap();
        assert_eq!(b.group("cate-tail").unwrap().n_gold, 0);
        assert_eq!(*b.group("cate-head").unwrap(), score_quads(&p, &g).unwrap());

        assert!(matches!(
            breakdown(&p, &g, BreakdownMode::CategoryHeadtail, None, 100),
            Err(EvalError::MissingCensus)
        ));
    }

    #[test]
    fn unmatched_prediction_uses_own_category() {
        let g = gold();
        let mut p = gold_as_predictions(&g);
        p[0].quads.push(q("pizza", "good", "drinks"));
        let census = train_census(150, 20);
        let b = breakdown(&p, &g, BreakdownMode::CategoryHeadtail, Some(&census), 100).unwrap();
        let tail = b.group("cate-tail").unwrap();
        assert_eq!((tail.tp, tail.n_pred), (3, 4));
    }

    #[test]
    fn pattern_groups() {
        let g = gold();
        let mut p = gold_as_predictions(&g);
        p[1].quads.clear();
        p[2].quads.clear();
        let b = breakdown(&p, &g, BreakdownMode::PatternCoarse, None, 100).unwrap();
        assert_eq!(b.group("single").unwrap().f1, 1.0);
        assert_eq!(b.group("disjoint").unwrap().f1, 0.0);
        assert_eq!(b.group("overlapping").unwrap().f1, 0.0);
        let total: u64 = b.groups.iter().map(|g| g.score.tp).sum();
        assert_eq!(total, score_quads(&p, &g).unwrap().tp);
    }

    #[test]
    fn table_rendering() {
        let g = gold();
        let p = gold_as_predictions(&g);
        let census = train_census(150, 100);
        let report = EvalReport {
            overall: score_quads(&p, &g).unwrap(),
            breakdown: Some(breakdown(&p, &g, BreakdownMode::CategoryHeadtail, Some(&census), 100).unwrap()),
            diagnostics: Vec::new(),
        };
        let text = report.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("overall") && lines[1].contains("100.00"));
        assert!(lines[3].starts_with("cate-tail") && lines[3].contains(" - "));
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(json["breakdown"]["groups"][1]["n_gold"], 0);
    }

    #[test]
    fn loads_both_prediction_formats() {
        let g = gold();
        let maps = SurfaceMaps::for_inventory(g.categories()).unwrap();
        let dir = tempfile::tempdir().unwrap();

        let jsonl = dir.path().join("pred.jsonl");
        let body: String = gold_as_predictions(&g)
            .iter()
            .map(|p| serde_json::to_string(p).unwrap() + "\n")
            .collect();
        std::fs::write(&jsonl, body).unwrap();
        let (p, diags) = load_predictions(&jsonl, &g, &maps).unwrap();
        assert_eq!(p, gold_as_predictions(&g));
        assert!(diags.is_empty());

        let raw = dir.path().join("pred.txt");
        std::fs::write(&raw, "food of pizza is good and great\n\ngarbage\n").unwrap();
        let (p, diags) = load_predictions(&raw, &g, &maps).unwrap();
        assert_eq!(p[0].quads, g.samples()[0].quads());
        assert!(p[1].quads.is_empty());
        assert_eq!(diags.len(), 2);
        assert_eq!(diags[1].line, 3);

        std::fs::write(&raw, "only one line\n").unwrap();
        assert!(matches!(
            load_predictions(&raw, &g, &maps),
            Err(EvalError::AlignmentMismatch(_))
        ));
    }
}
