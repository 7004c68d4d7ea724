use serde::{Deserialize, Serialize};

use super::{run_ada, AugmentError, AugmentationConfig};
use crate::corpus::Corpus;
use crate::stats::ClassKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kind: ClassKind,
    pub class: String,
    pub pos: usize,
    pub raw: u64,
    /// Final count per kappa, aligned with [`SweepReport::kappas`].
    pub counts: Vec<u64>,
    pub caps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub base: AugmentationConfig,
    pub kappas: Vec<f64>,
    /// Number of concatenations accepted per kappa.
    pub accepted: Vec<usize>,
    pub rows: Vec<SweepRow>,
}

/// Runs the augmentation loop once per kappa, all other settings fixed, and
/// tabulates per-class final counts.
pub fn sweep_kappa(raw: &Corpus, base: &AugmentationConfig, kappas: &[f64]) -> Result<SweepReport, AugmentError> {
    if kappas.is_empty() {
        return Err(AugmentError::InvalidConfig("empty kappa grid".into()));
    }
    let mut accepted = Vec::with_capacity(kappas.len());
    let mut rows: Vec<SweepRow> = Vec::new();
    for (i, &kappa) in kappas.iter().enumerate() {
        let cfg = AugmentationConfig { kappa, ..base.clone() };
        let (_, report) = run_ada(raw, &cfg)?;
        accepted.push(report.accepted_pairs.len());
        let per_kind = [
            (ClassKind::Pattern, &report.final_counts.pattern),
            (ClassKind::Category, &report.final_counts.category),
        ];
        let mut r = 0;
        for (kind, counts) in per_kind {
            for c in counts.iter() {
                if i == 0 {
                    rows.push(SweepRow {
                        kind,
                        class: c.class.clone(),
                        pos: c.pos,
                        raw: c.raw,
                        counts: Vec::with_capacity(kappas.len()),
                        caps: Vec::with_capacity(kappas.len()),
                    });
                }
                rows[r].counts.push(c.count);
                rows[r].caps.push(c.cap);
                r += 1;
            }
        }
    }
    Ok(SweepReport {
        base: base.clone(),
        kappas: kappas.to_vec(),
        accepted,
        rows,
    })
}

impl SweepReport {
    /// Plain-text table: one line per class, one count column per kappa.
    pub fn to_table(&self) -> String {
        let mut out = String::from("kind\tpos\traw");
        for kappa in &self.kappas {
            out.push_str(&format!("\tk={kappa}"));
        }
        out.push_str("\tclass\n");
        for row in &self.rows {
            out.push_str(&format!("{}\t{}\t{}", row.kind, row.pos, row.raw));
            for count in &row.counts {
                out.push_str(&format!("\t{count}"));
            }
            out.push_str(&format!("\t{}\n", row.class));
        }
        out.push_str("accepted\t-\t-");
        for n in &self.accepted {
            out.push_str(&format!("\t{n}"));
        }
        out.push_str("\t-\n");
        out
    }
}
