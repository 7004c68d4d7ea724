//! Quad-pattern graphs.
//!
//! Each sample becomes a small DAG: a virtual root pointing at every aspect
//! node, and one aspect→opinion edge per quad. Explicit terms are keyed by
//! their text, so a term shared by two quads is one node; every implicit
//! slot is its own node. The graph's isomorphism class is the sample's
//! fine-grained pattern; its coarse class is single / disjoint / overlapping.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Sample, Term};

/// Largest aspect + opinion node count canonicalized exactly.
pub const MAX_EXACT_NODES: usize = 12;

const KEY_PREFIX: &str = "qpg1";

#[derive(Debug, Error)]
pub enum PatternError {
    #[error("graph has {nodes} term nodes, above the exact limit of {MAX_EXACT_NODES}")]
    GraphTooLarge {
        nodes: usize,
        /// Degree-multiset key usable in place of the exact one.
        fallback: Box<PatternSignature>,
    },
    #[error("invalid pattern graph: {0}")]
    InvalidGraph(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeLabel {
    Term(String),
    Implicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoarseClass {
    Single,
    Disjoint,
    Overlapping,
}

impl CoarseClass {
    pub const ALL: [CoarseClass; 3] = [CoarseClass::Single, CoarseClass::Disjoint, CoarseClass::Overlapping];

    pub fn as_str(self) -> &'static str {
        match self {
            CoarseClass::Single => "single",
            CoarseClass::Disjoint => "disjoint",
            CoarseClass::Overlapping => "overlapping",
        }
    }
}

impl fmt::Display for CoarseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadPatternGraph {
    aspects: Vec<NodeLabel>,
    opinions: Vec<NodeLabel>,
    /// One (aspect, opinion) pair per quad, in annotation order.
    links: Vec<(usize, usize)>,
}

impl QuadPatternGraph {
    /// Builds a graph from per-quad aspect→opinion links over anonymous nodes.
    pub fn from_links(n_aspects: usize, n_opinions: usize, links: Vec<(usize, usize)>) -> Result<Self, PatternError> {
        if links.is_empty() {
            return Err(PatternError::InvalidGraph("at least one quad link is required".into()));
        }
        let mut aspect_used = vec![false; n_aspects];
        let mut opinion_used = vec![false; n_opinions];
        for &(a, o) in &links {
            if a >= n_aspects || o >= n_opinions {
                return Err(PatternError::InvalidGraph(format!("link ({a}, {o}) out of range")));
            }
            aspect_used[a] = true;
            opinion_used[o] = true;
        }
        if aspect_used.iter().chain(&opinion_used).any(|used| !used) {
            return Err(PatternError::InvalidGraph("every term node needs a quad link".into()));
        }
        Ok(QuadPatternGraph {
            aspects: vec![NodeLabel::Implicit; n_aspects],
            opinions: vec![NodeLabel::Implicit; n_opinions],
            links,
        })
    }

    pub fn aspects(&self) -> &[NodeLabel] {
        &self.aspects
    }

    pub fn opinions(&self) -> &[NodeLabel] {
        &self.opinions
    }

    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    pub fn quad_count(&self) -> usize {
        self.links.len()
    }

    /// Aspect and opinion nodes; the root is not counted.
    pub fn term_node_count(&self) -> usize {
        self.aspects.len() + self.opinions.len()
    }

    /// Root→aspect edges plus one aspect→opinion edge per quad.
    pub fn edge_count(&self) -> usize {
        self.aspects.len() + self.links.len()
    }

    fn multiplicity(&self) -> Vec<Vec<u32>> {
        let mut m = vec![vec![0u32; self.opinions.len()]; self.aspects.len()];
        for &(a, o) in &self.links {
            m[a][o] += 1;
        }
        m
    }

    fn degrees(&self) -> (Vec<usize>, Vec<usize>) {
        let mut out = vec![0; self.aspects.len()];
        let mut inc = vec![0; self.opinions.len()];
        for &(a, o) in &self.links {
            out[a] += 1;
            inc[o] += 1;
        }
        (out, inc)
    }

    pub fn coarse_class(&self) -> CoarseClass {
        if self.links.len() == 1 {
            return CoarseClass::Single;
        }
        let (out, inc) = self.degrees();
        if out.iter().chain(&inc).any(|&d| d >= 2) {
            CoarseClass::Overlapping
        } else {
            CoarseClass::Disjoint
        }
    }
}

pub fn build_pattern_graph(sample: &Sample) -> QuadPatternGraph {
    fn node(term: &Term, nodes: &mut Vec<NodeLabel>, index: &mut HashMap<String, usize>) -> usize {
        match term {
            Term::Explicit(text) => *index.entry(text.clone()).or_insert_with(|| {
                nodes.push(NodeLabel::Term(text.clone()));
                nodes.len() - 1
            }),
            Term::Implicit => {
                nodes.push(NodeLabel::Implicit);
                nodes.len() - 1
            }
        }
    }

    let mut aspects = Vec::new();
    let mut opinions = Vec::new();
    let (mut aspect_index, mut opinion_index) = (HashMap::new(), HashMap::new());
    let links = sample
        .quads()
        .iter()
        .map(|quad| {
            (
                node(&quad.aspect, &mut aspects, &mut aspect_index),
                node(&quad.opinion, &mut opinions, &mut opinion_index),
            )
        })
        .collect();
    QuadPatternGraph {
        aspects,
        opinions,
        links,
    }
}

/// Coarse class of a graph. `quad_count` must match the graph's links.
pub fn coarse_class(graph: &QuadPatternGraph, quad_count: usize) -> CoarseClass {
    debug_assert_eq!(graph.quad_count(), quad_count);
    graph.coarse_class()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatternSignature {
    pub canonical_key: String,
    pub coarse: CoarseClass,
    /// Set when the key is the degree-multiset fallback for oversized graphs.
    pub approximate: bool,
}

/// Exact isomorphism-invariant signature.
///
/// The key is the lexicographically smallest adjacency encoding over every
/// relabeling of aspect and opinion nodes. Only the smaller side needs to be
/// permuted: once its order is fixed, sorting the other side's incidence
/// vectors yields the smallest encoding for that order.
type Cell<'a> = Box<dyn Fn(usize, usize) -> u32 + 'a>;

pub fn canonical_signature(graph: &QuadPatternGraph) -> Result<PatternSignature, PatternError> {
    let coarse = graph.coarse_class();
    let nodes = graph.term_node_count();
    if nodes > MAX_EXACT_NODES {
        return Err(PatternError::GraphTooLarge {
            nodes,
            fallback: Box::new(degree_signature(graph)),
        });
    }
    let matrix = graph.multiplicity();
    let (n_a, n_o) = (graph.aspects.len(), graph.opinions.len());
    // Orient so that `rows` is the permuted side and `cols` the sorted side.
    let (rows, cols, cell): (usize, usize, Cell<'_>) = if n_a <= n_o {
        (n_a, n_o, Box::new(|r, c| matrix[r][c]))
    } else {
        (n_o, n_a, Box::new(|r, c| matrix[c][r]))
    };

    let mut perm: Vec<usize> = (0..rows).collect();
    let mut best: Option<Vec<Vec<u32>>> = None;
    loop {
        let mut vectors: Vec<Vec<u32>> = (0..cols).map(|c| perm.iter().map(|&r| cell(r, c)).collect()).collect();
        vectors.sort_unstable();
        if best.as_ref().is_none_or(|b| vectors < *b) {
            best = Some(vectors);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let body = best
        .expect("at least one permutation")
        .iter()
        .map(|v| v.iter().map(u32::to_string).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(";");
    Ok(PatternSignature {
        canonical_key: format!("{KEY_PREFIX}:{n_a}x{n_o}:{body}"),
        coarse,
        approximate: false,
    })
}

/// Exact signature when possible, degree-multiset fallback otherwise.
pub fn signature_or_fallback(graph: &QuadPatternGraph) -> PatternSignature {
    match canonical_signature(graph) {
        Ok(sig) => sig,
        Err(PatternError::GraphTooLarge { fallback, .. }) => *fallback,
        Err(err) => unreachable!("canonicalizing a valid graph failed: {err}"),
    }
}

pub fn sample_signature(sample: &Sample) -> PatternSignature {
    signature_or_fallback(&build_pattern_graph(sample))
}

fn degree_signature(graph: &QuadPatternGraph) -> PatternSignature {
    let (mut out, mut inc) = graph.degrees();
    out.sort_unstable();
    inc.sort_unstable();
    let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    PatternSignature {
        canonical_key: format!(
            "{KEY_PREFIX}~deg:{}x{}:{}/{}",
            graph.aspects.len(),
            graph.opinions.len(),
            join(&out),
            join(&inc)
        ),
        coarse: graph.coarse_class(),
        approximate: true,
    }
}

/// Advances to the next lexicographic permutation; false after the last.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
