//! Adaptive data augmentation for aspect sentiment quad prediction.
//!
//! The crate loads and validates quad-annotated corpora ([`corpus`]),
//! classifies samples by the shape of their aspect/opinion graph
//! ([`pattern`]), counts class frequencies ([`stats`]), grows a long-tailed
//! training set by concatenating samples under a per-class bound
//! ([`augment`]), renders quads as text for sequence-to-sequence models and
//! parses them back ([`serialize`]), and scores predictions ([`eval`]).

pub mod augment;
pub mod cli;
pub mod corpus;
pub mod eval;
pub mod pattern;
pub mod serialize;
pub mod stats;
