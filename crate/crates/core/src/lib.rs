//! Compress node-labeled directed graphs into linear graph grammars and
//! compute pattern simulations directly on the compressed grammar.

pub mod baseline;
pub mod compress;
pub mod genbench;
pub mod grammar;
pub mod graph;
pub mod sim;

pub use grammar::{GrammarPathSuffix, GraphGrammar, PathMap, SuffixSet};
pub use graph::{Label, LabeledGraph, NodeId, PatternGraph};
