//! Linear graph grammars: suffix algebra, validation, decompression.

mod index;
pub(crate) mod model;
mod suffix;

pub use index::{GrammarIndex, PathMap, Sym};
pub use model::{GrammarError, GraphGrammar, Rule, Violation};
pub use suffix::{remove_subsumed, GrammarPathSuffix, Step, SuffixParseError, SuffixSet};
