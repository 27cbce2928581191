//! Grammar path suffixes: `N1/i1:N2/i2:…:Nn/in:F`.
//!
//! All comparisons work on whole steps, never on characters, so labels that
//! share substrings (`D` and `CD`) cannot collide.

use std::cmp::Ordering;
use std::collections::{btree_set, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::Label;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuffixParseError {
    #[error("empty grammar path suffix")]
    Empty,
    #[error("malformed step `{0}`")]
    MalformedStep(String),
    #[error("ordinal `{0}` is not a positive integer")]
    BadOrdinal(String),
    #[error("bad label: {0}")]
    BadLabel(String),
}

/// One call step `rule/ordinal`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub rule: Label,
    pub ordinal: u32,
}

impl Step {
    pub fn new(rule: Label, ordinal: u32) -> Self {
        Step { rule, ordinal }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.rule, self.ordinal)
    }
}

/// A sequence of call steps ending in a terminal label. With zero steps it
/// is a bare terminal and stands for every node carrying that label.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GrammarPathSuffix {
    steps: Vec<Step>,
    terminal: Label,
}

impl GrammarPathSuffix {
    pub fn new(steps: Vec<Step>, terminal: Label) -> Self {
        GrammarPathSuffix { steps, terminal }
    }

    pub fn bare(terminal: Label) -> Self {
        GrammarPathSuffix {
            steps: Vec::new(),
            terminal,
        }
    }

    pub fn parse(text: &str) -> Result<Self, SuffixParseError> {
        if text.is_empty() {
            return Err(SuffixParseError::Empty);
        }
        let mut parts: Vec<&str> = text.split(':').collect();
        let terminal = parts.pop().unwrap();
        let terminal = Label::new(terminal).map_err(|e| SuffixParseError::BadLabel(e.to_string()))?;
        let mut steps = Vec::with_capacity(parts.len());
        for part in parts {
            let (rule, ord) = part
                .split_once('/')
                .ok_or_else(|| SuffixParseError::MalformedStep(part.to_string()))?;
            let rule = Label::new(rule).map_err(|_| SuffixParseError::MalformedStep(part.to_string()))?;
            let ordinal = match ord.parse::<u32>() {
                Ok(n) if n > 0 && ord.bytes().all(|b| b.is_ascii_digit()) => n,
                _ => return Err(SuffixParseError::BadOrdinal(ord.to_string())),
            };
            steps.push(Step { rule, ordinal });
        }
        Ok(GrammarPathSuffix { steps, terminal })
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn terminal(&self) -> &Label {
        &self.terminal
    }

    /// Number of steps; a suffix always has its terminal, so it is never empty.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_bare(&self) -> bool {
        self.steps.is_empty()
    }

    /// The rule named by the first step, or the terminal for a bare suffix.
    pub fn first_label(&self) -> &Label {
        self.steps.first().map_or(&self.terminal, |s| &s.rule)
    }

    /// True when the first step names `symbol` (a grammar path when `symbol`
    /// is the start symbol).
    pub fn is_anchored_at(&self, symbol: &Label) -> bool {
        self.steps.first().is_some_and(|s| &s.rule == symbol)
    }

    /// `step ⊕ self`.
    pub fn prepend(&self, step: Step) -> Self {
        let mut steps = Vec::with_capacity(self.steps.len() + 1);
        steps.push(step);
        steps.extend(self.steps.iter().cloned());
        GrammarPathSuffix {
            steps,
            terminal: self.terminal.clone(),
        }
    }

    /// `prefix ⊕ self`.
    pub fn with_prefix(&self, prefix: &[Step]) -> Self {
        let mut steps = Vec::with_capacity(prefix.len() + self.steps.len());
        steps.extend_from_slice(prefix);
        steps.extend(self.steps.iter().cloned());
        GrammarPathSuffix {
            steps,
            terminal: self.terminal.clone(),
        }
    }

    /// Step-wise suffix test; reflexive. When `self` is a suffix of `other`,
    /// every node represented by `other` is represented by `self`.
    pub fn is_suffix_of(&self, other: &GrammarPathSuffix) -> bool {
        self.terminal == other.terminal
            && self.steps.len() <= other.steps.len()
            && other.steps[other.steps.len() - self.steps.len()..] == self.steps[..]
    }

    /// When `self` is a suffix of `other`, the steps `other` has in front.
    pub fn prefix_in<'a>(&self, other: &'a GrammarPathSuffix) -> Option<&'a [Step]> {
        self.is_suffix_of(other)
            .then(|| &other.steps[..other.steps.len() - self.steps.len()])
    }

    /// The suffix with the first step dropped.
    pub fn parent(&self) -> Option<GrammarPathSuffix> {
        (!self.steps.is_empty()).then(|| GrammarPathSuffix {
            steps: self.steps[1..].to_vec(),
            terminal: self.terminal.clone(),
        })
    }
}

/// Canonical order: terminal first, then steps from the innermost outward.
/// A suffix sorts directly before everything it subsumes.
impl Ord for GrammarPathSuffix {
    fn cmp(&self, other: &Self) -> Ordering {
        self.terminal
            .cmp(&other.terminal)
            .then_with(|| self.steps.iter().rev().cmp(other.steps.iter().rev()))
    }
}

impl PartialOrd for GrammarPathSuffix {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GrammarPathSuffix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for step in &self.steps {
            write!(f, "{step}:")?;
        }
        write!(f, "{}", self.terminal)
    }
}

impl fmt::Debug for GrammarPathSuffix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for GrammarPathSuffix {
    type Err = SuffixParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GrammarPathSuffix::parse(s)
    }
}

/// A duplicate-free, canonically ordered set of grammar path suffixes.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct SuffixSet(BTreeSet<GrammarPathSuffix>);

impl SuffixSet {
    pub fn new() -> Self {
        SuffixSet(BTreeSet::new())
    }

    /// Parses each string; panics on malformed input. Meant for fixtures.
    pub fn of(items: &[&str]) -> Self {
        items
            .iter()
            .map(|s| GrammarPathSuffix::parse(s).expect("valid suffix"))
            .collect()
    }

    pub fn insert(&mut self, gps: GrammarPathSuffix) -> bool {
        self.0.insert(gps)
    }

    pub fn contains(&self, gps: &GrammarPathSuffix) -> bool {
        self.0.contains(gps)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> btree_set::Iter<'_, GrammarPathSuffix> {
        self.0.iter()
    }

    /// True when no element is a suffix of another.
    pub fn is_subsumption_free(&self) -> bool {
        self.0.iter().all(|x| !self.has_proper_suffix_of(x))
    }

    fn has_proper_suffix_of(&self, x: &GrammarPathSuffix) -> bool {
        (1..=x.steps.len()).any(|skip| {
            let shorter = GrammarPathSuffix {
                steps: x.steps[skip..].to_vec(),
                terminal: x.terminal.clone(),
            };
            self.0.contains(&shorter)
        })
    }
}

impl FromIterator<GrammarPathSuffix> for SuffixSet {
    fn from_iter<I: IntoIterator<Item = GrammarPathSuffix>>(iter: I) -> Self {
        SuffixSet(iter.into_iter().collect())
    }
}

impl IntoIterator for SuffixSet {
    type Item = GrammarPathSuffix;
    type IntoIter = btree_set::IntoIter<GrammarPathSuffix>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a SuffixSet {
    type Item = &'a GrammarPathSuffix;
    type IntoIter = btree_set::Iter<'a, GrammarPathSuffix>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Debug for SuffixSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

/// Drops every element that has a distinct proper suffix in the input.
pub fn remove_subsumed<I>(items: I) -> SuffixSet
where
    I: IntoIterator<Item = GrammarPathSuffix>,
{
    let all: SuffixSet = items.into_iter().collect();
    all.iter().filter(|x| !all.has_proper_suffix_of(x)).cloned().collect()
}
