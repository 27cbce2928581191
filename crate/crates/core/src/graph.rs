//! Node-labeled directed graphs with unlabeled edges, plus the edge-list
//! text format shared by data graphs and pattern graphs.
//!
//! ```text
//! # comment
//! 1 c
//! 2 d
//! 1 2
//! ```
//!
//! Node lines (`<id> <label>`) come first, edge lines (`<src> <dst>`) after.
//! A line whose second token is all digits is an edge line, which is why a
//! [`Label`] may not consist of digits only.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// Caller-supplied node identifier. Never renumbered on load.
pub type NodeId = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("empty label")]
    Empty,
    #[error("label `{0}` contains a character outside [A-Za-z0-9_]")]
    BadChar(String),
    #[error("label `{0}` is all digits")]
    Numeric(String),
}

/// A node label or rule name: a non-empty word over `[A-Za-z0-9_]` that is
/// not purely numeric. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(Arc<str>);

impl Label {
    pub fn new(name: &str) -> Result<Self, LabelError> {
        if name.is_empty() {
            return Err(LabelError::Empty);
        }
        if !name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
            return Err(LabelError::BadChar(name.to_string()));
        }
        if name.bytes().all(|b| b.is_ascii_digit()) {
            return Err(LabelError::Numeric(name.to_string()));
        }
        Ok(Label(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for Label {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::new(s)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl AsRef<str> for Label {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: duplicate node id {id}")]
    DuplicateNode { line: usize, id: NodeId },
    #[error("line {line}: edge references undeclared node {id}")]
    UndeclaredNode { line: usize, id: NodeId },
    #[error("node id must be positive")]
    ZeroId,
    #[error("duplicate node id {0}")]
    Duplicate(NodeId),
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
}

/// A directed graph over an ordered node set. Node ids are unique, edges
/// form a set (no parallel duplicates), self-loops are allowed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledGraph {
    nodes: BTreeMap<NodeId, Label>,
    edges: BTreeSet<(NodeId, NodeId)>,
}

/// Patterns share the data-graph representation.
pub type PatternGraph = LabeledGraph;

impl LabeledGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: NodeId, label: Label) -> Result<(), GraphError> {
        if id == 0 {
            return Err(GraphError::ZeroId);
        }
        if self.nodes.contains_key(&id) {
            return Err(GraphError::Duplicate(id));
        }
        self.nodes.insert(id, label);
        Ok(())
    }

    /// Inserts an edge; returns `false` when it was already present.
    pub fn add_edge(&mut self, src: NodeId, dst: NodeId) -> Result<bool, GraphError> {
        for id in [src, dst] {
            if !self.nodes.contains_key(&id) {
                return Err(GraphError::UnknownNode(id));
            }
        }
        Ok(self.edges.insert((src, dst)))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn label(&self, id: NodeId) -> Option<&Label> {
        self.nodes.get(&id)
    }

    /// Nodes in ascending id order.
    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Label)> + '_ {
        self.nodes.iter().map(|(&id, l)| (id, l))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    /// Edges in ascending `(src, dst)` order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, src: NodeId, dst: NodeId) -> bool {
        self.edges.contains(&(src, dst))
    }

    /// Distinct labels in sorted order.
    pub fn alphabet(&self) -> BTreeSet<Label> {
        self.nodes.values().cloned().collect()
    }

    /// `{ v' | exists v in s: (v', v) is an edge }`, by a full edge scan.
    pub fn predecessors(&self, s: &BTreeSet<NodeId>) -> Result<BTreeSet<NodeId>, GraphError> {
        if let Some(&bad) = s.iter().find(|id| !self.nodes.contains_key(id)) {
            return Err(GraphError::UnknownNode(bad));
        }
        Ok(self
            .edges
            .iter()
            .filter(|(_, dst)| s.contains(dst))
            .map(|&(src, _)| src)
            .collect())
    }

    /// Parses the edge-list format. Line numbers in errors are 1-based.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut g = LabeledGraph::new();
        let mut seen_edge = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let malformed = |msg: String| GraphError::Malformed { line, msg };
            let tokens: Vec<&str> = trimmed.split_whitespace().collect();
            if tokens.len() != 2 {
                return Err(malformed(format!("expected 2 fields, found {}", tokens.len())));
            }
            let first = parse_id(tokens[0]).map_err(malformed)?;
            if tokens[1].bytes().all(|b| b.is_ascii_digit()) {
                let second = parse_id(tokens[1]).map_err(malformed)?;
                for id in [first, second] {
                    if !g.contains(id) {
                        return Err(GraphError::UndeclaredNode { line, id });
                    }
                }
                g.edges.insert((first, second));
                seen_edge = true;
            } else {
                if seen_edge {
                    return Err(malformed("node line after edge lines".into()));
                }
                let label = Label::new(tokens[1]).map_err(|e| malformed(e.to_string()))?;
                if g.contains(first) {
                    return Err(GraphError::DuplicateNode { line, id: first });
                }
                g.nodes.insert(first, label);
            }
        }
        Ok(g)
    }

    /// Renders the edge-list format: node lines by id, then edge lines.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (id, label) in &self.nodes {
            out.push_str(&format!("{id} {label}\n"));
        }
        for (s, d) in &self.edges {
            out.push_str(&format!("{s} {d}\n"));
        }
        out
    }

    /// True iff `m` is a label- and edge-preserving bijection from `self`
    /// onto `other`. A map that is not total on `self` yields `false`.
    pub fn isomorphic_under_map(&self, other: &LabeledGraph, m: &HashMap<NodeId, NodeId>) -> bool {
        if self.node_count() != other.node_count() || self.edge_count() != other.edge_count() {
            return false;
        }
        let mut image = HashSet::with_capacity(self.node_count());
        for (id, label) in &self.nodes {
            let Some(&target) = m.get(id) else {
                return false;
            };
            if !image.insert(target) || other.label(target) != Some(label) {
                return false;
            }
        }
        // equal edge counts plus injectivity make the edge map onto
        self.edges.iter().all(|&(s, d)| other.has_edge(m[&s], m[&d]))
    }
}

fn parse_id(tok: &str) -> Result<NodeId, String> {
    match tok.parse::<NodeId>() {
        Ok(0) => Err("node id must be positive".into()),
        Ok(id) => Ok(id),
        Err(_) => Err(format!("`{tok}` is not a node id")),
    }
}

impl FromStr for LabeledGraph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LabeledGraph::parse(s)
    }
}
