//! Digram-replacement compression of a labeled graph into a grammar.
//!
//! A work edge remembers, for each endpoint, the label path that leads from
//! the work node down to the original node it was attached to. Two work
//! edges are occurrences of the same digram when both label paths agree
//! step by step. Replacing a digram creates a two-node rule `R => 1:x 2:y`,
//! records the defining edge once as `(R/1:…, R/2:…)` and collapses every
//! selected occurrence into a fresh `R` node; the other edges touching the
//! collapsed pair are re-pointed with their paths prefixed by `R/1:` or
//! `R/2:`.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;
use std::rc::Rc;

use rustc_hash::{FxHashMap, FxHashSet};
use thiserror::Error;

use crate::grammar::{GrammarPathSuffix, GraphGrammar, PathMap, Rule, Step};
use crate::graph::{Label, LabeledGraph, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompressError {
    #[error("cannot compress an empty graph")]
    EmptyGraph,
    #[error("digram {0} does not occur")]
    UnknownDigram(Digram),
    #[error("digram {digram} has only {count} non-overlapping occurrence(s)")]
    TooFewOccurrences { digram: Digram, count: usize },
    #[error("symbol {0} is already in use")]
    NameInUse(Label),
    #[error("minimum count must be at least 2, got {0}")]
    MinCount(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompressOptions {
    /// Stop once no digram has this many non-overlapping occurrences.
    pub min_count: usize,
}

impl Default for CompressOptions {
    fn default() -> Self {
        CompressOptions { min_count: 2 }
    }
}

/// A single-edge subgraph, identified by the label paths under its source
/// and destination nodes (a bare terminal for an uncompressed node).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Digram {
    pub src: GrammarPathSuffix,
    pub dst: GrammarPathSuffix,
}

impl Digram {
    pub fn new(src: GrammarPathSuffix, dst: GrammarPathSuffix) -> Self {
        Digram { src, dst }
    }

    pub fn parse(src: &str, dst: &str) -> Result<Self, crate::grammar::SuffixParseError> {
        Ok(Digram {
            src: src.parse()?,
            dst: dst.parse()?,
        })
    }
}

fn outermost_first(gps: &GrammarPathSuffix) -> impl Iterator<Item = (&str, u32)> {
    gps.steps()
        .iter()
        .map(|s| (s.rule.as_str(), s.ordinal))
        .chain(std::iter::once((gps.terminal().as_str(), 0)))
}

/// Lexicographic over the path steps read from the outermost rule inward,
/// source path first.
impl Ord for Digram {
    fn cmp(&self, other: &Self) -> Ordering {
        outermost_first(&self.src)
            .cmp(outermost_first(&other.src))
            .then_with(|| outermost_first(&self.dst).cmp(outermost_first(&other.dst)))
    }
}

impl PartialOrd for Digram {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Digram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.src, self.dst)
    }
}

impl fmt::Debug for Digram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

type Sym = u32;
type PathId = u32;
type Key = (PathId, PathId);
const ROOT: PathId = PathId::MAX;

#[derive(Debug, Clone, Copy)]
struct PathNode {
    /// `ROOT` for a bare terminal.
    parent: PathId,
    /// Rule of the outermost step, or the terminal.
    sym: Sym,
    ordinal: u32,
}

/// Interned label paths; a path is its outermost step plus the path below.
#[derive(Debug, Clone, Default)]
struct PathArena {
    nodes: Vec<PathNode>,
    intern: FxHashMap<(PathId, Sym, u32), PathId>,
}

impl PathArena {
    fn get_or_insert(&mut self, parent: PathId, sym: Sym, ordinal: u32) -> PathId {
        let next = self.nodes.len() as PathId;
        *self.intern.entry((parent, sym, ordinal)).or_insert_with(|| {
            self.nodes.push(PathNode { parent, sym, ordinal });
            next
        })
    }

    fn get(&self, parent: PathId, sym: Sym, ordinal: u32) -> Option<PathId> {
        self.intern.get(&(parent, sym, ordinal)).copied()
    }
}

#[derive(Debug, Clone)]
struct WorkNode {
    label: Sym,
    incident: Vec<u32>,
}

#[derive(Debug, Clone, Copy)]
struct WorkEdge {
    src: u32,
    src_path: PathId,
    dst: u32,
    dst_path: PathId,
    alive: bool,
}

#[derive(Debug, Clone, Copy)]
enum Origin {
    Leaf(NodeId),
    Pair(u32, u32),
}

/// A work edge with its label paths spelled out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkEdgeView {
    pub src: u32,
    pub src_path: GrammarPathSuffix,
    pub dst: u32,
    pub dst_path: GrammarPathSuffix,
}

/// Intermediate state of compression. Work nodes carry ordinals 1, 2, …
/// in creation order; replaced nodes disappear.
#[derive(Debug, Clone)]
pub struct WorkGraph {
    names: Vec<Label>,
    used: FxHashSet<Label>,
    terminal_count: usize,
    paths: PathArena,
    nodes: Vec<Option<WorkNode>>,
    origin: Vec<Origin>,
    edges: Vec<WorkEdge>,
    occ: FxHashMap<Key, BTreeSet<(u32, u32, u32)>>,
    rules: Vec<(Sym, Sym, Sym)>,
    rule_edges: Vec<Key>,
    mark: Vec<u32>,
    stamp: u32,
}

impl WorkGraph {
    pub fn new(g: &LabeledGraph) -> Self {
        let names: Vec<Label> = g.alphabet().into_iter().collect();
        let sym_of: FxHashMap<&Label, Sym> = names.iter().enumerate().map(|(i, l)| (l, i as Sym)).collect();
        let mut paths = PathArena::default();
        for s in 0..names.len() as Sym {
            paths.get_or_insert(ROOT, s, 0);
        }
        let mut index = FxHashMap::default();
        let mut nodes = Vec::with_capacity(g.node_count());
        let mut origin = Vec::with_capacity(g.node_count());
        for (pos, (id, label)) in g.nodes().enumerate() {
            index.insert(id, pos as u32);
            nodes.push(Some(WorkNode {
                label: sym_of[label],
                incident: Vec::new(),
            }));
            origin.push(Origin::Leaf(id));
        }
        let mut wg = WorkGraph {
            used: names.iter().cloned().collect(),
            terminal_count: names.len(),
            names,
            paths,
            mark: vec![0; nodes.len()],
            nodes,
            origin,
            edges: Vec::with_capacity(g.edge_count()),
            occ: FxHashMap::default(),
            rules: Vec::new(),
            rule_edges: Vec::new(),
            stamp: 0,
        };
        for (s, d) in g.edges() {
            let (src, dst) = (index[&s], index[&d]);
            // bare terminal paths were interned first, so their ids are the symbols
            let src_path = wg.node(src).label;
            let dst_path = wg.node(dst).label;
            let eid = wg.edges.len() as u32;
            wg.edges.push(WorkEdge {
                src,
                src_path,
                dst,
                dst_path,
                alive: true,
            });
            wg.nodes[src as usize].as_mut().unwrap().incident.push(eid);
            if dst != src {
                wg.nodes[dst as usize].as_mut().unwrap().incident.push(eid);
                wg.occ.entry((src_path, dst_path)).or_default().insert((src, dst, eid));
            }
        }
        wg
    }

    fn node(&self, v: u32) -> &WorkNode {
        self.nodes[v as usize].as_ref().expect("live work node")
    }

    /// Label of the node a path hangs under.
    fn head(&self, p: PathId) -> Sym {
        self.paths.nodes[p as usize].sym
    }

    fn path_suffix(&self, mut p: PathId) -> GrammarPathSuffix {
        let mut steps = Vec::new();
        loop {
            let n = self.paths.nodes[p as usize];
            if n.parent == ROOT {
                return GrammarPathSuffix::new(steps, self.names[n.sym as usize].clone());
            }
            steps.push(Step::new(self.names[n.sym as usize].clone(), n.ordinal));
            p = n.parent;
        }
    }

    fn path_tokens(&self, mut p: PathId) -> Vec<(Label, u32)> {
        let mut out = Vec::new();
        loop {
            let n = self.paths.nodes[p as usize];
            out.push((self.names[n.sym as usize].clone(), n.ordinal));
            if n.parent == ROOT {
                return out;
            }
            p = n.parent;
        }
    }

    fn lookup_path(&self, gps: &GrammarPathSuffix) -> Option<PathId> {
        let term = self.names[..self.terminal_count]
            .iter()
            .position(|l| l == gps.terminal())? as Sym;
        let mut p = self.paths.get(ROOT, term, 0)?;
        for step in gps.steps().iter().rev() {
            let sym = self.names.iter().position(|l| l == &step.rule)? as Sym;
            p = self.paths.get(p, sym, step.ordinal)?;
        }
        Some(p)
    }

    fn digram_of(&self, key: Key) -> Digram {
        Digram {
            src: self.path_suffix(key.0),
            dst: self.path_suffix(key.1),
        }
    }

    /// Live nodes as `(ordinal, label)` in ordinal order.
    pub fn nodes(&self) -> Vec<(u32, Label)> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.as_ref().map(|n| (i as u32 + 1, self.names[n.label as usize].clone())))
            .collect()
    }

    /// Live work edges with ordinals, ascending by `(src, dst)`.
    pub fn edges(&self) -> Vec<WorkEdgeView> {
        let mut out: Vec<WorkEdgeView> = self
            .edges
            .iter()
            .filter(|e| e.alive)
            .map(|e| WorkEdgeView {
                src: e.src + 1,
                src_path: self.path_suffix(e.src_path),
                dst: e.dst + 1,
                dst_path: self.path_suffix(e.dst_path),
            })
            .collect();
        out.sort_by_key(|o| (o.src, o.dst));
        out
    }

    /// Rules created so far, in creation order.
    pub fn rules(&self) -> Vec<Rule> {
        self.rules
            .iter()
            .map(|&(name, a, b)| {
                Rule::new(
                    self.names[name as usize].clone(),
                    vec![(1, self.names[a as usize].clone()), (2, self.names[b as usize].clone())],
                )
            })
            .collect()
    }

    /// Rule-anchored EDGES pairs created so far.
    pub fn rule_edges(&self) -> Vec<(GrammarPathSuffix, GrammarPathSuffix)> {
        self.rule_edges
            .iter()
            .map(|&(l, r)| (self.path_suffix(l), self.path_suffix(r)))
            .collect()
    }

    /// Rule bodies plus rule EDGES plus live nodes and edges.
    pub fn size(&self) -> usize {
        2 * self.rules.len()
            + self.rule_edges.len()
            + self.nodes.iter().filter(|n| n.is_some()).count()
            + self.edges.iter().filter(|e| e.alive).count()
    }

    /// Greedy node-disjoint occurrences of `key` in ascending `(src, dst)`.
    fn select(&mut self, key: Key) -> Vec<(u32, u32, u32)> {
        let Some(list) = self.occ.get(&key) else {
            return Vec::new();
        };
        self.stamp += 1;
        let stamp = self.stamp;
        let mut chosen = Vec::new();
        for &(s, d, e) in list {
            if self.mark[s as usize] != stamp && self.mark[d as usize] != stamp {
                self.mark[s as usize] = stamp;
                self.mark[d as usize] = stamp;
                chosen.push((s, d, e));
            }
        }
        chosen
    }

    fn count(&mut self, key: Key) -> usize {
        let Some(list) = self.occ.get(&key) else {
            return 0;
        };
        self.stamp += 1;
        let stamp = self.stamp;
        let mut n = 0;
        for &(s, d, _) in list {
            if self.mark[s as usize] != stamp && self.mark[d as usize] != stamp {
                self.mark[s as usize] = stamp;
                self.mark[d as usize] = stamp;
                n += 1;
            }
        }
        n
    }

    /// Non-overlapping occurrence count of every digram present.
    pub fn digram_census(&mut self) -> BTreeMap<Digram, usize> {
        let keys: Vec<Key> = self.occ.keys().copied().collect();
        keys.into_iter().map(|k| (self.digram_of(k), self.count(k))).collect()
    }

    /// Replaces every greedily selected occurrence of `d` by a fresh node
    /// labeled `fresh`.
    pub fn replace_digram(&mut self, d: &Digram, fresh: Label) -> Result<(), CompressError> {
        let key = match (self.lookup_path(&d.src), self.lookup_path(&d.dst)) {
            (Some(a), Some(b)) if self.occ.contains_key(&(a, b)) => (a, b),
            _ => return Err(CompressError::UnknownDigram(d.clone())),
        };
        let count = self.count(key);
        if count < 2 {
            return Err(CompressError::TooFewOccurrences {
                digram: d.clone(),
                count,
            });
        }
        if self.used.contains(&fresh) {
            return Err(CompressError::NameInUse(fresh));
        }
        let sym = self.add_symbol(fresh);
        let selection = self.select(key);
        self.apply(key, sym, &selection, &mut Vec::new());
        Ok(())
    }

    fn add_symbol(&mut self, name: Label) -> Sym {
        self.used.insert(name.clone());
        self.names.push(name);
        (self.names.len() - 1) as Sym
    }

    fn fresh_name(&self, counter: &mut usize) -> Label {
        loop {
            *counter += 1;
            let name = Label::new(&format!("R{counter}")).unwrap();
            if !self.used.contains(&name) {
                return name;
            }
        }
    }

    fn detach(&mut self, eid: u32, dirty: &mut Vec<Key>) {
        let e = self.edges[eid as usize];
        if e.src != e.dst {
            let key = (e.src_path, e.dst_path);
            let list = self.occ.get_mut(&key).unwrap();
            list.remove(&(e.src, e.dst, eid));
            if list.is_empty() {
                self.occ.remove(&key);
            }
            dirty.push(key);
        }
    }

    fn attach(&mut self, eid: u32, dirty: &mut Vec<Key>) {
        let e = self.edges[eid as usize];
        if e.src != e.dst {
            let key = (e.src_path, e.dst_path);
            self.occ.entry(key).or_default().insert((e.src, e.dst, eid));
            dirty.push(key);
        }
    }

    fn apply(&mut self, key: Key, sym: Sym, selection: &[(u32, u32, u32)], dirty: &mut Vec<Key>) {
        self.rules.push((sym, self.head(key.0), self.head(key.1)));
        let left = self.paths.get_or_insert(key.0, sym, 1);
        let right = self.paths.get_or_insert(key.1, sym, 2);
        self.rule_edges.push((left, right));

        for &(v1, v2, defining) in selection {
            let n = self.nodes.len() as u32;
            self.detach(defining, dirty);
            self.edges[defining as usize].alive = false;

            let a = self.nodes[v1 as usize].take().unwrap();
            let b = self.nodes[v2 as usize].take().unwrap();
            self.stamp += 1;
            let stamp = self.stamp;
            self.mark.push(0);
            let mut incident = Vec::with_capacity(a.incident.len() + b.incident.len());
            for eid in a.incident.into_iter().chain(b.incident) {
                let e = self.edges[eid as usize];
                if !e.alive || self.mark_edge(eid, stamp) {
                    continue;
                }
                self.detach(eid, dirty);
                let e = &mut self.edges[eid as usize];
                for (end, path) in [(&mut e.src, &mut e.src_path), (&mut e.dst, &mut e.dst_path)] {
                    let port = if *end == v1 {
                        1
                    } else if *end == v2 {
                        2
                    } else {
                        continue;
                    };
                    *end = n;
                    *path = self.paths.get_or_insert(*path, sym, port);
                }
                self.attach(eid, dirty);
                incident.push(eid);
            }
            self.nodes.push(Some(WorkNode { label: sym, incident }));
            self.origin.push(Origin::Pair(v1, v2));
        }
    }

    /// Edge dedup while merging; reuses the node-mark scratch space keyed
    /// past the node range.
    fn mark_edge(&mut self, eid: u32, stamp: u32) -> bool {
        let slot = self.nodes.len() + 1 + eid as usize;
        if self.mark.len() <= slot {
            self.mark.resize(slot + 1, 0);
        }
        let seen = self.mark[slot] == stamp;
        self.mark[slot] = stamp;
        seen
    }

    /// Emits the start rule from the surviving nodes and returns the
    /// grammar with the map from full grammar paths to original node ids.
    pub fn into_grammar(self) -> (GraphGrammar, PathMap) {
        let mut start = Label::new("S").unwrap();
        let mut k = 0;
        while self.used.contains(&start) {
            start = Label::new(&format!("S{k}")).unwrap();
            k += 1;
        }
        let survivors: Vec<u32> = (0..self.nodes.len() as u32)
            .filter(|&v| self.nodes[v as usize].is_some())
            .collect();
        let mut ordinal = vec![0u32; self.nodes.len()];
        let mut body = Vec::with_capacity(survivors.len());
        for (i, &v) in survivors.iter().enumerate() {
            ordinal[v as usize] = i as u32 + 1;
            body.push((i as u32 + 1, self.names[self.node(v).label as usize].clone()));
        }

        let mut rules = self.rules();
        rules.push(Rule::new(start.clone(), body));

        let mut edges = self.rule_edges();
        let mut top: Vec<&WorkEdge> = self.edges.iter().filter(|e| e.alive).collect();
        top.sort_by_key(|e| (ordinal[e.src as usize], ordinal[e.dst as usize], e.src_path, e.dst_path));
        for e in top {
            let l = self
                .path_suffix(e.src_path)
                .prepend(Step::new(start.clone(), ordinal[e.src as usize]));
            let r = self
                .path_suffix(e.dst_path)
                .prepend(Step::new(start.clone(), ordinal[e.dst as usize]));
            edges.push((l, r));
        }

        let mut ids = Vec::new();
        let mut stack = Vec::new();
        for &v in &survivors {
            stack.push(v);
            while let Some(w) = stack.pop() {
                match self.origin[w as usize] {
                    Origin::Leaf(id) => ids.push(id),
                    Origin::Pair(a, b) => {
                        stack.push(b);
                        stack.push(a);
                    }
                }
            }
        }

        let gg = GraphGrammar {
            terminals: self.names[..self.terminal_count].iter().cloned().collect(),
            start,
            rules,
            edges,
        };
        (gg, PathMap::from_ids(ids))
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct KeyOrder(Vec<(Label, u32)>, Vec<(Label, u32)>);

/// Repeatedly replaces the digram with the most non-overlapping occurrences
/// (ties: smallest digram) until none reaches `opts.min_count`.
pub fn compress(g: &LabeledGraph, opts: CompressOptions) -> Result<(GraphGrammar, PathMap), CompressError> {
    if g.is_empty() {
        return Err(CompressError::EmptyGraph);
    }
    if opts.min_count < 2 {
        return Err(CompressError::MinCount(opts.min_count));
    }
    let mut wg = WorkGraph::new(g);
    let mut counts: FxHashMap<Key, usize> = FxHashMap::default();
    let mut heap: BinaryHeap<(usize, Reverse<Rc<KeyOrder>>, Key)> = BinaryHeap::new();
    let mut order_cache: FxHashMap<Key, Rc<KeyOrder>> = FxHashMap::default();

    let mut push = |wg: &WorkGraph, heap: &mut BinaryHeap<_>, key: Key, count: usize| {
        let ord = order_cache
            .entry(key)
            .or_insert_with(|| Rc::new(KeyOrder(wg.path_tokens(key.0), wg.path_tokens(key.1))))
            .clone();
        heap.push((count, Reverse(ord), key));
    };

    let mut keys: Vec<Key> = wg.occ.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        let c = wg.count(key);
        counts.insert(key, c);
        if c >= opts.min_count {
            push(&wg, &mut heap, key, c);
        }
    }

    let mut counter = 0usize;
    let mut dirty = Vec::new();
    let mut seen: FxHashSet<Key> = FxHashSet::default();
    while let Some((count, _, key)) = heap.pop() {
        if counts.get(&key) != Some(&count) {
            continue;
        }
        let selection = wg.select(key);
        debug_assert_eq!(selection.len(), count);
        let name = wg.fresh_name(&mut counter);
        let sym = wg.add_symbol(name);
        dirty.clear();
        wg.apply(key, sym, &selection, &mut dirty);

        seen.clear();
        for &k in &dirty {
            if !seen.insert(k) {
                continue;
            }
            let c = wg.count(k);
            let old = counts.insert(k, c).unwrap_or(0);
            if c == 0 {
                counts.remove(&k);
            } else if c != old && c >= opts.min_count {
                push(&wg, &mut heap, k, c);
            }
        }
    }
    Ok(wg.into_grammar())
}

/// Sizes of a graph and its grammar: `|OG| = |V| + |E|`,
/// `|GG| = Σ |body| + |EDGES|`, `ratio = |GG| / |OG|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeMetrics {
    pub nodes: usize,
    pub edges: usize,
    pub original_size: usize,
    pub grammar_size: usize,
    pub ratio: f64,
}

impl SizeMetrics {
    pub fn new(g: &LabeledGraph, gg: &GraphGrammar) -> Self {
        let original_size = g.node_count() + g.edge_count();
        let grammar_size = gg.size();
        SizeMetrics {
            nodes: g.node_count(),
            edges: g.edge_count(),
            original_size,
            grammar_size,
            ratio: grammar_size as f64 / original_size.max(1) as f64,
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::grammar::model::tests::sample_gg;
    use crate::graph::tests::sample;

    fn label(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    fn census(wg: &mut WorkGraph) -> Vec<(String, usize)> {
        wg.digram_census()
            .into_iter()
            .map(|(d, c)| (d.to_string(), c))
            .collect()
    }

    #[test]
    fn census_sample() {
        let mut wg = WorkGraph::new(&sample());
        assert_eq!(
            census(&mut wg),
            vec![
                ("(b, c)".to_string(), 1),
                ("(c, d)".to_string(), 4),
                ("(d, c)".to_string(), 2)
            ]
        );
    }

    #[test]
    fn census_excludes_self_loops() {
        let g = LabeledGraph::parse("1 a\n1 1\n").unwrap();
        assert!(WorkGraph::new(&g).digram_census().is_empty());
    }

    #[test]
    fn census_overlap_in_chain() {
        let g = LabeledGraph::parse("1 a\n2 a\n3 a\n1 2\n2 3\n").unwrap();
        assert_eq!(census(&mut WorkGraph::new(&g)), vec![("(a, a)".to_string(), 1)]);
    }

    #[test]
    fn sample_steps() {
        let mut wg = WorkGraph::new(&sample());
        wg.replace_digram(&Digram::parse("c", "d").unwrap(), label("CD"))
            .unwrap();
        assert_eq!(
            wg.rules(),
            vec![Rule::new(label("CD"), vec![(1, label("c")), (2, label("d"))])]
        );
        assert_eq!(wg.rule_edges()[0].0.to_string(), "CD/1:c");
        assert_eq!(wg.rule_edges()[0].1.to_string(), "CD/2:d");
        let c = census(&mut wg);
        assert!(c.contains(&("(CD/2:d, CD/1:c)".to_string(), 2)), "{c:?}");

        wg.replace_digram(&Digram::parse("CD/2:d", "CD/1:c").unwrap(), label("CDCD"))
            .unwrap();
        let (l, r) = &wg.rule_edges()[1];
        assert_eq!(
            (l.to_string(), r.to_string()),
            ("CDCD/1:CD/2:d".into(), "CDCD/2:CD/1:c".into())
        );
        assert_eq!(wg.nodes().len(), 3);
        let views = wg.edges();
        assert_eq!(views.len(), 2);
        assert!(views.iter().any(|e| e.src == e.dst));
    }

    #[test]
    fn replace_rejects_single_occurrence_and_reused_names() {
        let mut wg = WorkGraph::new(&sample());
        let err = wg
            .replace_digram(&Digram::parse("b", "c").unwrap(), label("X"))
            .unwrap_err();
        assert!(matches!(err, CompressError::TooFewOccurrences { count: 1, .. }));
        let err = wg
            .replace_digram(&Digram::parse("c", "d").unwrap(), label("c"))
            .unwrap_err();
        assert_eq!(err, CompressError::NameInUse(label("c")));
        let err = wg
            .replace_digram(&Digram::parse("d", "b").unwrap(), label("X"))
            .unwrap_err();
        assert!(matches!(err, CompressError::UnknownDigram(_)));
    }

    #[test]
    fn compress_sample_matches_expected_shape() {
        let (gg, map) = compress(&sample(), CompressOptions::default()).unwrap();
        assert_eq!(gg.validate(), vec![]);
        assert_eq!(gg.rules.len(), 3);
        assert_eq!(gg.rules[0].body, vec![(1, label("c")), (2, label("d"))]);
        assert_eq!(gg.rules[1].body, vec![(1, label("R1")), (2, label("R1"))]);
        let mut start: Vec<String> = gg
            .start_rule()
            .unwrap()
            .body
            .iter()
            .map(|(_, l)| l.to_string())
            .collect();
        start.sort();
        assert_eq!(start, vec!["R2", "R2", "b"]);
        assert_eq!(gg.edges.len(), 4);
        assert_eq!(gg.size(), sample_gg().size());

        let (back, _) = gg.decompress().unwrap();
        let m: HashMap<_, _> = map.to_hash_map();
        let inverse: HashMap<_, _> = m.iter().map(|(&k, &v)| (v, k)).collect();
        assert!(sample().isomorphic_under_map(&back, &inverse));
    }

    #[test]
    fn incompressible_graph() {
        let g = LabeledGraph::parse("1 a\n2 b\n3 c\n1 2\n2 3\n").unwrap();
        let (gg, map) = compress(&g, CompressOptions::default()).unwrap();
        assert_eq!(gg.rules.len(), 1);
        let (back, _) = gg.decompress().unwrap();
        assert_eq!(back, g);
        assert_eq!(map, PathMap::identity(3));
    }

    #[test]
    fn smallest_compressible_case() {
        let g = LabeledGraph::parse("1 a\n2 b\n3 a\n4 b\n1 2\n3 4\n").unwrap();
        let (gg, _) = compress(&g, CompressOptions::default()).unwrap();
        assert_eq!(
            gg.to_text(),
            "TERMINALS a b\nSTART S\nRULE R1 => 1:a 2:b\nRULE S => 1:R1 2:R1\nEDGE R1/1:a R1/2:b\n"
        );
    }

    #[test]
    fn fresh_names_avoid_labels() {
        let g = LabeledGraph::parse("1 R1\n2 S\n3 R1\n4 S\n1 2\n3 4\n").unwrap();
        let (gg, _) = compress(&g, CompressOptions::default()).unwrap();
        assert_eq!(gg.validate(), vec![]);
        assert_eq!(gg.rules[0].name.as_str(), "R2");
        assert_eq!(gg.start.as_str(), "S0");
    }

    #[test]
    fn rejects_empty_and_bad_threshold() {
        assert_eq!(
            compress(&LabeledGraph::new(), CompressOptions::default()),
            Err(CompressError::EmptyGraph)
        );
        assert_eq!(
            compress(&sample(), CompressOptions { min_count: 1 }),
            Err(CompressError::MinCount(1))
        );
    }

    #[test]
    fn size_metrics_sample() {
        let m = SizeMetrics::new(&sample(), &sample_gg());
        assert_eq!((m.nodes, m.edges, m.original_size, m.grammar_size), (9, 8, 17, 11));
        assert!((m.ratio - 11.0 / 17.0).abs() < 1e-12);

        let one = GraphGrammar::parse("TERMINALS a\nSTART S\nRULE S => 1:a\n").unwrap();
        assert_eq!(one.size(), 1);
    }
}
