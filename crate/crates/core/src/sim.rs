//! Simulation of a pattern over a grammar-compressed graph.
//!
//! Candidate sets are sets of grammar path suffixes. Suffixes are interned
//! in a trie whose parent links drop the outermost step, so "`a` is a suffix
//! of `b`" is "`a` is an ancestor-or-self of `b`" and one-step extensions
//! are children.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::grammar::{GrammarError, GrammarIndex, GrammarPathSuffix, GraphGrammar, Step, SuffixSet, Sym};
use crate::graph::{Label, NodeId, PatternGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error("pattern has no nodes")]
    EmptyPattern,
    #[error("graph has no nodes")]
    EmptyGraph,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimOptions {
    /// Memoized predecessor computation and intersection-based sharpening
    /// instead of the reference difference-based loop.
    pub optimized: bool,
}

/// Pattern nodes in ascending id order with their in-neighbours.
#[derive(Debug, Clone)]
pub(crate) struct PatternIndex {
    pub ids: Vec<NodeId>,
    pub labels: Vec<Label>,
    /// `preds[u]` lists every `u'` with a pattern edge `(u', u)`.
    pub preds: Vec<Vec<usize>>,
}

impl PatternIndex {
    pub fn new(q: &PatternGraph) -> Result<Self, SimError> {
        if q.is_empty() {
            return Err(SimError::EmptyPattern);
        }
        let ids: Vec<NodeId> = q.node_ids().collect();
        let labels = q.nodes().map(|(_, l)| l.clone()).collect();
        let pos: FxHashMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut preds = vec![Vec::new(); ids.len()];
        for (s, d) in q.edges() {
            preds[pos[&d]].push(pos[&s]);
        }
        Ok(PatternIndex { ids, labels, preds })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }
}

/// Pattern-node-wise candidate suffixes; empty when no simulation exists.
/// Suffixes are kept as nodes of a trie holding just them and their
/// ancestors, and are spelled out on request.
#[derive(Debug, Clone, Default)]
pub struct SimResult {
    names: Arc<[Label]>,
    nodes: Vec<TrieNode>,
    sets: BTreeMap<NodeId, Vec<Sid>>,
}

impl SimResult {
    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Number of suffixes over all pattern nodes.
    pub fn len(&self) -> usize {
        self.sets.values().map(Vec::len).sum()
    }

    fn suffix(&self, mut s: Sid) -> GrammarPathSuffix {
        let mut steps = Vec::new();
        loop {
            let n = self.nodes[s as usize];
            if n.parent == NONE {
                return GrammarPathSuffix::new(steps, self.names[n.sym as usize].clone());
            }
            steps.push(Step::new(self.names[n.sym as usize].clone(), n.ordinal));
            s = n.parent;
        }
    }

    pub fn get(&self, u: NodeId) -> Option<SuffixSet> {
        self.sets
            .get(&u)
            .map(|ids| ids.iter().map(|&s| self.suffix(s)).collect())
    }

    pub fn sets(&self) -> BTreeMap<NodeId, SuffixSet> {
        self.sets.keys().map(|&u| (u, self.get(u).unwrap())).collect()
    }

    /// `(u, gps)` pairs ordered by pattern node, then suffix.
    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, GrammarPathSuffix)> + '_ {
        self.sets
            .keys()
            .flat_map(|&u| self.get(u).unwrap().into_iter().map(move |g| (u, g)))
    }

    /// `{ (u, v) | (u, gps) ∈ self, v ∈ rep(gps) }` grouped by `u`.
    pub fn expand(&self, idx: &GrammarIndex) -> Result<BTreeMap<NodeId, BTreeSet<NodeId>>, GrammarError> {
        let mut out = BTreeMap::new();
        for (&u, ids) in &self.sets {
            let mut nodes = BTreeSet::new();
            for &s in ids {
                nodes.extend(idx.rep(&self.suffix(s))?);
            }
            out.insert(u, nodes);
        }
        Ok(out)
    }
}

impl PartialEq for SimResult {
    fn eq(&self, other: &Self) -> bool {
        self.sets() == other.sets()
    }
}

impl Eq for SimResult {}

type Sid = u32;
const NONE: Sid = Sid::MAX;

#[derive(Debug, Clone, Copy)]
struct TrieNode {
    /// Suffix without its outermost step; `NONE` for a bare terminal.
    parent: Sid,
    /// First label: rule of the outermost step, or the terminal.
    sym: Sym,
    ordinal: u32,
}

#[derive(Debug, Clone, Default)]
struct Trie {
    nodes: Vec<TrieNode>,
    intern: FxHashMap<(Sid, Sym, u32), Sid>,
}

impl Trie {
    fn get_or_insert(&mut self, parent: Sid, sym: Sym, ordinal: u32) -> Sid {
        let next = self.nodes.len() as Sid;
        *self.intern.entry((parent, sym, ordinal)).or_insert_with(|| {
            self.nodes.push(TrieNode { parent, sym, ordinal });
            next
        })
    }

    fn node(&self, s: Sid) -> TrieNode {
        self.nodes[s as usize]
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }
}

/// A shared base trie plus suffixes created during one query, numbered
/// after the base ones.
#[derive(Debug, Clone)]
struct Overlay<'a> {
    base: &'a Trie,
    local: Trie,
}

impl<'a> Overlay<'a> {
    fn new(base: &'a Trie) -> Self {
        Overlay {
            base,
            local: Trie::default(),
        }
    }

    fn get_or_insert(&mut self, parent: Sid, sym: Sym, ordinal: u32) -> Sid {
        if let Some(&s) = self.base.intern.get(&(parent, sym, ordinal)) {
            return s;
        }
        self.base.len() as Sid + self.local.get_or_insert(parent, sym, ordinal)
    }

    fn node(&self, s: Sid) -> TrieNode {
        let n = self.base.len();
        if (s as usize) < n {
            self.base.nodes[s as usize]
        } else {
            self.local.nodes[s as usize - n]
        }
    }
}

trait Intern {
    fn get_or_insert(&mut self, parent: Sid, sym: Sym, ordinal: u32) -> Sid;
}

impl Intern for Trie {
    fn get_or_insert(&mut self, parent: Sid, sym: Sym, ordinal: u32) -> Sid {
        Trie::get_or_insert(self, parent, sym, ordinal)
    }
}

impl Intern for Overlay<'_> {
    fn get_or_insert(&mut self, parent: Sid, sym: Sym, ordinal: u32) -> Sid {
        Overlay::get_or_insert(self, parent, sym, ordinal)
    }
}

/// Rows of suffix ids stored back to back.
#[derive(Debug, Clone)]
struct Rows {
    start: Vec<u32>,
    data: Vec<Sid>,
}

impl Default for Rows {
    fn default() -> Self {
        Rows {
            start: vec![0],
            data: Vec::new(),
        }
    }
}

impl Rows {
    fn get(&self, i: Sid) -> &[Sid] {
        let i = i as usize;
        match (self.start.get(i), self.start.get(i + 1)) {
            (Some(&a), Some(&b)) => &self.data[a as usize..b as usize],
            _ => &[],
        }
    }

    fn close_row(&mut self) {
        self.start.push(self.data.len() as u32);
    }
}

/// A grammar compiled for simulation: symbol index plus the EDGES pairs
/// interned and indexed by their right-hand suffix.
#[derive(Debug, Clone)]
pub struct SimIndex {
    idx: GrammarIndex,
    trie: Trie,
    /// Left suffixes of pairs whose right suffix is exactly this one.
    by_right: Rows,
    /// Left suffixes of pairs whose right suffix is a descendant-or-self.
    below: Rows,
    /// `inherited(x) = by_right(x) ∪ { step(x) ⊕ y | y ∈ inherited(parent(x)) }`.
    inherited: Rows,
    /// `below(x) ∪ inherited(x)`, reduced.
    pre: Rows,
}

impl SimIndex {
    pub fn new(gg: &GraphGrammar) -> Result<Self, GrammarError> {
        Ok(Self::from_index(GrammarIndex::new(gg)?))
    }

    pub fn from_index(idx: GrammarIndex) -> Self {
        let mut trie = Trie::default();
        for t in idx.terminals() {
            trie.get_or_insert(NONE, t, 0);
        }
        let mut pairs = Vec::with_capacity(idx.edges().len());
        for (l, r) in idx.edges() {
            let l = intern_valid(&mut trie, &idx, l);
            let r = intern_valid(&mut trie, &idx, r);
            pairs.push((l, r));
        }
        let n = trie.len();
        let mut below = vec![Vec::new(); n];
        let mut by_right = vec![Vec::new(); n];
        for &(l, r) in &pairs {
            by_right[r as usize].push(l);
            let mut a = r;
            while a != NONE {
                below[a as usize].push(l);
                a = trie.node(a).parent;
            }
        }
        let to_rows = |lists: Vec<Vec<Sid>>| {
            let mut rows = Rows::default();
            for mut list in lists {
                list.sort_unstable();
                list.dedup();
                rows.data.extend_from_slice(&list);
                rows.close_row();
            }
            rows
        };
        let by_right = to_rows(by_right);
        let below = to_rows(below);

        let mut inherited = Rows::default();
        let mut row = Vec::new();
        for x in 0..n as Sid {
            let node = trie.node(x);
            row.clear();
            row.extend_from_slice(by_right.get(x));
            if node.parent != NONE {
                for &y in inherited.get(node.parent) {
                    row.push(trie.get_or_insert(y, node.sym, node.ordinal));
                }
            }
            row.sort_unstable();
            row.dedup();
            inherited.data.extend_from_slice(&row);
            inherited.close_row();
        }

        let mut pre = Rows::default();
        let mut cover = Cover::default();
        for x in 0..n as Sid {
            row.clear();
            row.extend_from_slice(below.get(x));
            row.extend_from_slice(inherited.get(x));
            reduce(&trie, &mut cover, &mut row);
            pre.data.extend_from_slice(&row);
            pre.close_row();
        }
        SimIndex {
            idx,
            trie,
            by_right,
            below,
            inherited,
            pre,
        }
    }

    pub fn grammar(&self) -> &GrammarIndex {
        &self.idx
    }

    /// Suffixes with precomputed rows.
    fn indexed(&self) -> usize {
        self.pre.start.len() - 1
    }
}

trait Nodes {
    fn parent_of(&self, s: Sid) -> Sid;
}

impl Nodes for Trie {
    fn parent_of(&self, s: Sid) -> Sid {
        self.node(s).parent
    }
}

impl Nodes for Overlay<'_> {
    fn parent_of(&self, s: Sid) -> Sid {
        self.node(s).parent
    }
}

/// Deduplicates and drops elements subsumed by another element, keeping
/// the order of the rest.
fn reduce(trie: &impl Nodes, cover: &mut Cover, v: &mut Vec<Sid>) {
    cover.clear();
    v.retain(|&s| {
        if cover.is_marked(s) {
            return false;
        }
        cover.mark(s);
        true
    });
    v.retain(|&s| !cover.covered(trie, trie.parent_of(s)));
}

/// Interns a suffix already known to be valid.
fn intern_valid(trie: &mut impl Intern, idx: &GrammarIndex, gps: &GrammarPathSuffix) -> Sid {
    let term = idx.symbol(gps.terminal()).expect("valid suffix");
    let mut s = trie.get_or_insert(NONE, term, 0);
    for step in gps.steps().iter().rev() {
        let rule = idx.symbol(&step.rule).expect("valid suffix");
        s = trie.get_or_insert(s, rule, step.ordinal);
    }
    s
}

/// Generation-stamped membership flags over suffix ids.
#[derive(Debug, Clone, Default)]
struct Marks {
    stamp: u32,
    flags: Vec<u32>,
}

impl Marks {
    fn clear(&mut self) {
        self.stamp += 1;
    }

    fn set(&mut self, s: Sid) {
        let i = s as usize;
        if i >= self.flags.len() {
            self.flags.resize(i + 1 + self.flags.len() / 2, 0);
        }
        self.flags[i] = self.stamp;
    }

    fn get(&self, s: Sid) -> bool {
        self.flags.get(s as usize) == Some(&self.stamp)
    }
}

/// Marked suffixes plus a memo of which suffixes have a marked
/// ancestor-or-self, valid until the next `clear`. Each suffix has one
/// word: the generation in the high bits, its state in the low two.
#[derive(Debug, Clone, Default)]
struct Cover {
    generation: u32,
    words: Vec<u32>,
}

const UNKNOWN: u32 = 0;
const CLEAR: u32 = 1;
const HIT: u32 = 2;
const MARKED: u32 = 3;

impl Cover {
    fn clear(&mut self) {
        self.generation = self.generation.wrapping_add(4);
        if self.generation == 0 {
            self.words.fill(0);
        }
    }

    #[inline]
    fn state(&self, s: Sid) -> u32 {
        match self.words.get(s as usize) {
            Some(&w) if w & !3 == self.generation => w & 3,
            _ => UNKNOWN,
        }
    }

    #[inline]
    fn put(&mut self, s: Sid, state: u32) {
        let i = s as usize;
        if i >= self.words.len() {
            self.words.resize(i + 1 + self.words.len() / 2, 0);
        }
        self.words[i] = self.generation | state;
    }

    fn mark(&mut self, s: Sid) {
        self.put(s, MARKED);
    }

    fn is_marked(&self, s: Sid) -> bool {
        self.state(s) == MARKED
    }

    /// Whether `s` or one of its ancestors is marked.
    #[inline]
    fn covered(&mut self, trie: &impl Nodes, s: Sid) -> bool {
        let mut stop = s;
        let hit = loop {
            if stop == NONE {
                break false;
            }
            match self.state(stop) {
                UNKNOWN => stop = trie.parent_of(stop),
                state => break state != CLEAR,
            }
        };
        let state = if hit { HIT } else { CLEAR };
        let mut a = s;
        while a != stop {
            self.put(a, state);
            a = trie.parent_of(a);
        }
        hit
    }
}

/// Suffix-set operations over one grammar. New suffixes created by splits
/// are interned on the fly, so the algebra owns a growing copy of the trie.
#[derive(Debug, Clone)]
pub struct SuffixAlgebra<'a> {
    ix: &'a SimIndex,
    trie: Overlay<'a>,
    /// `inherited` rows of suffixes created after indexing, as ranges of
    /// `local_data`.
    local: FxHashMap<Sid, (u32, u32)>,
    local_data: Vec<Sid>,
    cover: Cover,
    ancestors: Marks,
}

impl<'a> SuffixAlgebra<'a> {
    pub fn new(ix: &'a SimIndex) -> Self {
        SuffixAlgebra {
            ix,
            trie: Overlay::new(&ix.trie),
            local: FxHashMap::default(),
            local_data: Vec::new(),
            cover: Cover::default(),
            ancestors: Marks::default(),
        }
    }

    pub fn grammar(&self) -> &GrammarIndex {
        &self.ix.idx
    }

    fn intern(&mut self, gps: &GrammarPathSuffix) -> Result<Sid, GrammarError> {
        self.ix.idx.locate(gps)?;
        Ok(intern_valid(&mut self.trie, &self.ix.idx, gps))
    }

    fn intern_set(&mut self, set: &SuffixSet) -> Result<Vec<Sid>, GrammarError> {
        set.iter().map(|g| self.intern(g)).collect()
    }

    fn suffix(&self, mut s: Sid) -> GrammarPathSuffix {
        let idx = &self.ix.idx;
        let mut steps = Vec::new();
        loop {
            let n = self.trie.node(s);
            if n.parent == NONE {
                return GrammarPathSuffix::new(steps, idx.name(n.sym).clone());
            }
            steps.push(Step::new(idx.name(n.sym).clone(), n.ordinal));
            s = n.parent;
        }
    }

    fn to_set(&self, ids: &[Sid]) -> SuffixSet {
        ids.iter().map(|&s| self.suffix(s)).collect()
    }

    fn parent(&self, s: Sid) -> Sid {
        self.trie.node(s).parent
    }

    fn extend_into(&mut self, s: Sid, out: &mut Vec<Sid>) {
        let sym = self.trie.node(s).sym;
        for &(rule, ord) in self.ix.idx.occurrences(sym) {
            out.push(self.trie.get_or_insert(s, rule, ord));
        }
    }

    /// Direct and inherited predecessor suffixes of one suffix, unreduced.
    fn pre_of(&mut self, x: Sid, memo: bool, out: &mut Vec<Sid>) {
        if memo {
            if (x as usize) < self.ix.indexed() {
                out.extend_from_slice(self.ix.pre.get(x));
            } else {
                let (a, b) = self.local_inherited(x);
                out.extend_from_slice(&self.local_data[a as usize..b as usize]);
            }
            return;
        }
        out.extend_from_slice(self.ix.below.get(x));
        let mut steps: Vec<(Sym, u32)> = Vec::new();
        let mut a = x;
        while a != NONE {
            for &l in self.ix.by_right.get(a) {
                let mut cur = l;
                for &(rule, ord) in steps.iter().rev() {
                    cur = self.trie.get_or_insert(cur, rule, ord);
                }
                out.push(cur);
            }
            let n = self.trie.node(a);
            steps.push((n.sym, n.ordinal));
            a = n.parent;
        }
    }

    /// Range of `local_data` holding `inherited(x)` for an unindexed `x`.
    /// Unindexed suffixes have no pairs ending at them, so their row is
    /// their parent's row extended by one step.
    fn local_inherited(&mut self, x: Sid) -> (u32, u32) {
        if let Some(&r) = self.local.get(&x) {
            return r;
        }
        let n = self.trie.node(x);
        let mut row = Vec::new();
        if (n.parent as usize) < self.ix.indexed() {
            row.extend_from_slice(self.ix.inherited.get(n.parent));
        } else {
            let (a, b) = self.local_inherited(n.parent);
            row.extend_from_slice(&self.local_data[a as usize..b as usize]);
        }
        for y in &mut row {
            *y = self.trie.get_or_insert(*y, n.sym, n.ordinal);
        }
        let start = self.local_data.len() as u32;
        self.local_data.extend_from_slice(&row);
        let r = (start, self.local_data.len() as u32);
        self.local.insert(x, r);
        r
    }

    fn reduce(&mut self, mut v: Vec<Sid>) -> Vec<Sid> {
        reduce(&self.trie, &mut self.cover, &mut v);
        v
    }

    fn pre_ids(&mut self, set: &[Sid], memo: bool) -> Vec<Sid> {
        let mut out = Vec::new();
        for &x in set {
            self.pre_of(x, memo, &mut out);
        }
        self.reduce(out)
    }

    /// Deletes elements that have a suffix in `rem`, splits elements that
    /// are a proper suffix of something in `rem`, keeps the rest.
    fn delta_ids(&mut self, from: &[Sid], rem: &[Sid]) -> Vec<Sid> {
        if rem.is_empty() {
            let mut v = from.to_vec();
            v.sort_unstable();
            v.dedup();
            return v;
        }
        self.cover.clear();
        self.ancestors.clear();
        for &r in rem {
            self.cover.mark(r);
            let mut a = self.parent(r);
            while a != NONE && !self.ancestors.get(a) {
                self.ancestors.set(a);
                a = self.parent(a);
            }
        }
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for &x in from {
            if self.cover.covered(&self.trie, x) {
                continue;
            }
            stack.push(x);
            while let Some(e) = stack.pop() {
                if self.cover.is_marked(e) {
                    continue;
                }
                if self.ancestors.get(e) {
                    self.extend_into(e, &mut stack);
                } else {
                    out.push(e);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Suffixes representing `REP(a) ∩ REP(b)` for subsumption-free inputs,
    /// or `None` when that is `a` itself. Kept elements of `a` and the
    /// elements of `b` strictly below `a` are disjoint, so the output has no
    /// duplicates.
    fn intersect_ids(&mut self, a: &[Sid], b: &[Sid]) -> Option<Vec<Sid>> {
        let mut out = Vec::new();
        self.cover.clear();
        for &s in b {
            self.cover.mark(s);
        }
        out.extend(a.iter().copied().filter(|&s| self.cover.covered(&self.trie, s)));
        let kept = out.len();
        self.cover.clear();
        for &s in a {
            self.cover.mark(s);
        }
        out.extend(
            b.iter()
                .copied()
                .filter(|&s| self.cover.covered(&self.trie, self.trie.parent_of(s))),
        );
        (kept < a.len() || out.len() > kept).then_some(out)
    }

    /// Whether two duplicate-free id lists hold the same elements.
    fn same_elements(&mut self, a: &[Sid], b: &[Sid]) -> bool {
        if a.len() != b.len() {
            return false;
        }
        self.cover.clear();
        for &s in a {
            self.cover.mark(s);
        }
        b.iter().all(|&s| self.cover.is_marked(s))
    }

    /// Predecessor suffixes of one suffix, deduplicated but not reduced.
    pub fn pre_of_gps(&mut self, gps: &GrammarPathSuffix) -> Result<SuffixSet, GrammarError> {
        let x = self.intern(gps)?;
        let mut out = Vec::new();
        self.pre_of(x, false, &mut out);
        Ok(self.to_set(&out))
    }

    /// Subsumption-free suffixes representing the predecessors of `REP(set)`.
    pub fn pre(&mut self, set: &SuffixSet) -> Result<SuffixSet, GrammarError> {
        let ids = self.intern_set(set)?;
        let out = self.pre_ids(&ids, false);
        Ok(self.to_set(&out))
    }

    /// Suffixes representing `REP(from) ∖ REP(rem)`.
    pub fn delta(&mut self, from: &SuffixSet, rem: &SuffixSet) -> Result<SuffixSet, GrammarError> {
        let from = self.intern_set(from)?;
        let rem = self.intern_set(rem)?;
        let out = self.delta_ids(&from, &rem);
        Ok(self.to_set(&out))
    }

    /// Suffixes representing `REP(a) ∩ REP(b)`; both inputs must be
    /// subsumption-free.
    pub fn intersect(&mut self, a: &SuffixSet, b: &SuffixSet) -> Result<SuffixSet, GrammarError> {
        let a = self.intern_set(a)?;
        let b = self.intern_set(b)?;
        let out = self.intersect_ids(&a, &b).unwrap_or(a);
        Ok(self.to_set(&out))
    }

    /// Every one-step extension of `gps`.
    pub fn one_step_extensions(&mut self, gps: &GrammarPathSuffix) -> Result<SuffixSet, GrammarError> {
        let x = self.intern(gps)?;
        let mut ext = Vec::new();
        self.extend_into(x, &mut ext);
        Ok(self.to_set(&ext))
    }
}

/// The sharpening loop over suffix sets, advanced one pattern node at a
/// time. Changed pattern nodes are revisited in FIFO order, starting with
/// every node in ascending id order.
#[derive(Debug, Clone)]
pub struct GrammarSimulation<'a> {
    alg: SuffixAlgebra<'a>,
    pattern: PatternIndex,
    opts: SimOptions,
    sim: Vec<Vec<Sid>>,
    old_pre: Vec<Vec<Sid>>,
    queue: VecDeque<usize>,
    queued: Vec<bool>,
    failed: bool,
    last: Option<(usize, Option<Vec<Sid>>)>,
}

impl<'a> GrammarSimulation<'a> {
    pub fn new(ix: &'a SimIndex, q: &PatternGraph, opts: SimOptions) -> Result<Self, SimError> {
        let pattern = PatternIndex::new(q)?;
        let alg = SuffixAlgebra::new(ix);
        let all: Vec<Sid> = ix
            .idx
            .terminals()
            .map(|t| alg.trie.base.intern[&(NONE, t, 0)])
            .collect();
        let mut failed = false;
        let sim: Vec<Vec<Sid>> = pattern
            .labels
            .iter()
            .map(|l| match ix.idx.symbol(l).filter(|&s| ix.idx.is_terminal(s)) {
                Some(t) => vec![alg.trie.base.intern[&(NONE, t, 0)]],
                None => {
                    failed = true;
                    Vec::new()
                }
            })
            .collect();
        let n = pattern.len();
        Ok(GrammarSimulation {
            alg,
            opts,
            sim,
            old_pre: vec![all; n],
            queue: (0..n).collect(),
            queued: vec![true; n],
            failed,
            pattern,
            last: None,
        })
    }

    pub fn is_done(&self) -> bool {
        self.failed || self.queue.is_empty()
    }

    /// Sharpens with the next pattern node; returns its id, or `None` at
    /// the fixpoint or once some candidate set became empty.
    pub fn step(&mut self) -> Option<NodeId> {
        if self.failed {
            return None;
        }
        let u = self.queue.pop_front()?;
        self.queued[u] = false;
        let pre = self.alg.pre_ids(&self.sim[u], self.opts.optimized);
        let remove = if self.opts.optimized {
            None
        } else {
            Some(self.alg.delta_ids(&self.old_pre[u], &pre))
        };
        // Equal representations denote equal node sets, and every `sim[v]`
        // already lies within `old_pre[u]`.
        let unchanged = remove.is_none() && self.alg.same_elements(&pre, &self.old_pre[u]);
        let preds = if unchanged { 0 } else { self.pattern.preds[u].len() };
        for i in 0..preds {
            let v = self.pattern.preds[u][i];
            let next = match &remove {
                Some(rem) => Some(self.alg.delta_ids(&self.sim[v], rem)).filter(|n| *n != self.sim[v]),
                None => self.alg.intersect_ids(&self.sim[v], &pre),
            };
            if let Some(next) = next {
                if next.is_empty() {
                    self.failed = true;
                }
                self.sim[v] = next;
                if !self.queued[v] {
                    self.queued[v] = true;
                    self.queue.push_back(v);
                }
            }
        }
        self.old_pre[u] = pre;
        self.last = Some((u, remove));
        Some(self.pattern.ids[u])
    }

    fn position(&self, u: NodeId) -> Option<usize> {
        self.pattern.ids.binary_search(&u).ok()
    }

    /// Current candidate suffixes of pattern node `u`.
    pub fn candidates(&self, u: NodeId) -> Option<SuffixSet> {
        self.position(u).map(|i| self.alg.to_set(&self.sim[i]))
    }

    /// Predecessor set computed by the last step.
    pub fn last_pre(&self) -> Option<SuffixSet> {
        self.last.as_ref().map(|(u, _)| self.alg.to_set(&self.old_pre[*u]))
    }

    /// Removal set computed by the last step (reference mode only).
    pub fn last_remove(&self) -> Option<SuffixSet> {
        self.last
            .as_ref()
            .and_then(|(_, r)| r.as_ref())
            .map(|r| self.alg.to_set(r))
    }

    pub fn run(mut self) -> SimResult {
        while self.step().is_some() {}
        self.result()
    }

    /// Candidate sets if every one is nonempty, else the empty result.
    pub fn result(&self) -> SimResult {
        if self.sim.iter().any(Vec::is_empty) {
            return SimResult::default();
        }
        let mut renumber: FxHashMap<Sid, Sid> = FxHashMap::default();
        let mut nodes = Vec::new();
        let mut path = Vec::new();
        let mut sets = BTreeMap::new();
        for (&u, ids) in self.pattern.ids.iter().zip(&self.sim) {
            let mut out = Vec::with_capacity(ids.len());
            for &s in ids {
                let mut top = NONE;
                let mut a = s;
                while a != NONE {
                    if let Some(&l) = renumber.get(&a) {
                        top = l;
                        break;
                    }
                    path.push(a);
                    a = self.alg.parent(a);
                }
                for a in path.drain(..).rev() {
                    nodes.push(TrieNode {
                        parent: top,
                        ..self.alg.trie.node(a)
                    });
                    top = nodes.len() as Sid - 1;
                    renumber.insert(a, top);
                }
                out.push(top);
            }
            sets.insert(u, out);
        }
        SimResult {
            names: self.alg.ix.idx.names(),
            nodes,
            sets,
        }
    }
}

/// Computes the simulation of `q` over the graph represented by `gg`.
pub fn simulate(gg: &GraphGrammar, q: &PatternGraph, opts: SimOptions) -> Result<SimResult, SimError> {
    let ix = SimIndex::new(gg)?;
    simulate_indexed(&ix, q, opts)
}

pub fn simulate_indexed(ix: &SimIndex, q: &PatternGraph, opts: SimOptions) -> Result<SimResult, SimError> {
    Ok(GrammarSimulation::new(ix, q, opts)?.run())
}

/// Predecessor suffixes of `gps` before subsumption reduction.
pub fn pre_of_gps(gg: &GraphGrammar, gps: &GrammarPathSuffix) -> Result<SuffixSet, GrammarError> {
    let ix = SimIndex::new(gg)?;
    SuffixAlgebra::new(&ix).pre_of_gps(gps)
}

pub fn pre(gg: &GraphGrammar, set: &SuffixSet) -> Result<SuffixSet, GrammarError> {
    let ix = SimIndex::new(gg)?;
    SuffixAlgebra::new(&ix).pre(set)
}

pub fn delta(gg: &GraphGrammar, from: &SuffixSet, rem: &SuffixSet) -> Result<SuffixSet, GrammarError> {
    let ix = SimIndex::new(gg)?;
    SuffixAlgebra::new(&ix).delta(from, rem)
}

/// Node-level expansion of a grammar simulation result.
pub fn rep_expand(gg: &GraphGrammar, r: &SimResult) -> Result<BTreeMap<NodeId, BTreeSet<NodeId>>, GrammarError> {
    r.expand(&GrammarIndex::new(gg)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::model::tests::sample_gg;
    use crate::graph::LabeledGraph;

    fn set(items: &[&str]) -> SuffixSet {
        SuffixSet::of(items)
    }

    fn gps(s: &str) -> GrammarPathSuffix {
        s.parse().unwrap()
    }

    fn cd_pattern() -> PatternGraph {
        LabeledGraph::parse("1 c\n2 d\n1 2\n2 1\n").unwrap()
    }

    #[test]
    fn pre_of_single_suffixes() {
        let gg = sample_gg();
        assert_eq!(
            pre_of_gps(&gg, &gps("c")).unwrap(),
            set(&["CDCD/1:CD/2:d", "S/2:b", "S/3:CDCD/1:CD/2:d"])
        );
        assert_eq!(pre_of_gps(&gg, &gps("CDCD/1:CD/2:d")).unwrap(), set(&["CDCD/1:CD/1:c"]));
        assert_eq!(pre_of_gps(&gg, &gps("b")).unwrap(), set(&[]));
    }

    #[test]
    fn pre_reduces_subsumed() {
        let gg = sample_gg();
        assert_eq!(pre(&gg, &set(&["c"])).unwrap(), set(&["CDCD/1:CD/2:d", "S/2:b"]));
        assert_eq!(pre(&gg, &set(&[])).unwrap(), set(&[]));
        assert_eq!(pre(&gg, &set(&["b"])).unwrap(), set(&[]));
    }

    #[test]
    fn delta_examples() {
        let gg = sample_gg();
        assert_eq!(
            delta(&gg, &set(&["b", "c", "d"]), &set(&["CDCD/1:CD/2:d", "S/2:b"])).unwrap(),
            set(&["c", "CDCD/2:CD/2:d"])
        );
        assert_eq!(
            delta(&gg, &set(&["d"]), &set(&["c", "CDCD/2:CD/2:d"])).unwrap(),
            set(&["CDCD/1:CD/2:d"])
        );
        let x = set(&["b", "CD/1:c"]);
        assert_eq!(delta(&gg, &x, &set(&[])).unwrap(), x);
    }

    #[test]
    fn intersect_examples() {
        let ix = SimIndex::new(&sample_gg()).unwrap();
        let mut alg = SuffixAlgebra::new(&ix);
        assert_eq!(
            alg.intersect(&set(&["d", "b"]), &set(&["CDCD/1:CD/2:d", "c"])).unwrap(),
            set(&["CDCD/1:CD/2:d"])
        );
        assert_eq!(
            alg.intersect(&set(&["S/3:CDCD/1:CD/2:d"]), &set(&["CD/2:d"])).unwrap(),
            set(&["S/3:CDCD/1:CD/2:d"])
        );
    }

    #[test]
    fn invalid_suffix_is_rejected() {
        let gg = sample_gg();
        assert!(pre(&gg, &set(&["CD/3:c"])).is_err());
        assert!(delta(&gg, &set(&["x"]), &set(&[])).is_err());
    }

    #[test]
    fn sample_first_steps() {
        let ix = SimIndex::new(&sample_gg()).unwrap();
        let q = cd_pattern();
        let mut run = GrammarSimulation::new(&ix, &q, SimOptions::default()).unwrap();
        assert_eq!(run.step(), Some(1));
        assert_eq!(run.last_pre().unwrap(), set(&["CDCD/1:CD/2:d", "S/2:b"]));
        assert_eq!(run.last_remove().unwrap(), set(&["c", "CDCD/2:CD/2:d"]));
        assert_eq!(run.candidates(2).unwrap(), set(&["CDCD/1:CD/2:d"]));
        let r = run.run();
        assert_eq!(r.get(1).unwrap(), set(&["S/3:CDCD/1:CD/1:c"]));
        assert_eq!(r.get(2).unwrap(), set(&["S/3:CDCD/1:CD/2:d"]));
    }

    #[test]
    fn sample_expands_to_expected_relation() {
        let gg = sample_gg();
        for optimized in [false, true] {
            let r = simulate(&gg, &cd_pattern(), SimOptions { optimized }).unwrap();
            let e = rep_expand(&gg, &r).unwrap();
            assert_eq!(e, BTreeMap::from([(1, BTreeSet::from([6])), (2, BTreeSet::from([7]))]));
        }
    }

    #[test]
    fn trivial_patterns() {
        let gg = sample_gg();
        let z = LabeledGraph::parse("1 z\n").unwrap();
        assert!(simulate(&gg, &z, SimOptions::default()).unwrap().is_empty());

        let d = LabeledGraph::parse("1 d\n").unwrap();
        let r = simulate(&gg, &d, SimOptions::default()).unwrap();
        assert_eq!(
            r.pairs().map(|(u, g)| (u, g.to_string())).collect::<Vec<_>>(),
            vec![(1, "d".to_string())]
        );
        assert_eq!(rep_expand(&gg, &r).unwrap()[&1], BTreeSet::from([2, 4, 7, 9]));

        assert_eq!(
            simulate(&gg, &LabeledGraph::new(), SimOptions::default()),
            Err(SimError::EmptyPattern)
        );
    }

    #[test]
    fn unsatisfiable_pattern_is_empty() {
        let q = LabeledGraph::parse("1 b\n2 b\n1 2\n").unwrap();
        for optimized in [false, true] {
            assert!(simulate(&sample_gg(), &q, SimOptions { optimized }).unwrap().is_empty());
        }
    }
}
