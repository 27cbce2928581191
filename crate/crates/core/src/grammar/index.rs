//! A validated grammar compiled to integer symbols.
//!
//! Decompressed node ids follow depth-first order over full grammar paths:
//! the `𝒮/1` subtree is numbered completely before `𝒮/2`, recursively, from
//! 1 upward. With `size(X)` the number of terminals below symbol `X` and
//! `off_N(i)` the total size of the body nodes of `N` in front of ordinal
//! `i`, a full path `𝒮/i1:N1/i2:…:F` gets id `1 + off_𝒮(i1) + off_N1(i2) + …`.
//! Every instance of a rule therefore covers one contiguous id range, and a
//! suffix anchored at `N` denotes `instance_start + local_offset` for each
//! instance of `N`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use super::model::{GrammarError, GraphGrammar, Violation};
use super::suffix::{GrammarPathSuffix, Step, SuffixSet};
use crate::graph::{Label, LabeledGraph, NodeId};

/// Dense symbol id inside one [`GrammarIndex`].
pub type Sym = u32;

#[derive(Debug, Clone)]
pub struct GrammarIndex {
    names: Arc<[Label]>,
    lookup: HashMap<Label, Sym>,
    terminal: Vec<bool>,
    bodies: Vec<Vec<(u32, Sym)>>,
    occurrences: Vec<Vec<(Sym, u32)>>,
    start: Sym,
    size: Vec<u64>,
    offsets: Vec<Vec<u64>>,
    starts: Vec<Vec<u64>>,
    edges: Vec<(GrammarPathSuffix, GrammarPathSuffix)>,
}

impl GrammarIndex {
    /// Validates `gg` and compiles it.
    pub fn new(gg: &GraphGrammar) -> Result<Self, GrammarError> {
        gg.check()?;
        let mut names: Vec<Label> = Vec::new();
        let mut lookup = HashMap::new();
        let mut terminal = Vec::new();
        for t in &gg.terminals {
            lookup.insert(t.clone(), names.len() as Sym);
            names.push(t.clone());
            terminal.push(true);
        }
        for r in &gg.rules {
            lookup.insert(r.name.clone(), names.len() as Sym);
            names.push(r.name.clone());
            terminal.push(false);
        }
        let n = names.len();
        let mut bodies = vec![Vec::new(); n];
        let mut occurrences = vec![Vec::new(); n];
        for r in &gg.rules {
            let id = lookup[&r.name];
            bodies[id as usize] = r.body.iter().map(|(o, l)| (*o, lookup[l])).collect();
            for (o, l) in &r.body {
                occurrences[lookup[l] as usize].push((id, *o));
            }
        }
        let start = lookup[&gg.start];

        // parents before children
        let mut pending: Vec<usize> = occurrences.iter().map(Vec::len).collect();
        let mut queue: VecDeque<Sym> = (0..n as Sym).filter(|&s| pending[s as usize] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(s) = queue.pop_front() {
            topo.push(s);
            for &(_, child) in &bodies[s as usize] {
                pending[child as usize] -= 1;
                if pending[child as usize] == 0 {
                    queue.push_back(child);
                }
            }
        }
        debug_assert_eq!(topo.len(), n, "validated grammar is acyclic");

        let mut size = vec![0u64; n];
        let mut offsets = vec![Vec::new(); n];
        for &s in topo.iter().rev() {
            if terminal[s as usize] {
                size[s as usize] = 1;
                continue;
            }
            let mut acc = 0u64;
            let mut offs = Vec::with_capacity(bodies[s as usize].len());
            for &(_, child) in &bodies[s as usize] {
                offs.push(acc);
                acc += size[child as usize];
            }
            size[s as usize] = acc;
            offsets[s as usize] = offs;
        }

        let mut starts: Vec<Vec<u64>> = vec![Vec::new(); n];
        starts[start as usize].push(0);
        for &s in &topo {
            if s != start {
                starts[s as usize].sort_unstable();
            }
            if terminal[s as usize] {
                continue;
            }
            let mine = std::mem::take(&mut starts[s as usize]);
            for (pos, &(_, child)) in bodies[s as usize].iter().enumerate() {
                let off = offsets[s as usize][pos];
                let dst = &mut starts[child as usize];
                dst.extend(mine.iter().map(|b| b + off));
            }
            starts[s as usize] = mine;
        }

        Ok(GrammarIndex {
            names: names.into(),
            lookup,
            terminal,
            bodies,
            occurrences,
            start,
            size,
            offsets,
            starts,
            edges: gg.edges.clone(),
        })
    }

    pub fn symbol(&self, label: &Label) -> Option<Sym> {
        self.lookup.get(label).copied()
    }

    pub fn name(&self, sym: Sym) -> &Label {
        &self.names[sym as usize]
    }

    /// Every symbol name, indexed by [`Sym`].
    pub fn names(&self) -> Arc<[Label]> {
        Arc::clone(&self.names)
    }

    pub fn symbol_count(&self) -> usize {
        self.names.len()
    }

    pub fn is_terminal(&self, sym: Sym) -> bool {
        self.terminal[sym as usize]
    }

    pub fn start(&self) -> Sym {
        self.start
    }

    pub fn terminals(&self) -> impl Iterator<Item = Sym> + '_ {
        (0..self.names.len() as Sym).filter(|&s| self.terminal[s as usize])
    }

    /// `(ordinal, symbol)` pairs of a rule body; empty for terminals.
    pub fn body(&self, rule: Sym) -> &[(u32, Sym)] {
        &self.bodies[rule as usize]
    }

    /// Every `(rule, ordinal)` whose body node carries `sym`.
    pub fn occurrences(&self, sym: Sym) -> &[(Sym, u32)] {
        &self.occurrences[sym as usize]
    }

    /// Label of body node `ordinal` in `rule`.
    pub fn label_at(&self, rule: Sym, ordinal: u32) -> Option<Sym> {
        let body = &self.bodies[rule as usize];
        body.binary_search_by_key(&ordinal, |(o, _)| *o).ok().map(|i| body[i].1)
    }

    fn offset_at(&self, rule: Sym, ordinal: u32) -> Option<u64> {
        let body = &self.bodies[rule as usize];
        body.binary_search_by_key(&ordinal, |(o, _)| *o)
            .ok()
            .map(|i| self.offsets[rule as usize][i])
    }

    pub fn edges(&self) -> &[(GrammarPathSuffix, GrammarPathSuffix)] {
        &self.edges
    }

    /// Number of nodes of the decompressed graph.
    pub fn node_count(&self) -> u64 {
        self.size[self.start as usize]
    }

    /// Number of instances of `sym` in the derivation.
    pub fn instance_count(&self, sym: Sym) -> usize {
        self.starts[sym as usize].len()
    }

    /// 0-based first node position of each instance of `sym`, ascending.
    pub fn instance_starts(&self, sym: Sym) -> &[u64] {
        &self.starts[sym as usize]
    }

    /// Resolves a suffix to its anchor symbol and the position of its node
    /// inside one instance of that anchor.
    pub fn locate(&self, gps: &GrammarPathSuffix) -> Result<(Sym, u64), GrammarError> {
        let invalid = |v| GrammarError::InvalidSuffix(v);
        let term = self
            .symbol(gps.terminal())
            .filter(|&s| self.is_terminal(s))
            .ok_or_else(|| invalid(Violation::UnknownTerminal { suffix: gps.clone() }))?;
        let steps = gps.steps();
        let mut local = 0u64;
        for (i, step) in steps.iter().enumerate() {
            let rule = self
                .symbol(&step.rule)
                .filter(|&s| !self.is_terminal(s))
                .ok_or_else(|| {
                    invalid(Violation::UnknownRule {
                        suffix: gps.clone(),
                        rule: step.rule.clone(),
                    })
                })?;
            let found = self.label_at(rule, step.ordinal).ok_or_else(|| {
                invalid(Violation::MissingOrdinal {
                    suffix: gps.clone(),
                    rule: step.rule.clone(),
                    ordinal: step.ordinal,
                })
            })?;
            let next = steps.get(i + 1).map_or(gps.terminal(), |s| &s.rule);
            if self.name(found) != next {
                return Err(invalid(Violation::LabelMismatch {
                    suffix: gps.clone(),
                    rule: step.rule.clone(),
                    ordinal: step.ordinal,
                    expected: self.name(found).clone(),
                }));
            }
            local += self.offset_at(rule, step.ordinal).unwrap();
        }
        let anchor = match steps.first() {
            Some(s) => self.lookup[&s.rule],
            None => term,
        };
        Ok((anchor, local))
    }

    /// Decompressed node ids represented by `gps`, ascending.
    pub fn rep(&self, gps: &GrammarPathSuffix) -> Result<Vec<NodeId>, GrammarError> {
        let (anchor, local) = self.locate(gps)?;
        Ok(self.starts[anchor as usize].iter().map(|s| s + local + 1).collect())
    }

    /// Node id of a full grammar path.
    pub fn node_of_path(&self, gp: &GrammarPathSuffix) -> Result<NodeId, GrammarError> {
        let (anchor, local) = self.locate(gp)?;
        if anchor != self.start {
            return Err(GrammarError::InvalidSuffix(Violation::UnanchoredEdge {
                suffix: gp.clone(),
            }));
        }
        Ok(local + 1)
    }

    /// `{ NT/k:ext | body node k of NT carries firstLabel(ext) }`.
    pub fn one_step_extensions(&self, ext: &GrammarPathSuffix) -> Result<SuffixSet, GrammarError> {
        let (anchor, _) = self.locate(ext)?;
        Ok(self.occurrences[anchor as usize]
            .iter()
            .map(|&(rule, ord)| ext.prepend(Step::new(self.name(rule).clone(), ord)))
            .collect())
    }

    /// All full grammar paths having `gps` as suffix.
    pub fn enumerate_grammar_paths(&self, gps: &GrammarPathSuffix) -> Result<SuffixSet, GrammarError> {
        self.locate(gps)?;
        let start = self.name(self.start).clone();
        let mut out = SuffixSet::new();
        let mut work = vec![gps.clone()];
        while let Some(x) = work.pop() {
            if x.is_anchored_at(&start) {
                out.insert(x);
            } else {
                work.extend(self.one_step_extensions(&x)?);
            }
        }
        Ok(out)
    }

    /// Visits every full grammar path in id order as (steps, terminal).
    pub fn for_each_path(&self, mut visit: impl FnMut(&[(Sym, u32)], Sym)) {
        let mut path: Vec<(Sym, u32)> = Vec::new();
        let mut frames: Vec<(Sym, usize)> = vec![(self.start, 0)];
        while let Some((rule, pos)) = frames.last_mut() {
            let rule = *rule;
            let body = &self.bodies[rule as usize];
            if *pos == body.len() {
                frames.pop();
                path.pop();
                continue;
            }
            let (ord, child) = body[*pos];
            *pos += 1;
            path.push((rule, ord));
            if self.terminal[child as usize] {
                visit(&path, child);
                path.pop();
            } else {
                frames.push((child, 0));
            }
        }
    }

    pub fn path_to_suffix(&self, steps: &[(Sym, u32)], terminal: Sym) -> GrammarPathSuffix {
        GrammarPathSuffix::new(
            steps.iter().map(|&(r, o)| Step::new(self.name(r).clone(), o)).collect(),
            self.name(terminal).clone(),
        )
    }

    /// Full grammar paths in id order.
    pub fn full_paths(&self) -> Vec<GrammarPathSuffix> {
        let mut out = Vec::with_capacity(self.node_count() as usize);
        self.for_each_path(|steps, t| out.push(self.path_to_suffix(steps, t)));
        out
    }

    /// Inlines every nonterminal; node `k` is the `k`-th full path.
    pub fn decompress(&self) -> (LabeledGraph, PathMap) {
        let mut g = LabeledGraph::new();
        let mut next: NodeId = 1;
        self.for_each_path(|_, t| {
            g.add_node(next, self.name(t).clone()).expect("fresh id");
            next += 1;
        });
        for (l, r) in &self.edges {
            let (anchor, lo) = self.locate(l).expect("validated");
            let (_, ro) = self.locate(r).expect("validated");
            for s in &self.starts[anchor as usize] {
                g.add_edge(s + lo + 1, s + ro + 1).expect("ids in range");
            }
        }
        let n = g.node_count() as NodeId;
        (g, PathMap::identity(n))
    }
}

/// Bijection between full grammar paths and node ids, stored as the node id
/// of each full path in depth-first path order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathMap {
    ids: Vec<NodeId>,
}

impl PathMap {
    pub fn identity(n: NodeId) -> Self {
        PathMap { ids: (1..=n).collect() }
    }

    pub fn from_ids(ids: Vec<NodeId>) -> Self {
        PathMap { ids }
    }

    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Target id of the decompressed node `dfs_id` (1-based).
    pub fn get(&self, dfs_id: NodeId) -> Option<NodeId> {
        dfs_id.checked_sub(1).and_then(|i| self.ids.get(i as usize)).copied()
    }

    /// Decompressed id → target id, as a lookup table.
    pub fn to_hash_map(&self) -> HashMap<NodeId, NodeId> {
        self.ids
            .iter()
            .enumerate()
            .map(|(i, &v)| (i as NodeId + 1, v))
            .collect()
    }

    pub fn is_bijective(&self) -> bool {
        self.ids.iter().collect::<BTreeSet<_>>().len() == self.ids.len()
    }

    /// `<grammar path> <id>` lines in path order.
    pub fn to_text(&self, idx: &GrammarIndex) -> String {
        let mut out = String::new();
        let mut k = 0usize;
        idx.for_each_path(|steps, t| {
            out.push_str(&format!("{} {}\n", idx.path_to_suffix(steps, t), self.ids[k]));
            k += 1;
        });
        out
    }

    pub fn parse(text: &str, idx: &GrammarIndex) -> Result<Self, GrammarError> {
        let n = idx.node_count() as usize;
        let mut ids: Vec<Option<NodeId>> = vec![None; n];
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: String| GrammarError::Parse { line, msg };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (gp, id) = trimmed
                .split_once(char::is_whitespace)
                .ok_or_else(|| err("expected `<grammar path> <id>`".into()))?;
            let gp = GrammarPathSuffix::parse(gp).map_err(|e| err(e.to_string()))?;
            let id: NodeId = id
                .trim()
                .parse()
                .map_err(|_| err(format!("bad node id `{}`", id.trim())))?;
            let pos = idx.node_of_path(&gp).map_err(|e| err(e.to_string()))? as usize - 1;
            if ids[pos].replace(id).is_some() {
                return Err(err(format!("grammar path {gp} listed twice")));
            }
        }
        let ids: Option<Vec<NodeId>> = ids.into_iter().collect();
        let map = PathMap {
            ids: ids.ok_or(GrammarError::Parse {
                line: 0,
                msg: "path map does not cover every grammar path".into(),
            })?,
        };
        if !map.is_bijective() {
            return Err(GrammarError::Parse {
                line: 0,
                msg: "path map repeats a node id".into(),
            });
        }
        Ok(map)
    }
}

impl GraphGrammar {
    /// Compiles the grammar; see [`GrammarIndex`].
    pub fn index(&self) -> Result<GrammarIndex, GrammarError> {
        GrammarIndex::new(self)
    }

    pub fn decompress(&self) -> Result<(LabeledGraph, PathMap), GrammarError> {
        Ok(self.index()?.decompress())
    }

    pub fn rep(&self, gps: &GrammarPathSuffix) -> Result<BTreeSet<NodeId>, GrammarError> {
        Ok(self.index()?.rep(gps)?.into_iter().collect())
    }

    pub fn one_step_extensions(&self, ext: &GrammarPathSuffix) -> Result<SuffixSet, GrammarError> {
        self.index()?.one_step_extensions(ext)
    }

    pub fn enumerate_grammar_paths(&self, gps: &GrammarPathSuffix) -> Result<SuffixSet, GrammarError> {
        self.index()?.enumerate_grammar_paths(gps)
    }
}
