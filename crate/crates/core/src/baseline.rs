//! Simulation computed directly on the uncompressed graph by sharpening
//! node sets. Two variants share the scheduling of the grammar engine:
//! [`BaselineSimulation`] works on ordered sets and scans edges for
//! predecessors; [`IndexedGraph`] uses dense ids and in-adjacency arrays,
//! with candidate sets either as sorted vectors or as bit sets.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use fixedbitset::FixedBitSet;
use rustc_hash::FxHashMap;

use crate::graph::{Label, LabeledGraph, NodeId, PatternGraph};
use crate::sim::{PatternIndex, SimError};

/// Per pattern node, the graph nodes simulating it; empty when no
/// simulation exists.
pub type NodeSim = BTreeMap<NodeId, BTreeSet<NodeId>>;

/// Reference sharpening loop, one pattern node per step.
#[derive(Debug, Clone)]
pub struct BaselineSimulation<'g> {
    g: &'g LabeledGraph,
    pattern: PatternIndex,
    sim: Vec<BTreeSet<NodeId>>,
    old_pre: Vec<BTreeSet<NodeId>>,
    queue: VecDeque<usize>,
    queued: Vec<bool>,
    failed: bool,
    last: Option<(usize, BTreeSet<NodeId>)>,
}

impl<'g> BaselineSimulation<'g> {
    pub fn new(g: &'g LabeledGraph, q: &PatternGraph) -> Result<Self, SimError> {
        if g.is_empty() {
            return Err(SimError::EmptyGraph);
        }
        let pattern = PatternIndex::new(q)?;
        let sim: Vec<BTreeSet<NodeId>> = pattern
            .labels
            .iter()
            .map(|l| g.nodes().filter(|(_, gl)| *gl == l).map(|(v, _)| v).collect())
            .collect();
        let all: BTreeSet<NodeId> = g.node_ids().collect();
        let n = pattern.len();
        Ok(BaselineSimulation {
            g,
            failed: sim.iter().any(BTreeSet::is_empty),
            sim,
            old_pre: vec![all; n],
            queue: (0..n).collect(),
            queued: vec![true; n],
            pattern,
            last: None,
        })
    }

    pub fn is_done(&self) -> bool {
        self.failed || self.queue.is_empty()
    }

    pub fn step(&mut self) -> Option<NodeId> {
        if self.failed {
            return None;
        }
        let u = self.queue.pop_front()?;
        self.queued[u] = false;
        let pre = self.g.predecessors(&self.sim[u]).expect("candidates are graph nodes");
        let remove: BTreeSet<NodeId> = self.old_pre[u].difference(&pre).copied().collect();
        for i in 0..self.pattern.preds[u].len() {
            let v = self.pattern.preds[u][i];
            let before = self.sim[v].len();
            self.sim[v].retain(|x| !remove.contains(x));
            if self.sim[v].len() != before {
                if self.sim[v].is_empty() {
                    self.failed = true;
                }
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

    pub fn candidates(&self, u: NodeId) -> Option<&BTreeSet<NodeId>> {
        self.pattern.ids.binary_search(&u).ok().map(|i| &self.sim[i])
    }

    /// Predecessors of the candidates processed by the last step.
    pub fn last_pre(&self) -> Option<&BTreeSet<NodeId>> {
        self.last.as_ref().map(|(u, _)| &self.old_pre[*u])
    }

    pub fn last_remove(&self) -> Option<&BTreeSet<NodeId>> {
        self.last.as_ref().map(|(_, r)| r)
    }

    pub fn result(&self) -> NodeSim {
        if self.sim.iter().any(BTreeSet::is_empty) {
            return NodeSim::new();
        }
        self.pattern.ids.iter().copied().zip(self.sim.iter().cloned()).collect()
    }

    pub fn run(mut self) -> NodeSim {
        while self.step().is_some() {}
        self.result()
    }
}

pub fn simulate_baseline(g: &LabeledGraph, q: &PatternGraph) -> Result<NodeSim, SimError> {
    Ok(BaselineSimulation::new(g, q)?.run())
}

/// A graph with dense node positions and in-adjacency lists.
#[derive(Debug, Clone)]
pub struct IndexedGraph {
    ids: Vec<NodeId>,
    labels: FxHashMap<Label, FixedBitSet>,
    in_start: Vec<usize>,
    in_src: Vec<u32>,
}

impl IndexedGraph {
    pub fn new(g: &LabeledGraph) -> Self {
        let ids: Vec<NodeId> = g.node_ids().collect();
        let n = ids.len();
        let pos: FxHashMap<NodeId, u32> = ids.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
        let mut labels: FxHashMap<Label, FixedBitSet> = FxHashMap::default();
        for (i, (_, l)) in g.nodes().enumerate() {
            labels
                .entry(l.clone())
                .or_insert_with(|| FixedBitSet::with_capacity(n))
                .insert(i);
        }
        let mut in_start = vec![0usize; n + 1];
        for (_, d) in g.edges() {
            in_start[pos[&d] as usize + 1] += 1;
        }
        for i in 0..n {
            in_start[i + 1] += in_start[i];
        }
        let mut fill = in_start.clone();
        let mut in_src = vec![0u32; g.edge_count()];
        for (s, d) in g.edges() {
            let d = pos[&d] as usize;
            in_src[fill[d]] = pos[&s];
            fill[d] += 1;
        }
        IndexedGraph {
            ids,
            labels,
            in_start,
            in_src,
        }
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    fn predecessors(&self, set: &FixedBitSet, out: &mut FixedBitSet) {
        out.clear();
        for v in set.ones() {
            for &w in &self.in_src[self.in_start[v]..self.in_start[v + 1]] {
                out.insert(w as usize);
            }
        }
    }

    fn initial(&self, pattern: &PatternIndex) -> Vec<FixedBitSet> {
        let empty = FixedBitSet::with_capacity(self.ids.len());
        pattern
            .labels
            .iter()
            .map(|l| self.labels.get(l).unwrap_or(&empty).clone())
            .collect()
    }

    fn finish<S>(&self, pattern: &PatternIndex, sim: &[S], members: impl Fn(&S) -> Vec<usize>) -> NodeSim {
        pattern
            .ids
            .iter()
            .zip(sim)
            .map(|(&u, s)| (u, members(s).into_iter().map(|i| self.ids[i]).collect()))
            .collect()
    }

    /// Same sharpening loop and scheduling as [`BaselineSimulation`], with
    /// candidate sets kept as sorted position vectors.
    pub fn simulate(&self, q: &PatternGraph) -> Result<NodeSim, SimError> {
        if self.ids.is_empty() {
            return Err(SimError::EmptyGraph);
        }
        let pattern = PatternIndex::new(q)?;
        let mut sim: Vec<Vec<u32>> = self
            .initial(&pattern)
            .iter()
            .map(|b| b.ones().map(|i| i as u32).collect())
            .collect();
        if sim.iter().any(Vec::is_empty) {
            return Ok(NodeSim::new());
        }
        let k = pattern.len();
        let all: Vec<u32> = (0..self.ids.len() as u32).collect();
        let mut old_pre = vec![all; k];
        let mut queue: VecDeque<usize> = (0..k).collect();
        let mut queued = vec![true; k];
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            let mut pre = Vec::new();
            for &v in &sim[u] {
                let v = v as usize;
                pre.extend_from_slice(&self.in_src[self.in_start[v]..self.in_start[v + 1]]);
            }
            pre.sort_unstable();
            pre.dedup();
            let remove = sorted_difference(&old_pre[u], &pre);
            for &v in &pattern.preds[u] {
                let next = sorted_difference(&sim[v], &remove);
                if next.len() != sim[v].len() {
                    if next.is_empty() {
                        return Ok(NodeSim::new());
                    }
                    sim[v] = next;
                    if !queued[v] {
                        queued[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            old_pre[u] = pre;
        }
        Ok(self.finish(&pattern, &sim, |s| s.iter().map(|&i| i as usize).collect()))
    }

    /// As [`IndexedGraph::simulate`] with candidate sets as bit sets.
    pub fn simulate_bitset(&self, q: &PatternGraph) -> Result<NodeSim, SimError> {
        if self.ids.is_empty() {
            return Err(SimError::EmptyGraph);
        }
        let pattern = PatternIndex::new(q)?;
        let n = self.ids.len();
        let mut sim = self.initial(&pattern);
        if sim.iter().any(|s| s.is_clear()) {
            return Ok(NodeSim::new());
        }
        let mut all = FixedBitSet::with_capacity(n);
        all.insert_range(..);
        let k = pattern.len();
        let mut old_pre = vec![all; k];
        let mut queue: VecDeque<usize> = (0..k).collect();
        let mut queued = vec![true; k];
        let mut pre = FixedBitSet::with_capacity(n);
        let mut remove = FixedBitSet::with_capacity(n);
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            self.predecessors(&sim[u], &mut pre);
            remove.clone_from(&old_pre[u]);
            remove.difference_with(&pre);
            for &v in &pattern.preds[u] {
                let before = sim[v].count_ones(..);
                sim[v].difference_with(&remove);
                let after = sim[v].count_ones(..);
                if after != before {
                    if after == 0 {
                        return Ok(NodeSim::new());
                    }
                    if !queued[v] {
                        queued[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            std::mem::swap(&mut old_pre[u], &mut pre);
        }
        Ok(self.finish(&pattern, &sim, |s| s.ones().collect()))
    }
}

/// Elements of `a` not in `b`, both sorted.
fn sorted_difference(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len());
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            out.push(x);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::sample;

    fn cd_pattern() -> PatternGraph {
        LabeledGraph::parse("1 c\n2 d\n1 2\n2 1\n").unwrap()
    }

    fn nodes(v: &[NodeId]) -> BTreeSet<NodeId> {
        v.iter().copied().collect()
    }

    #[test]
    fn sample_first_iteration() {
        let g = sample();
        let q = cd_pattern();
        let mut run = BaselineSimulation::new(&g, &q).unwrap();
        assert_eq!(run.step(), Some(1));
        assert_eq!(run.last_pre().unwrap(), &nodes(&[2, 5, 7]));
        assert_eq!(run.last_remove().unwrap(), &nodes(&[1, 3, 4, 6, 8, 9]));
        assert_eq!(run.candidates(2).unwrap(), &nodes(&[2, 7]));
    }

    #[test]
    fn sample_fixpoint() {
        let g = sample();
        let expected = NodeSim::from([(1, nodes(&[6])), (2, nodes(&[7]))]);
        assert_eq!(simulate_baseline(&g, &cd_pattern()).unwrap(), expected);
        let ig = IndexedGraph::new(&g);
        assert_eq!(ig.simulate(&cd_pattern()).unwrap(), expected);
        assert_eq!(ig.simulate_bitset(&cd_pattern()).unwrap(), expected);
    }

    #[test]
    fn single_node_pattern() {
        let g = sample();
        let q = LabeledGraph::parse("1 b\n").unwrap();
        assert_eq!(simulate_baseline(&g, &q).unwrap(), NodeSim::from([(1, nodes(&[5]))]));
        assert_eq!(
            IndexedGraph::new(&g).simulate(&q).unwrap(),
            NodeSim::from([(1, nodes(&[5]))])
        );
    }

    #[test]
    fn no_match_and_errors() {
        let g = sample();
        let q = LabeledGraph::parse("1 b\n2 b\n1 2\n").unwrap();
        assert!(simulate_baseline(&g, &q).unwrap().is_empty());
        assert!(IndexedGraph::new(&g).simulate(&q).unwrap().is_empty());
        assert!(IndexedGraph::new(&g).simulate_bitset(&q).unwrap().is_empty());
        let z = LabeledGraph::parse("1 z\n").unwrap();
        assert!(simulate_baseline(&g, &z).unwrap().is_empty());
        assert_eq!(simulate_baseline(&g, &LabeledGraph::new()), Err(SimError::EmptyPattern));
        assert_eq!(simulate_baseline(&LabeledGraph::new(), &z), Err(SimError::EmptyGraph));
    }
}
