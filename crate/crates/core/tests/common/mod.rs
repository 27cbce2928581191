#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use gramsim::baseline::NodeSim;
use gramsim::compress::{compress, CompressOptions};
use gramsim::genbench::{gen_graph, GraphGenParams};
use gramsim::grammar::GrammarIndex;
use gramsim::sim::{SimIndex, SimResult, SuffixAlgebra};
use gramsim::{GrammarPathSuffix, GraphGrammar, Label, LabeledGraph, NodeId, PathMap, SuffixSet};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn read_data(name: &str) -> String {
    std::fs::read_to_string(data(name)).unwrap()
}

pub fn sample_graph() -> LabeledGraph {
    LabeledGraph::parse(&read_data("sample.el")).unwrap()
}

pub fn sample_grammar() -> GraphGrammar {
    GraphGrammar::parse(&read_data("sample.gg")).unwrap()
}

pub fn cd_pattern() -> LabeledGraph {
    LabeledGraph::parse(&read_data("cd.el")).unwrap()
}

pub fn label(i: usize) -> Label {
    Label::new(&((b'a' + i as u8) as char).to_string()).unwrap()
}

/// Graph with nodes `1..=labels.len()` and the given 0-based edges.
pub fn build_graph(labels: &[usize], edges: &[(usize, usize)]) -> LabeledGraph {
    let mut g = LabeledGraph::new();
    for (i, &l) in labels.iter().enumerate() {
        g.add_node(i as NodeId + 1, label(l)).unwrap();
    }
    for &(s, d) in edges {
        g.add_edge(s as NodeId + 1, d as NodeId + 1).unwrap();
    }
    g
}

pub fn random_graph(rng: &mut impl Rng, max_nodes: usize, max_labels: usize, max_edges_per_node: f64) -> LabeledGraph {
    let n = rng.gen_range(1..=max_nodes);
    let k = rng.gen_range(1..=max_labels);
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
    let m = (rng.gen_range(0.0..=max_edges_per_node) * n as f64) as usize;
    let edges: Vec<(usize, usize)> = (0..m).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
    build_graph(&labels, &edges)
}

/// Expanded grammar result in original node ids.
pub fn expand_mapped(r: &SimResult, idx: &GrammarIndex, map: &PathMap) -> NodeSim {
    r.expand(idx)
        .unwrap()
        .into_iter()
        .map(|(u, vs)| (u, vs.into_iter().map(|v| map.get(v).unwrap()).collect()))
        .collect()
}

/// Random valid suffixes of `gg`: suffixes of random full grammar paths.
pub fn random_suffixes(rng: &mut impl Rng, idx: &GrammarIndex, paths: &[GrammarPathSuffix], max: usize) -> SuffixSet {
    let k = rng.gen_range(0..=max);
    let mut out = SuffixSet::new();
    for _ in 0..k {
        let p = paths.choose(rng).unwrap();
        let drop = rng.gen_range(0..=p.steps().len());
        let s = GrammarPathSuffix::new(p.steps()[drop..].to_vec(), p.terminal().clone());
        idx.locate(&s).unwrap();
        out.insert(s);
    }
    out
}

pub fn rep_of(idx: &GrammarIndex, set: &SuffixSet) -> BTreeSet<NodeId> {
    set.iter().flat_map(|g| idx.rep(g).unwrap()).collect()
}

pub fn compressed(g: &LabeledGraph) -> (GraphGrammar, PathMap) {
    compress(g, CompressOptions::default()).unwrap()
}

/// The greatest label-respecting relation satisfying the successor
/// condition, found by enumerating every label-respecting relation.
pub fn brute_force_simulation(g: &LabeledGraph, q: &LabeledGraph) -> NodeSim {
    let pairs: Vec<(NodeId, NodeId)> = q
        .nodes()
        .flat_map(|(u, l)| g.nodes().filter(move |(_, gl)| *gl == l).map(move |(v, _)| (u, v)))
        .collect();
    assert!(pairs.len() <= 20, "relation space too large for enumeration");
    let mut best: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    for mask in 0u32..(1 << pairs.len()) {
        let rel: BTreeSet<(NodeId, NodeId)> = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &p)| p)
            .collect();
        let ok = rel.iter().all(|&(u, v)| {
            q.edges()
                .filter(|&(s, _)| s == u)
                .all(|(_, u2)| g.edges().any(|(s, v2)| s == v && rel.contains(&(u2, v2))))
        });
        if ok {
            best.extend(rel);
        }
    }
    let mut out: NodeSim = q.node_ids().map(|u| (u, BTreeSet::new())).collect();
    for (u, v) in best {
        out.get_mut(&u).unwrap().insert(v);
    }
    if out.values().any(BTreeSet::is_empty) {
        return BTreeMap::new();
    }
    out
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// One random (grammar, suffix sets) case: delta, pre and intersect must
/// agree with the node sets they represent, and pre must not overlap.
pub fn algebra_case(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = if seed.is_multiple_of(2) {
        random_graph(&mut rng, 30, 3, 2.0)
    } else {
        gen_graph(&GraphGenParams {
            base_nodes: rng.gen_range(2..=6),
            variations: rng.gen_range(2..=8),
            delete_fraction: 0.3,
            edges_per_node: 1.3,
            labels: rng.gen_range(1..=3),
            seed,
        })
        .unwrap_or_default()
    };
    if g.is_empty() {
        return Ok(());
    }
    let (gg, _) = compressed(&g);
    let (h, _) = gg.decompress().unwrap();
    let ix = SimIndex::new(&gg).unwrap();
    let idx = ix.grammar();
    let paths = idx.full_paths();
    let mut alg = SuffixAlgebra::new(&ix);
    let a = random_suffixes(&mut rng, idx, &paths, 6);
    let b = random_suffixes(&mut rng, idx, &paths, 6);
    let (ra, rb) = (rep_of(idx, &a), rep_of(idx, &b));

    let d = alg.delta(&a, &b).unwrap();
    let want: BTreeSet<NodeId> = ra.difference(&rb).copied().collect();
    check(rep_of(idx, &d) == want, || {
        format!("seed {seed}: delta({a:?}, {b:?}) = {d:?}")
    })?;

    let p = alg.pre(&a).unwrap();
    let want = h.predecessors(&ra).unwrap();
    check(rep_of(idx, &p) == want, || format!("seed {seed}: pre({a:?}) = {p:?}"))?;
    let mut seen = BTreeSet::new();
    for s in &p {
        for v in idx.rep(s).unwrap() {
            check(seen.insert(v), || {
                format!("seed {seed}: {s} overlaps another element of pre({a:?})")
            })?;
        }
    }

    let i = alg.intersect(&a, &b).unwrap();
    let want: BTreeSet<NodeId> = ra.intersection(&rb).copied().collect();
    check(rep_of(idx, &i) == want, || {
        format!("seed {seed}: intersect({a:?}, {b:?}) = {i:?}")
    })
}
