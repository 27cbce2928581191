//! Synthetic graphs made of many damaged copies of one random subgraph,
//! random patterns, and the benchmark that times both simulation engines.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::baseline::{simulate_baseline, IndexedGraph, NodeSim};
use crate::compress::{compress, CompressOptions, SizeMetrics};
use crate::grammar::{GrammarIndex, PathMap};
use crate::graph::{Label, LabeledGraph, NodeId, PatternGraph};
use crate::sim::{GrammarSimulation, SimError, SimIndex, SimOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("cannot reach {target} edges with {nodes} nodes")]
    Density { nodes: usize, target: usize },
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("results differ for graph index {graph_index}, seed {seed}")]
    Mismatch { graph_index: usize, seed: u64 },
    #[error("graph index {graph_index}, seed {seed}: exceeded {limit_ms} ms")]
    Timeout {
        graph_index: usize,
        seed: u64,
        limit_ms: u64,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{0}")]
    Compress(#[from] crate::compress::CompressError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphGenParams {
    pub base_nodes: usize,
    pub variations: usize,
    /// Upper bound, at most 0.5, of the per-copy node deletion rate; each
    /// copy draws its rate uniformly from `[0, delete_fraction]`.
    pub delete_fraction: f64,
    pub edges_per_node: f64,
    pub labels: usize,
    pub seed: u64,
}

impl GraphGenParams {
    fn check(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::Param(m.to_string()));
        if self.base_nodes == 0 || self.variations == 0 || self.labels == 0 {
            return bad("base_nodes, variations and labels must be positive");
        }
        if !(0.0..=0.5).contains(&self.delete_fraction) {
            return bad("delete_fraction must lie in [0, 0.5]");
        }
        if !(self.edges_per_node.is_finite() && self.edges_per_node >= 0.0) {
            return bad("edges_per_node must be a non-negative number");
        }
        Ok(())
    }
}

/// The `i`-th generated label: `a`…`z`, `aa`, `ab`, ….
pub fn label_name(mut i: usize) -> Label {
    let mut s = Vec::new();
    loop {
        s.push(b'a' + (i % 26) as u8);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    s.reverse();
    Label::new(std::str::from_utf8(&s).unwrap()).unwrap()
}

/// Random distinct non-loop edges over `0..n` until `target` exist.
fn fill_edges<R: Rng>(
    rng: &mut R,
    edges: &mut BTreeSet<(usize, usize)>,
    target: usize,
    mut pick: impl FnMut(&mut R) -> (usize, usize),
) {
    while edges.len() < target {
        let (s, d) = pick(rng);
        if s != d {
            edges.insert((s, d));
        }
    }
}

/// Base subgraph, `variations` copies each losing a random share of its
/// nodes, then random edges between copies until the edge/node ratio is
/// reached. Pairs inside one copy are used only once every pair across
/// copies is exhausted. Node ids are 1..=n in copy order.
pub fn gen_graph(p: &GraphGenParams) -> Result<LabeledGraph, GenError> {
    p.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let b = p.base_nodes;
    let base_labels: Vec<usize> = (0..b).map(|_| rng.gen_range(0..p.labels)).collect();
    let base_target = ((b as f64 * p.edges_per_node).round() as usize).min(b * (b - 1));
    let mut base = BTreeSet::new();
    fill_edges(&mut rng, &mut base, base_target, |r| {
        (r.gen_range(0..b), r.gen_range(0..b))
    });

    let mut labels = Vec::new();
    let mut copy_of = Vec::new();
    let mut copy_sizes = Vec::with_capacity(p.variations);
    let mut edges = BTreeSet::new();
    for c in 0..p.variations {
        let mut pos = vec![usize::MAX; b];
        let rate = rng.gen_range(0.0..=p.delete_fraction);
        for (i, slot) in pos.iter_mut().enumerate() {
            if !rng.gen_bool(rate) {
                *slot = labels.len();
                labels.push(base_labels[i]);
                copy_of.push(c);
            }
        }
        copy_sizes.push(pos.iter().filter(|&&x| x != usize::MAX).count());
        for &(s, d) in &base {
            if pos[s] != usize::MAX && pos[d] != usize::MAX {
                edges.insert((pos[s], pos[d]));
            }
        }
    }

    let n = labels.len();
    let target = (n as f64 * p.edges_per_node).round() as usize;
    if target > n * n.saturating_sub(1) {
        return Err(GenError::Density { nodes: n, target });
    }
    let across = n * n - copy_sizes.iter().map(|k| k * k).sum::<usize>();
    if edges.len() + across >= target {
        fill_edges(&mut rng, &mut edges, target, |r| loop {
            let (s, d) = (r.gen_range(0..n), r.gen_range(0..n));
            if copy_of[s] != copy_of[d] {
                return (s, d);
            }
        });
    } else {
        fill_edges(&mut rng, &mut edges, target, |r| (r.gen_range(0..n), r.gen_range(0..n)));
    }

    let mut g = LabeledGraph::new();
    for (i, &l) in labels.iter().enumerate() {
        g.add_node(i as NodeId + 1, label_name(l)).unwrap();
    }
    for (s, d) in edges {
        g.add_edge(s as NodeId + 1, d as NodeId + 1).unwrap();
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternGenParams {
    pub nodes: usize,
    pub edges: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedPattern {
    pub graph: PatternGraph,
    /// False when fewer edges than a spanning tree were requested.
    pub connected: bool,
}

/// Random spanning tree with random orientations, then uniform distinct
/// edges (self-loops allowed); labels drawn uniformly from `alphabet`.
pub fn gen_pattern(p: &PatternGenParams, alphabet: &[Label]) -> Result<GeneratedPattern, GenError> {
    if p.nodes == 0 {
        return Err(GenError::Param("pattern needs at least one node".into()));
    }
    if alphabet.is_empty() {
        return Err(GenError::Param("alphabet is empty".into()));
    }
    if p.edges > p.nodes * p.nodes {
        return Err(GenError::Density {
            nodes: p.nodes,
            target: p.edges,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut g = LabeledGraph::new();
    for i in 0..p.nodes {
        g.add_node(i as NodeId + 1, alphabet.choose(&mut rng).unwrap().clone())
            .unwrap();
    }
    let mut edges = BTreeSet::new();
    for i in 1..p.nodes.min(p.edges + 1) {
        let j = rng.gen_range(0..i);
        edges.insert(if rng.gen_bool(0.5) { (i, j) } else { (j, i) });
    }
    while edges.len() < p.edges {
        edges.insert((rng.gen_range(0..p.nodes), rng.gen_range(0..p.nodes)));
    }
    for (s, d) in edges {
        g.add_edge(s as NodeId + 1, d as NodeId + 1).unwrap();
    }
    Ok(GeneratedPattern {
        graph: g,
        connected: p.edges + 1 >= p.nodes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// Ordered node sets with edge-scan predecessors.
    Plain,
    /// Dense ids, in-adjacency arrays and sorted-vector sets.
    Indexed,
    /// Dense ids, in-adjacency arrays and bit sets.
    Bitset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub base_nodes: Vec<usize>,
    pub variations: Vec<usize>,
    pub delete_fraction: Vec<f64>,
    pub edges_per_node: Vec<f64>,
    pub labels: Vec<usize>,
    pub seeds: Vec<u64>,
    pub pattern_nodes: usize,
    pub pattern_edges: usize,
    pub repetitions: usize,
    pub timeout_ms: Option<u64>,
    pub optimized: bool,
    pub baseline: BaselineKind,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            base_nodes: vec![50],
            variations: vec![20],
            delete_fraction: vec![0.5],
            edges_per_node: vec![1.25],
            labels: vec![4],
            seeds: vec![1],
            pattern_nodes: 6,
            pattern_edges: 8,
            repetitions: 5,
            timeout_ms: None,
            optimized: true,
            baseline: BaselineKind::Indexed,
        }
    }
}

fn parse_list<T: std::str::FromStr>(value: &str, line: usize) -> Result<Vec<T>, GenError> {
    value
        .split(',')
        .map(|v| {
            v.trim().parse().map_err(|_| GenError::Config {
                line,
                msg: format!("bad value `{}`", v.trim()),
            })
        })
        .collect()
}

fn parse_one<T: std::str::FromStr>(value: &str, line: usize) -> Result<T, GenError> {
    value.trim().parse().map_err(|_| GenError::Config {
        line,
        msg: format!("bad value `{}`", value.trim()),
    })
}

impl BenchConfig {
    /// `key = value` lines; list-valued keys take comma-separated values;
    /// `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, GenError> {
        let mut c = BenchConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| GenError::Config {
                line,
                msg: "expected key = value".into(),
            })?;
            match key.trim() {
                "base_nodes" => c.base_nodes = parse_list(value, line)?,
                "variations" => c.variations = parse_list(value, line)?,
                "delete_fraction" => c.delete_fraction = parse_list(value, line)?,
                "edges_per_node" => c.edges_per_node = parse_list(value, line)?,
                "labels" => c.labels = parse_list(value, line)?,
                "seeds" => c.seeds = parse_list(value, line)?,
                "pattern_nodes" => c.pattern_nodes = parse_one(value, line)?,
                "pattern_edges" => c.pattern_edges = parse_one(value, line)?,
                "repetitions" => c.repetitions = parse_one(value, line)?,
                "timeout_ms" => c.timeout_ms = Some(parse_one(value, line)?),
                "optimized" => c.optimized = parse_one(value, line)?,
                "baseline" => {
                    c.baseline = match value.trim() {
                        "plain" => BaselineKind::Plain,
                        "indexed" => BaselineKind::Indexed,
                        "bitset" => BaselineKind::Bitset,
                        v => {
                            return Err(GenError::Config {
                                line,
                                msg: format!("unknown baseline `{v}`"),
                            })
                        }
                    }
                }
                k => {
                    return Err(GenError::Config {
                        line,
                        msg: format!("unknown key `{k}`"),
                    })
                }
            }
        }
        if c.repetitions == 0 {
            return Err(GenError::Param("repetitions must be positive".into()));
        }
        Ok(c)
    }

    /// Graph parameter sets in sweep order, without the seed. Later keys
    /// vary fastest: base_nodes, variations, delete_fraction,
    /// edges_per_node, labels.
    pub fn graph_sweep(&self) -> Vec<GraphGenParams> {
        let mut out = Vec::new();
        for &base_nodes in &self.base_nodes {
            for &variations in &self.variations {
                for &delete_fraction in &self.delete_fraction {
                    for &edges_per_node in &self.edges_per_node {
                        for &labels in &self.labels {
                            out.push(GraphGenParams {
                                base_nodes,
                                variations,
                                delete_fraction,
                                edges_per_node,
                                labels,
                                seed: 0,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub graph_index: usize,
    pub nodes: usize,
    pub edges: usize,
    pub grammar_size: usize,
    pub ratio: f64,
    pub baseline_ms: f64,
    pub grammar_ms: f64,
    pub pattern_nodes: usize,
    pub pattern_edges: usize,
    pub seed: u64,
}

pub const CSV_HEADER: &str =
    "graphindex,nodes,edges,grammar_size,ratio,baseline_ms,grammar_ms,pat_nodes,pat_edges,seed";

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.4},{:.3},{:.3},{},{},{}",
            self.graph_index,
            self.nodes,
            self.edges,
            self.grammar_size,
            self.ratio,
            self.baseline_ms,
            self.grammar_ms,
            self.pattern_nodes,
            self.pattern_edges,
            self.seed
        )
    }
}

pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(out, "{}", r.csv_row()).unwrap();
    }
    out
}

fn median(mut v: Vec<Duration>) -> f64 {
    v.sort();
    let mid = v.len() / 2;
    let d = if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2
    };
    d.as_secs_f64() * 1e3
}

/// Grammar result in original node ids, keyed like the baseline result.
fn expand_to_original(idx: &GrammarIndex, map: &PathMap, r: &crate::sim::SimResult) -> Result<NodeSim, GenError> {
    let expanded = r.expand(idx).map_err(SimError::from)?;
    Ok(expanded
        .into_iter()
        .map(|(u, vs)| {
            (
                u,
                vs.into_iter().map(|v| map.get(v).expect("complete path map")).collect(),
            )
        })
        .collect())
}

/// One prepared benchmark cell.
pub struct BenchCell {
    pub graph: LabeledGraph,
    pub pattern: PatternGraph,
    pub metrics: SizeMetrics,
    pub sim_index: SimIndex,
    pub map: PathMap,
}

impl BenchCell {
    pub fn new(params: &GraphGenParams, pattern: &PatternGenParams) -> Result<Self, GenError> {
        let graph = gen_graph(params)?;
        let alphabet: Vec<Label> = graph.alphabet().into_iter().collect();
        let pattern = gen_pattern(pattern, &alphabet)?.graph;
        let (gg, map) = compress(&graph, CompressOptions::default())?;
        let metrics = SizeMetrics::new(&graph, &gg);
        let sim_index = SimIndex::new(&gg).map_err(SimError::from)?;
        Ok(BenchCell {
            graph,
            pattern,
            metrics,
            sim_index,
            map,
        })
    }

    /// Runs both engines once, checking that they agree.
    pub fn verify(&self, opts: SimOptions) -> Result<bool, GenError> {
        let base = simulate_baseline(&self.graph, &self.pattern)?;
        let run = GrammarSimulation::new(&self.sim_index, &self.pattern, opts)?.run();
        Ok(expand_to_original(self.sim_index.grammar(), &self.map, &run)? == base)
    }
}

/// Median wall-clock times in milliseconds of both engines on one cell.
pub fn time_cell(
    cell: &BenchCell,
    reps: usize,
    opts: SimOptions,
    baseline: BaselineKind,
) -> Result<(f64, f64), GenError> {
    let indexed = IndexedGraph::new(&cell.graph);
    let mut base_times = Vec::with_capacity(reps);
    let mut gram_times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t = Instant::now();
        let r = match baseline {
            BaselineKind::Plain => simulate_baseline(&cell.graph, &cell.pattern)?,
            BaselineKind::Indexed => indexed.simulate(&cell.pattern)?,
            BaselineKind::Bitset => indexed.simulate_bitset(&cell.pattern)?,
        };
        base_times.push(t.elapsed());
        std::hint::black_box(r);

        let t = Instant::now();
        let r = GrammarSimulation::new(&cell.sim_index, &cell.pattern, opts)?.run();
        gram_times.push(t.elapsed());
        std::hint::black_box(r);
    }
    Ok((median(base_times), median(gram_times)))
}

/// Runs every (graph parameters, seed) cell of the sweep.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRecord>, GenError> {
    let opts = SimOptions {
        optimized: cfg.optimized,
    };
    let mut records = Vec::new();
    for (graph_index, params) in cfg.graph_sweep().into_iter().enumerate() {
        for &seed in &cfg.seeds {
            let started = Instant::now();
            let params = GraphGenParams { seed, ..params };
            let pattern = PatternGenParams {
                nodes: cfg.pattern_nodes,
                edges: cfg.pattern_edges,
                seed,
            };
            let cell = BenchCell::new(&params, &pattern)?;
            if !cell.verify(opts)? {
                return Err(GenError::Mismatch { graph_index, seed });
            }
            let (baseline_ms, grammar_ms) = time_cell(&cell, cfg.repetitions, opts, cfg.baseline)?;
            if let Some(limit_ms) = cfg.timeout_ms {
                if started.elapsed() > Duration::from_millis(limit_ms) {
                    return Err(GenError::Timeout {
                        graph_index,
                        seed,
                        limit_ms,
                    });
                }
            }
            records.push(BenchRecord {
                graph_index,
                nodes: cell.metrics.nodes,
                edges: cell.metrics.edges,
                grammar_size: cell.metrics.grammar_size,
                ratio: cell.metrics.ratio,
                baseline_ms,
                grammar_ms,
                pattern_nodes: cell.pattern.node_count(),
                pattern_edges: cell.pattern.edge_count(),
                seed,
            });
        }
    }
    Ok(records)
}
