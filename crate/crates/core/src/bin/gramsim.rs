use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gramsim::baseline::simulate_baseline;
use gramsim::compress::{compress, CompressOptions, SizeMetrics};
use gramsim::genbench::{
    gen_graph, gen_pattern, run_bench, to_csv, BenchConfig, GenError, GraphGenParams, PatternGenParams,
};
use gramsim::grammar::GrammarIndex;
use gramsim::sim::{simulate_indexed, SimIndex, SimOptions};
use gramsim::{GraphGrammar, Label, LabeledGraph, NodeId, PathMap};

#[derive(Debug, Parser)]
#[command(
    name = "gramsim",
    version,
    about = "Grammar-compressed graphs and pattern simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compress an edge-list graph into a grammar.
    Compress {
        #[arg(short, long)]
        input: PathBuf,
        /// Grammar output; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Where to write the `<grammar path> <original id>` map.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Expand a grammar back into an edge-list graph.
    Decompress {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Path map restoring the original node ids; depth-first ids otherwise.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Simulate a pattern over a grammar or an uncompressed graph.
    Simulate(SimulateArgs),
    /// Generate a graph from many damaged copies of one random subgraph.
    GenGraph {
        #[arg(long)]
        base_nodes: usize,
        #[arg(long)]
        variations: usize,
        #[arg(long, default_value_t = 0.5)]
        delete_fraction: f64,
        #[arg(long, default_value_t = 1.25)]
        edges_per_node: f64,
        #[arg(long, default_value_t = 4)]
        labels: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a random pattern graph.
    GenPattern {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        edges: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Comma-separated labels to draw from.
        #[arg(
            long,
            value_delimiter = ',',
            conflicts_with = "graph",
            required_unless_present = "graph"
        )]
        alphabet: Vec<String>,
        /// Draw labels from the alphabet of this graph.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Time both engines over a parameter sweep and write CSV.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Run only this seed instead of the configured list.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        repetitions: Option<usize>,
        #[arg(long)]
        timeout_ms: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, conflicts_with = "graph", required_unless_present = "graph")]
    grammar: Option<PathBuf>,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    pattern: PathBuf,
    /// Memoized predecessors and intersection-based sharpening.
    #[arg(long)]
    optimized: bool,
    /// Print `(pattern node, graph node)` pairs instead of suffixes.
    #[arg(long)]
    expand: bool,
    /// Path map translating expanded nodes to original ids.
    #[arg(long, requires = "grammar")]
    map: Option<PathBuf>,
}

enum Failure {
    Data(String),
    Mismatch(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Data(_) => 2,
            Failure::Mismatch(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Data(m) | Failure::Mismatch(m) => m,
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn data(path: &Path, err: impl std::fmt::Display) -> Failure {
    Failure::Data(format!("{}: {err}", path.display()))
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| data(path, e))
}

fn read_graph(path: &Path) -> CliResult<LabeledGraph> {
    LabeledGraph::parse(&read(path)?).map_err(|e| data(path, e))
}

fn read_grammar(path: &Path) -> CliResult<(GraphGrammar, GrammarIndex)> {
    let gg = GraphGrammar::parse(&read(path)?).map_err(|e| data(path, e))?;
    let idx = gg.index().map_err(|e| data(path, e))?;
    Ok((gg, idx))
}

fn read_map(path: &Path, idx: &GrammarIndex) -> CliResult<PathMap> {
    PathMap::parse(&read(path)?, idx).map_err(|e| data(path, e))
}

fn write(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| data(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|e| Failure::Data(format!("standard output: {e}")))
        }
    }
}

fn relabel(g: &LabeledGraph, map: &PathMap) -> LabeledGraph {
    let mut out = LabeledGraph::new();
    for (v, l) in g.nodes() {
        out.add_node(map.get(v).expect("complete path map"), l.clone())
            .expect("bijective path map");
    }
    for (s, d) in g.edges() {
        out.add_edge(map.get(s).unwrap(), map.get(d).unwrap())
            .expect("mapped nodes exist");
    }
    out
}

fn node_pairs<'a>(sets: impl IntoIterator<Item = (NodeId, Vec<NodeId>)> + 'a) -> String {
    let mut out = String::new();
    for (u, vs) in sets {
        for v in vs {
            writeln!(out, "{u} {v}").unwrap();
        }
    }
    out
}

fn run_simulate(a: &SimulateArgs) -> CliResult<String> {
    let q = read_graph(&a.pattern)?;
    if let Some(path) = &a.graph {
        let g = read_graph(path)?;
        let r = simulate_baseline(&g, &q).map_err(|e| Failure::Data(e.to_string()))?;
        if r.is_empty() {
            return Ok("NO-MATCH\n".into());
        }
        return Ok(node_pairs(r.into_iter().map(|(u, vs)| (u, vs.into_iter().collect()))));
    }
    let path = a.grammar.as_ref().expect("clap requires --grammar or --graph");
    let (_, idx) = read_grammar(path)?;
    let map = a.map.as_deref().map(|m| read_map(m, &idx)).transpose()?;
    let ix = SimIndex::from_index(idx);
    let r = simulate_indexed(&ix, &q, SimOptions { optimized: a.optimized }).map_err(|e| data(path, e))?;
    if r.is_empty() {
        return Ok("NO-MATCH\n".into());
    }
    if !a.expand {
        let mut out = String::new();
        for (u, gps) in r.pairs() {
            writeln!(out, "{u} {gps}").unwrap();
        }
        return Ok(out);
    }
    let expanded = r.expand(ix.grammar()).map_err(|e| data(path, e))?;
    Ok(node_pairs(expanded.into_iter().map(|(u, vs)| {
        let mut vs: Vec<NodeId> = match &map {
            Some(m) => vs.into_iter().map(|v| m.get(v).expect("complete path map")).collect(),
            None => vs.into_iter().collect(),
        };
        vs.sort_unstable();
        (u, vs)
    })))
}

fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Compress { input, output, map } => {
            let g = read_graph(&input)?;
            let (gg, pm) = compress(&g, CompressOptions::default()).map_err(|e| data(&input, e))?;
            let m = SizeMetrics::new(&g, &gg);
            eprintln!(
                "nodes {} edges {} grammar_size {} ratio {:.4}",
                m.nodes, m.edges, m.grammar_size, m.ratio
            );
            if let Some(mp) = &map {
                let idx = gg.index().map_err(|e| data(&input, e))?;
                write(Some(mp), &pm.to_text(&idx))?;
            }
            write(output.as_deref(), &gg.to_text())
        }
        Command::Decompress { input, output, map } => {
            let (_, idx) = read_grammar(&input)?;
            let (g, _) = idx.decompress();
            let g = match &map {
                Some(m) => relabel(&g, &read_map(m, &idx)?),
                None => g,
            };
            write(output.as_deref(), &g.to_edge_list())
        }
        Command::Simulate(a) => write(None, &run_simulate(&a)?),
        Command::GenGraph {
            base_nodes,
            variations,
            delete_fraction,
            edges_per_node,
            labels,
            seed,
            output,
        } => {
            let p = GraphGenParams {
                base_nodes,
                variations,
                delete_fraction,
                edges_per_node,
                labels,
                seed,
            };
            let g = gen_graph(&p).map_err(|e| Failure::Data(e.to_string()))?;
            write(output.as_deref(), &g.to_edge_list())
        }
        Command::GenPattern {
            nodes,
            edges,
            seed,
            alphabet,
            graph,
            output,
        } => {
            let alphabet: Vec<Label> = match &graph {
                Some(path) => read_graph(path)?.alphabet().into_iter().collect(),
                None => alphabet
                    .iter()
                    .map(|s| Label::new(s.trim()).map_err(|e| Failure::Data(format!("label `{s}`: {e}"))))
                    .collect::<CliResult<_>>()?,
            };
            let p = gen_pattern(&PatternGenParams { nodes, edges, seed }, &alphabet)
                .map_err(|e| Failure::Data(e.to_string()))?;
            let mut text = String::new();
            if !p.connected {
                text.push_str("# disconnected: fewer edges than a spanning tree\n");
            }
            text.push_str(&p.graph.to_edge_list());
            write(output.as_deref(), &text)
        }
        Command::Bench {
            config,
            seed,
            repetitions,
            timeout_ms,
            output,
        } => {
            let mut cfg = BenchConfig::parse(&read(&config)?).map_err(|e| data(&config, e))?;
            if let Some(s) = seed {
                cfg.seeds = vec![s];
            }
            if let Some(r) = repetitions {
                if r == 0 {
                    return Err(Failure::Data("repetitions must be positive".into()));
                }
                cfg.repetitions = r;
            }
            if timeout_ms.is_some() {
                cfg.timeout_ms = timeout_ms;
            }
            let records = run_bench(&cfg).map_err(|e| match e {
                GenError::Mismatch { .. } => Failure::Mismatch(e.to_string()),
                e => Failure::Data(e.to_string()),
            })?;
            write(output.as_deref(), &to_csv(&records))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
