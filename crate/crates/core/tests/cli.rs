mod common;

use std::path::Path;
use std::process::{Command, Output};

use gramsim::LabeledGraph;
use tempfile::TempDir;

use common::*;

fn gramsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gramsim")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn compress_then_decompress_restores_original_ids() {
    let dir = TempDir::new().unwrap();
    let gg = dir.path().join("sample.gg");
    let map = dir.path().join("sample.map");
    let input = data("sample.el");
    let o = gramsim(&["compress", "-i", path(&input), "-o", path(&gg), "--map", path(&map)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("grammar_size 11"));

    let o = gramsim(&["decompress", "-i", path(&gg), "--map", path(&map)]);
    assert!(o.status.success());
    assert_eq!(LabeledGraph::parse(&stdout(&o)).unwrap(), sample_graph());

    let o = gramsim(&["decompress", "-i", path(&gg)]);
    let h = LabeledGraph::parse(&stdout(&o)).unwrap();
    assert_eq!((h.node_count(), h.edge_count()), (9, 8));
}

#[test]
fn simulate_on_grammar_prints_suffixes_or_nodes() {
    let (gg, q) = (data("sample.gg"), data("cd.el"));
    let o = gramsim(&["simulate", "--grammar", path(&gg), "--pattern", path(&q)]);
    assert_eq!(stdout(&o), "1 S/3:CDCD/1:CD/1:c\n2 S/3:CDCD/1:CD/2:d\n");
    for extra in [&[][..], &["--optimized"][..]] {
        let mut args = vec!["simulate", "--grammar", path(&gg), "--pattern", path(&q), "--expand"];
        args.extend_from_slice(extra);
        let o = gramsim(&args);
        assert!(o.status.success());
        assert_eq!(stdout(&o), "1 6\n2 7\n");
    }
}

#[test]
fn simulate_on_graph_matches_grammar_output() {
    let o = gramsim(&[
        "simulate",
        "--graph",
        path(&data("sample.el")),
        "--pattern",
        path(&data("cd.el")),
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "1 6\n2 7\n");
}

#[test]
fn expansion_through_a_map_uses_original_ids() {
    let dir = TempDir::new().unwrap();
    let g = dir.path().join("g.el");
    std::fs::write(&g, "10 c\n20 d\n30 c\n40 d\n10 20\n30 40\n20 30\n40 30\n").unwrap();
    let (gg, map) = (dir.path().join("g.gg"), dir.path().join("g.map"));
    assert!(
        gramsim(&["compress", "-i", path(&g), "-o", path(&gg), "--map", path(&map)])
            .status
            .success()
    );
    let q = data("cd.el");
    let direct = gramsim(&["simulate", "--graph", path(&g), "--pattern", path(&q)]);
    let via = gramsim(&[
        "simulate",
        "--grammar",
        path(&gg),
        "--pattern",
        path(&q),
        "--expand",
        "--map",
        path(&map),
    ]);
    assert_eq!(stdout(&direct), "1 10\n1 30\n2 20\n2 40\n");
    assert_eq!(stdout(&via), stdout(&direct));
}

#[test]
fn empty_simulation_prints_no_match() {
    let dir = TempDir::new().unwrap();
    let q = dir.path().join("q.el");
    std::fs::write(&q, "1 b\n2 b\n1 2\n").unwrap();
    for engine in ["--graph", "--grammar"] {
        let input = if engine == "--graph" {
            data("sample.el")
        } else {
            data("sample.gg")
        };
        let o = gramsim(&["simulate", engine, path(&input), "--pattern", path(&q)]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), "NO-MATCH\n");
    }
}

#[test]
fn missing_input_exits_with_data_error_naming_the_path() {
    let o = gramsim(&["simulate", "--graph", "missing.el", "--pattern", path(&data("cd.el"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.el"));
}

#[test]
fn malformed_input_exits_with_data_error() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.el");
    std::fs::write(&bad, "1 c\n1 2\n").unwrap();
    let o = gramsim(&["compress", "-i", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.el"));
    assert!(stderr(&o).contains("line 2"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(gramsim(&[]).status.code(), Some(1));
    assert_eq!(gramsim(&["simulate", "--pattern", "q.el"]).status.code(), Some(1));
    let both = gramsim(&["simulate", "--graph", "a", "--grammar", "b", "--pattern", "q"]);
    assert_eq!(both.status.code(), Some(1));
    assert_eq!(gramsim(&["--help"]).status.code(), Some(0));
}

#[test]
fn generators_write_edge_lists() {
    let o = gramsim(&["gen-graph", "--base-nodes", "10", "--variations", "4", "--seed", "7"]);
    assert!(o.status.success());
    let g = LabeledGraph::parse(&stdout(&o)).unwrap();
    assert!(g.node_count() <= 40 && g.node_count() >= 20);

    let o = gramsim(&[
        "gen-pattern",
        "--nodes",
        "6",
        "--edges",
        "8",
        "--seed",
        "3",
        "--alphabet",
        "a,b,c",
    ]);
    let q = LabeledGraph::parse(&stdout(&o)).unwrap();
    assert_eq!((q.node_count(), q.edge_count()), (6, 8));
    assert!(!stdout(&o).contains("disconnected"));

    let o = gramsim(&["gen-pattern", "--nodes", "4", "--edges", "1", "--alphabet", "a"]);
    assert!(stdout(&o).starts_with("# disconnected"));

    let o = gramsim(&[
        "gen-pattern",
        "--nodes",
        "1",
        "--edges",
        "0",
        "--graph",
        path(&data("sample.el")),
    ]);
    assert_eq!(LabeledGraph::parse(&stdout(&o)).unwrap().node_count(), 1);
}

#[test]
fn bench_writes_one_row_per_cell() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bench.cfg");
    std::fs::write(
        &cfg,
        "# five graph settings, three seeds\n\
         base_nodes = 6\nvariations = 2, 3, 4, 5, 6\nedges_per_node = 1.25\nlabels = 2\n\
         seeds = 1, 2, 3\npattern_nodes = 3\npattern_edges = 3\nrepetitions = 1\n",
    )
    .unwrap();
    let out = dir.path().join("bench.csv");
    let o = gramsim(&["bench", "--config", path(&cfg), "-o", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "graphindex,nodes,edges,grammar_size,ratio,baseline_ms,grammar_ms,pat_nodes,pat_edges,seed"
    );
    assert_eq!(lines.len(), 16);
    assert!(lines[1].starts_with("0,") && lines[1].ends_with(",1"));

    let o = gramsim(&["bench", "--config", path(&cfg), "--seed", "9", "--repetitions", "2"]);
    assert_eq!(stdout(&o).lines().count(), 6);
}

#[test]
fn bench_config_errors_are_data_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "frobnicate = 3\n").unwrap();
    let o = gramsim(&["bench", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown key"));
}
