use std::path::PathBuf;
use std::process::{Command, Output};

use cypher_ref::fixtures;
use cypher_ref_cli::parse_counted_json;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cypher-ref"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn teachers_reachability_as_tsv() {
    let g = fixture("teachers.json");
    let o = cli(&[
        "--graph",
        g.to_str().unwrap(),
        "--query",
        "MATCH (x)-[:KNOWS*]->(y) RETURN x, y",
        "--format",
        "tsv",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x\ty");
    assert_eq!(lines.len(), 1 + 6);
}

#[test]
fn literal_return_without_graph() {
    let o = cli(&["--query", "RETURN 1 AS x"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "x\n1\n");
}

#[test]
fn exit_codes() {
    let o = cli(&["--query", "MATCH ("]);
    assert_eq!(o.status.code(), Some(1));
    let diag = String::from_utf8_lossy(&o.stderr);
    assert!(diag.contains("1:8"), "{diag}");

    let o = cli(&["--query", "RETURN 1 < 'a' AS x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:8"));

    let o = cli(&[
        "--graph",
        "/nonexistent/graph.json",
        "--query",
        "RETURN 1 AS x",
    ]);
    assert_eq!(o.status.code(), Some(3));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"nodes": [], "relationships": [{"id": "r", "type": "T", "src": "a", "tgt": "b"}]}"#,
    )
    .unwrap();
    let o = cli(&["--graph", bad.to_str().unwrap(), "--query", "RETURN 1 AS x"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn counted_json_round_trips() {
    let g = fixture("citation.json");
    let q = "MATCH p = (a)-[r*0..2]-(b) UNWIND [1, 1] AS k RETURN a, r, p, {n: b, k: k} AS m";
    let o = cli(&[
        "--graph",
        g.to_str().unwrap(),
        "--query",
        q,
        "--format",
        "counted-json",
    ]);
    assert!(o.status.success());
    let graph = fixtures::citation();
    let back = parse_counted_json(&graph, stdout(&o).trim()).unwrap();
    let direct = cypher_ref::output(&cypher_ref::parse_query(q).unwrap(), &graph).unwrap();
    assert_eq!(back, direct);
    assert!(back.multiplicity(back.iter().next().unwrap().0) >= 2);
}

#[test]
fn json_rows_repeat_by_multiplicity() {
    let o = cli(&[
        "--query",
        "UNWIND [2, 1, 2] AS v RETURN v",
        "--format",
        "json",
    ]);
    assert_eq!(
        stdout(&o),
        "{\"fields\":[\"v\"],\"rows\":[{\"v\":1},{\"v\":2},{\"v\":2}]}\n"
    );
}

#[test]
fn oracle_flag_reports_agreement() {
    let g = fixture("teachers.json");
    let o = cli(&[
        "--graph",
        g.to_str().unwrap(),
        "--oracle",
        "--query",
        "MATCH (x:Teacher)-[:KNOWS*1..2]->()-[:KNOWS*1..2]->(y:Teacher) RETURN x, y",
    ]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("agree"));
}

#[test]
fn batch_file_and_sequential_mode_agree() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("q.cypher");
    std::fs::write(
        &file,
        "MATCH (a)-[:cites*]->(b) RETURN a, b;\nMATCH (a:Researcher) RETURN a.name AS name;\n",
    )
    .unwrap();
    let g = fixture("citation.json");
    let args = [
        "--graph",
        g.to_str().unwrap(),
        "--query-file",
        file.to_str().unwrap(),
    ];
    let par = cli(&args);
    let mut seq_args = args.to_vec();
    seq_args.push("--sequential");
    let seq = cli(&seq_args);
    assert!(par.status.success());
    assert_eq!(par.stdout, seq.stdout);
    assert!(stdout(&par).contains("\"Elin\""));
    assert_eq!(stdout(&par).matches("\n\n").count(), 1);
}

#[test]
fn gen_is_deterministic() {
    let a = cli(&["gen", "--seed", "42"]);
    let b = cli(&["gen", "--seed", "42"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("// query"));
}
