//! Acceptance gate: one PASS/FAIL line per criterion.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use cypher_ref::ast::{Clause, PathPattern, PatternTuple, Query};
use cypher_ref::evaluator::{equals, Evaluator};
use cypher_ref::fixtures::{self, check_expression_case, expression_cases, expression_env};
use cypher_ref::matcher::Matcher;
use cypher_ref::oracle::{gen_case, GenConfig, OracleEngine};
use cypher_ref::values::{PathValue, ValueMap};
use cypher_ref::{
    parse_expr, parse_pattern, parse_query, Engine, ExecMode, PropertyGraph, Record, Table,
    Trilean, Value,
};
use cypher_ref_cli::parse_counted_json;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<String, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))?;
    Ok(format!("{took:.2?}"))
}

fn rec(g: &PropertyGraph, pairs: &[(&str, &str)]) -> Record {
    pairs
        .iter()
        .map(|(a, n)| (a.to_string(), Value::Node(g.node_by_name(n).unwrap())))
        .collect()
}

fn first_match(q: &Query) -> PatternTuple {
    match q {
        Query::Single { clauses, .. } => match &clauses[0] {
            Clause::Match { pattern, .. } => pattern.clone(),
            _ => panic!("first clause is not MATCH"),
        },
        _ => panic!("not a single query"),
    }
}

fn teachers_table() -> Outcome {
    let start = Instant::now();
    let g = fixtures::teachers();
    let input = Table::from_records(
        ["x".to_string()].into(),
        [rec(&g, &[("x", "n1")]), rec(&g, &[("x", "n3")])],
    )
    .unwrap();
    let q = parse_query("MATCH (x)-[:KNOWS*]->(y) RETURN x, y").unwrap();
    let got = Engine::new(&g)
        .run_query(&q, &input)
        .map_err(|e| e.to_string())?;
    let want = Table::from_records(
        ["x".to_string(), "y".to_string()].into(),
        [("n1", "n2"), ("n1", "n3"), ("n1", "n4"), ("n3", "n4")]
            .iter()
            .map(|(x, y)| rec(&g, &[("x", x), ("y", y)])),
    )
    .unwrap();
    ensure(got == want, || format!("got {got:?}"))?;
    within(Duration::from_secs(1), start).map(|t| format!("4 rows, {t}"))
}

fn mult_match() -> Outcome {
    let start = Instant::now();
    let g = fixtures::teachers();
    let q =
        parse_query("MATCH (x:Teacher)-[:KNOWS*1..2]->()-[:KNOWS*1..2]->(y:Teacher) RETURN x, y")
            .unwrap();
    let t = Engine::new(&g).output(&q).map_err(|e| e.to_string())?;
    let m = t.multiplicity(&rec(&g, &[("x", "n1"), ("y", "n4")]));
    ensure(m == 2, || format!("multiplicity {m}"))?;
    within(Duration::from_secs(1), start).map(|t| format!("multiplicity 2, {t}"))
}

fn var_length() -> Outcome {
    let g = fixtures::teachers();
    let src = "(x:Teacher)-[:KNOWS*1..2]->(z)-[:KNOWS*1..2]->(y:Teacher)";
    let pi = parse_pattern(src).unwrap();
    let ev = Evaluator::new(&g);
    let m = Matcher::new(&ev, ExecMode::Sequential);
    let t = m
        .match_tuple(&PatternTuple(vec![pi.clone()]), &Record::new())
        .map_err(|e| e.to_string())?;
    let n = |s: &str| g.node_by_name(s).unwrap();
    let r = |s: &str| g.rel_by_name(s).unwrap();
    let p2 = PathValue::new(
        vec![n("n1"), n("n2"), n("n3"), n("n4")],
        vec![r("r1"), r("r2"), r("r3")],
    )
    .unwrap();
    for z in ["n2", "n3"] {
        let u = rec(&g, &[("x", "n1"), ("y", "n4"), ("z", z)]);
        ensure(t.multiplicity(&u) == 1, || {
            format!("z={z} missing from match")
        })?;
        ensure(
            m.satisfies_path(&p2, &pi, &u).map_err(|e| e.to_string())?,
            || format!("p2 does not satisfy pi under z={z}"),
        )?;
    }
    let got: Vec<PathPattern> = pi.rigid_expansions(u64::MAX);
    let want: Vec<PathPattern> = [(1, 1), (1, 2), (2, 1), (2, 2)]
        .iter()
        .map(|(a, b)| {
            parse_pattern(&format!(
                "(x:Teacher)-[:KNOWS*{a}]->(z)-[:KNOWS*{b}]->(y:Teacher)"
            ))
            .unwrap()
        })
        .collect();
    ensure(
        got.len() == 4 && want.iter().all(|w| got.contains(w)),
        || format!("rigid expansion gave {} patterns", got.len()),
    )?;
    Ok("u2 and u2' present, rigid(pi) has 4 elements".into())
}

fn truth_tables() -> Outcome {
    use Trilean::*;
    let lit = |x: Trilean| match x {
        True => "true",
        False => "false",
        Null => "null",
    };
    // rows: left operand, columns: right operand, both in order true, false, null
    let tables = [
        (
            "OR",
            [[True, True, True], [True, False, Null], [True, Null, Null]],
        ),
        (
            "AND",
            [
                [True, False, Null],
                [False, False, False],
                [Null, False, Null],
            ],
        ),
        (
            "XOR",
            [[False, True, Null], [True, False, Null], [Null, Null, Null]],
        ),
    ];
    let order = [True, False, Null];
    let g = PropertyGraph::empty();
    let ev = Evaluator::new(&g);
    let eval = |src: &str| ev.eval(&parse_expr(src).unwrap(), &Record::new()).unwrap();
    let mut cells = 0;
    for (op, table) in tables {
        for (i, a) in order.iter().enumerate() {
            for (j, b) in order.iter().enumerate() {
                let src = format!("{} {op} {}", lit(*a), lit(*b));
                ensure(eval(&src) == Value::from(table[i][j]), || src.clone())?;
                cells += 1;
            }
        }
    }
    for (a, want) in [(True, False), (False, True), (Null, Null)] {
        let src = format!("NOT {}", lit(a));
        ensure(eval(&src) == Value::from(want), || src.clone())?;
        cells += 1;
    }
    Ok(format!("{cells} cells"))
}

fn expression_suite() -> Outcome {
    let g = fixtures::citation();
    let ev = Evaluator::new(&g);
    let env = expression_env(&g);
    let cases = expression_cases();
    ensure(cases.len() >= 60, || format!("only {} cases", cases.len()))?;
    let failures: Vec<String> = cases
        .iter()
        .filter_map(|c| {
            check_expression_case(&ev, &env, c)
                .err()
                .map(|why| format!("line {} `{}`: {why}", c.line, c.expr))
        })
        .collect();
    ensure(failures.is_empty(), || failures.join("; "))?;
    Ok(format!("{} cases", cases.len()))
}

fn differential() -> Outcome {
    let start = Instant::now();
    let mut nonempty = 0;
    let mut errors = 0;
    let cases = 10_000u64;
    for seed in 0..cases {
        let (g, q) = gen_case(&GenConfig::with_seed(seed));
        let fast = Engine::new(&g).output(&q);
        let slow = OracleEngine::new(&g).output(&q);
        match (&fast, &slow) {
            (Ok(a), Ok(b)) if a == b => nonempty += usize::from(!a.is_empty()),
            (Err(_), Err(_)) => errors += 1,
            _ => {
                return Err(format!(
                    "seed {seed}: `{q}` engine={:?} oracle={:?}",
                    fast.map(|t| t.len()),
                    slow.map(|t| t.len())
                ))
            }
        }
    }
    let t = within(Duration::from_secs(600), start)?;
    Ok(format!(
        "{cases} cases agree ({nonempty} non-empty, {errors} both-error), {t}"
    ))
}

fn sample_values(g: &PropertyGraph) -> Vec<Value> {
    let n = |s: &str| g.node_by_name(s).unwrap();
    let r1 = g.rel_by_name("r1").unwrap();
    let mut m1 = ValueMap::new();
    m1.insert("a", Value::Int(1));
    let mut m2 = m1.clone();
    m2.insert("b", Value::Null);
    let mut m3 = ValueMap::new();
    m3.insert("a", Value::Null);
    vec![
        Value::Null,
        Value::Bool(true),
        Value::Bool(false),
        Value::Int(0),
        Value::Int(1),
        Value::str(""),
        Value::str("a"),
        Value::Node(n("n1")),
        Value::Node(n("n2")),
        Value::Rel(r1),
        Value::list([]),
        Value::list([Value::Int(1)]),
        Value::list([Value::Int(1), Value::Null]),
        Value::list([Value::Null]),
        Value::Map(ValueMap::new()),
        Value::Map(m1),
        Value::Map(m2),
        Value::Map(m3),
        Value::Path(PathValue::single(n("n1"))),
        Value::Path(PathValue::new(vec![n("n1"), n("n2")], vec![r1]).unwrap()),
    ]
}

fn invariants() -> Outcome {
    let seeds = 0..1500u64;
    let mut checked = BTreeSet::new();

    for seed in seeds.clone() {
        let (_, q) = gen_case(&GenConfig::with_seed(seed));
        let text = q.to_string();
        let back =
            parse_query(&text).map_err(|e| format!("round-trip parse: {}", e.render(&text)))?;
        ensure(back == q, || format!("round-trip changed `{text}`"))?;
    }
    checked.insert("parser round-trip");

    for seed in seeds.clone().step_by(5) {
        let (g, q) = gen_case(&GenConfig::with_seed(seed));
        let (Ok(a), Ok(b), Ok(c)) = (
            Engine::new(&g).output(&q),
            OracleEngine::new(&g).output(&q),
            Engine::new(&g).output(&parse_query("MATCH (x) RETURN x").unwrap()),
        ) else {
            continue;
        };
        if a.fields() != b.fields() {
            continue;
        }
        let ab = a.bag_union(&b).unwrap();
        ensure(ab == b.bag_union(&a).unwrap(), || {
            "union not commutative".into()
        })?;
        let assoc_l = ab.bag_union(&a).unwrap();
        let assoc_r = a.bag_union(&b.bag_union(&a).unwrap()).unwrap();
        ensure(assoc_l == assoc_r, || "union not associative".into())?;
        for r in a.expanded() {
            ensure(
                ab.multiplicity(r) == a.multiplicity(r) + b.multiplicity(r),
                || "union does not add counts".into(),
            )?;
        }
        let d = a.distinct();
        ensure(d.distinct() == d, || "distinct not idempotent".into())?;
        ensure(d.iter().all(|(_, k)| k == 1), || {
            "distinct left duplicates".into()
        })?;
        ensure(c.distinct() == c.distinct().distinct(), || {
            "distinct".into()
        })?;
    }
    checked.insert("bag-union algebra");
    checked.insert("distinct idempotence");

    let g = fixtures::citation();
    let values = sample_values(&g);
    for a in &values {
        for b in &values {
            ensure(equals(a, b) == equals(b, a), || {
                format!("{a:?} = {b:?} not symmetric")
            })?;
        }
    }
    checked.insert("equality symmetry");

    for a in Trilean::ALL {
        for b in Trilean::ALL {
            ensure(!(a & b) == (!a | !b) && !(a | b) == (!a & !b), || {
                format!("De Morgan fails at {a}, {b}")
            })?;
        }
    }
    checked.insert("De Morgan");

    for seed in seeds.clone() {
        let (g, q) = gen_case(&GenConfig::with_seed(seed));
        let Query::Single { clauses, ret } = &q else {
            continue;
        };
        let e = Engine::with_mode(&g, ExecMode::Sequential);
        let rest = Query::Single {
            clauses: clauses[1..].to_vec(),
            ret: ret.clone(),
        };
        let whole = e.output(&q);
        let staged = e
            .run_clause(&clauses[0], &Table::unit())
            .and_then(|t| e.run_query(&rest, &t));
        match (whole, staged) {
            (Ok(a), Ok(b)) => ensure(a == b, || format!("composition fails for `{q}`"))?,
            (Err(_), Err(_)) => {}
            _ => return Err(format!("composition: one side errors for `{q}`")),
        }
    }
    checked.insert("composition law");

    for seed in seeds.clone() {
        let (g, q) = gen_case(&GenConfig::with_seed(seed));
        let Query::Single { clauses, .. } = &q else {
            continue;
        };
        let e = Engine::with_mode(&g, ExecMode::Sequential);
        let mut t = Table::unit();
        for c in clauses {
            if let Clause::Match {
                pattern, filter, ..
            } = c
            {
                let opt = Clause::Match {
                    optional: true,
                    pattern: pattern.clone(),
                    filter: filter.clone(),
                };
                if let Ok(after) = e.run_clause(&opt, &t) {
                    let before = t.fields().clone();
                    for (u, count) in t.iter() {
                        let hits: usize = after
                            .iter()
                            .filter(|(v, _)| v.restrict(&before) == *u)
                            .map(|(_, k)| k)
                            .sum();
                        ensure(hits >= count, || {
                            format!("OPTIONAL MATCH dropped a row in `{q}`")
                        })?;
                    }
                }
            }
            match e.run_clause(c, &t) {
                Ok(next) => t = next,
                Err(_) => break,
            }
        }
    }
    checked.insert("OPTIONAL MATCH row preservation");

    for seed in seeds.step_by(3) {
        let (g, q) = gen_case(&GenConfig::with_seed(seed));
        let ev = Evaluator::new(&g);
        let m = Matcher::new(&ev, ExecMode::Sequential);
        let Query::Single { clauses, .. } = &q else {
            continue;
        };
        if !matches!(clauses.first(), Some(Clause::Match { .. })) {
            continue;
        }
        if let Ok((_, stats)) = m.match_tuple_with_stats(&first_match(&q), &Record::new()) {
            ensure(stats.max_walk_hops <= g.rel_count(), || {
                format!(
                    "walk of {} hops over {} rels",
                    stats.max_walk_hops,
                    g.rel_count()
                )
            })?;
        }
    }
    let ev_g = fixtures::teachers();
    let ev = Evaluator::new(&ev_g);
    let (_, stats) = Matcher::new(&ev, ExecMode::Sequential)
        .match_tuple_with_stats(
            &PatternTuple(vec![parse_pattern("(a)-[*]-(b)").unwrap()]),
            &Record::new(),
        )
        .map_err(|e| e.to_string())?;
    ensure(stats.max_walk_hops <= ev_g.rel_count(), || {
        "unbounded walk".into()
    })?;
    checked.insert("termination bound");

    Ok(checked.into_iter().collect::<Vec<_>>().join(", "))
}

fn cli_end_to_end() -> Outcome {
    let graph = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/citation.json");
    let run = |format: &str| {
        Command::new(env!("CARGO_BIN_EXE_cypher-ref"))
            .args([
                "--graph",
                graph.to_str().unwrap(),
                "--query",
                "MATCH (a:Researcher)-[:authors]->(p:Publication) RETURN a, p",
                "--format",
                format,
            ])
            .output()
            .expect("binary runs")
    };
    let g = fixtures::citation();
    let first = run("counted-json");
    let second = run("counted-json");
    ensure(first.status.success(), || {
        String::from_utf8_lossy(&first.stderr).into_owned()
    })?;
    ensure(first.stdout == second.stdout, || {
        "output differs between runs".into()
    })?;
    let t = parse_counted_json(&g, String::from_utf8_lossy(&first.stdout).trim())?;
    let want = Table::from_records(
        ["a".to_string(), "p".to_string()].into(),
        [("n1", "n2"), ("n6", "n5"), ("n6", "n9")]
            .iter()
            .map(|(a, p)| rec(&g, &[("a", a), ("p", p)])),
    )
    .unwrap();
    ensure(t == want, || format!("got {t:?}"))?;
    let tsv1 = run("tsv");
    let tsv2 = run("tsv");
    ensure(tsv1.stdout == tsv2.stdout, || {
        "tsv differs between runs".into()
    })?;
    let tsv = String::from_utf8_lossy(&tsv1.stdout);
    ensure(tsv == "a\tp\nn1\tn2\nn6\tn5\nn6\tn9\n", || {
        format!("tsv was {tsv:?}")
    })?;
    Ok("3 authors edges, byte-stable".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("teachers table from {(x:n1),(x:n3)}", teachers_table),
        ("mult-match multiplicity 2", mult_match),
        ("var-length assignments and rigid(pi)", var_length),
        ("trilean truth tables", truth_tables),
        ("expression semantics suite", expression_suite),
        ("differential testing vs oracle", differential),
        ("invariant suite", invariants),
        ("CLI end-to-end on citation graph", cli_end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {}: {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}: {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
