use super::*;
use crate::fixtures;
use crate::parser::parse_query;

fn node(g: &PropertyGraph, s: &str) -> Value {
    Value::Node(g.node_by_name(s).unwrap())
}

#[test]
fn generation_is_deterministic() {
    let (g1, q1) = gen_case(&GenConfig::with_seed(0));
    let (g2, q2) = gen_case(&GenConfig::with_seed(0));
    assert_eq!(serialize_case(&g1, &q1), serialize_case(&g2, &q2));
    let differs = (1..20).any(|s| {
        let (g, q) = gen_case(&GenConfig::with_seed(s));
        serialize_case(&g, &q) != serialize_case(&g1, &q1)
    });
    assert!(differs);
}

#[test]
fn generation_respects_bounds() {
    let cfg = GenConfig {
        max_rels: 0,
        ..GenConfig::with_seed(7)
    };
    for seed in 0..50 {
        let (g, _) = gen_case(&GenConfig {
            seed,
            ..cfg.clone()
        });
        assert_eq!(g.rel_count(), 0);
        assert!(g.node_count() <= cfg.max_nodes);
    }
}

#[test]
fn oracle_on_teachers() {
    let g = fixtures::teachers();
    let ev = Evaluator::new(&g);
    let q =
        parse_query("MATCH (x:Teacher)-[:KNOWS*1..2]->()-[:KNOWS*1..2]->(y:Teacher) RETURN x, y")
            .unwrap();
    let Query::Single { clauses, .. } = &q else {
        unreachable!()
    };
    let Clause::Match { pattern, .. } = &clauses[0] else {
        unreachable!()
    };
    let t = oracle_match(pattern, &ev, &Record::new()).unwrap();
    let r: Record = [
        ("x".to_string(), node(&g, "n1")),
        ("y".to_string(), node(&g, "n4")),
    ]
    .into_iter()
    .collect();
    assert_eq!(t.multiplicity(&r), 2);
    assert_eq!(t.len(), 3);
}

#[test]
fn oracle_engine_runs_clauses() {
    let g = fixtures::teachers();
    let e = OracleEngine::new(&g);
    let run = |src: &str| e.output(&parse_query(src).unwrap()).unwrap();
    assert_eq!(run("UNWIND [1, 2, 2] AS a RETURN a").len(), 3);
    assert_eq!(
        run("MATCH (x) OPTIONAL MATCH (x)-[:TEACHES]->(y) RETURN x, y").len(),
        4
    );
    assert_eq!(run("RETURN 1 AS x UNION RETURN 1 AS x").len(), 1);
    assert_eq!(run("RETURN 1 AS x UNION ALL RETURN 1 AS x").len(), 2);
}
