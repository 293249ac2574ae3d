//! The two example graphs used throughout the tests and docs.
//!
//! `teachers`: four people linked by a `KNOWS` chain n1 → n2 → n3 → n4, where
//! n2 is the only `Student`. `citation`: researchers, students and
//! publications connected by `authors`, `cites` and `supervises`.

use crate::evaluator::Evaluator;
use crate::graph::PropertyGraph;
use crate::parser::parse_expr;
use crate::tables::Record;
use crate::values::{PathValue, Value, ValueMap};

pub const TEACHERS_JSON: &str = include_str!("../fixtures/teachers.json");
pub const CITATION_JSON: &str = include_str!("../fixtures/citation.json");

pub fn teachers() -> PropertyGraph {
    PropertyGraph::from_json_str(TEACHERS_JSON).expect("teachers fixture loads")
}

pub fn citation() -> PropertyGraph {
    PropertyGraph::from_json_str(CITATION_JSON).expect("citation fixture loads")
}

/// Hand-written expression cases, one `expression => expected` per line.
pub const EXPRESSION_CASES: &str = include_str!("../fixtures/expressions.txt");

#[derive(Clone, Debug)]
pub struct ExprCase {
    pub line: usize,
    pub expr: String,
    pub expected: String,
}

pub fn expression_cases() -> Vec<ExprCase> {
    EXPRESSION_CASES
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| {
            let (expr, expected) = l.rsplit_once(" => ").expect("case has `=>`");
            ExprCase {
                line: i + 1,
                expr: expr.trim().to_string(),
                expected: expected.trim().to_string(),
            }
        })
        .collect()
}

/// The record the expression cases are evaluated under, over [`citation`].
pub fn expression_env(g: &PropertyGraph) -> Record {
    let n = |s: &str| g.node_by_name(s).expect("citation node");
    let r1 = g.rel_by_name("r1").expect("citation rel");
    let mut m = ValueMap::new();
    m.insert("a", Value::Int(1));
    m.insert("b", Value::Null);
    let path = PathValue::new(vec![n("n1"), n("n2")], vec![r1]).expect("n1 r1 n2");
    [
        ("nils", Value::Node(n("n1"))),
        ("elin", Value::Node(n("n6"))),
        ("pub", Value::Node(n("n2"))),
        ("r", Value::Rel(r1)),
        ("p", Value::Path(path)),
        ("q", Value::Path(PathValue::single(n("n1")))),
        (
            "l",
            Value::list([Value::Int(1), Value::Int(2), Value::Int(3)]),
        ),
        ("e", Value::list([])),
        ("m", Value::Map(m)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Evaluates one case; `Err` carries a description of the mismatch.
pub fn check_expression_case(ev: &Evaluator, env: &Record, case: &ExprCase) -> Result<(), String> {
    let parse = |src: &str| parse_expr(src).map_err(|e| format!("parse error: {}", e.render(src)));
    let got = ev.eval(&parse(&case.expr)?, env);
    match (case.expected.strip_prefix('!'), got) {
        (Some(kind), Err(e)) if format!("{:?}", e.kind) == kind => Ok(()),
        (Some(kind), got) => Err(format!("expected {kind}, got {got:?}")),
        (None, Ok(v)) => {
            let want = ev
                .eval(&parse(&case.expected)?, env)
                .map_err(|e| format!("expected side fails: {e}"))?;
            if v == want {
                Ok(())
            } else {
                Err(format!("expected {want:?}, got {v:?}"))
            }
        }
        (None, Err(e)) => Err(format!("unexpected error: {e}")),
    }
}
