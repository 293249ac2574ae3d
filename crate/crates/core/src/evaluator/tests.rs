use proptest::prelude::*;

use super::*;
use crate::fixtures;
use crate::parser::parse_expr;
use crate::values::NodeId;

fn eval_in(g: &PropertyGraph, src: &str, u: &Record) -> Result<Value, EvalError> {
    let e = parse_expr(src).unwrap();
    Evaluator::new(g).eval(&e, u)
}

fn eval(src: &str) -> Value {
    eval_in(&PropertyGraph::empty(), src, &Record::new()).unwrap()
}

fn eval_err(src: &str) -> EvalErrorKind {
    eval_in(&PropertyGraph::empty(), src, &Record::new())
        .unwrap_err()
        .kind
}

fn t(src: &str) -> Value {
    eval(src)
}

#[test]
fn truth_tables() {
    use Trilean::*;
    let lit = |x: Trilean| match x {
        True => "true",
        False => "false",
        Null => "null",
    };
    let or = [
        (True, True, True),
        (True, False, True),
        (True, Null, True),
        (False, True, True),
        (False, False, False),
        (False, Null, Null),
        (Null, True, True),
        (Null, False, Null),
        (Null, Null, Null),
    ];
    let and = [
        (True, True, True),
        (True, False, False),
        (True, Null, Null),
        (False, True, False),
        (False, False, False),
        (False, Null, False),
        (Null, True, Null),
        (Null, False, False),
        (Null, Null, Null),
    ];
    let xor = [
        (True, True, False),
        (True, False, True),
        (True, Null, Null),
        (False, True, True),
        (False, False, False),
        (False, Null, Null),
        (Null, True, Null),
        (Null, False, Null),
        (Null, Null, Null),
    ];
    for (op, table) in [("OR", or), ("AND", and), ("XOR", xor)] {
        for (a, b, want) in table {
            let src = format!("{} {op} {}", lit(a), lit(b));
            assert_eq!(eval(&src), Value::from(want), "{src}");
        }
    }
    for (a, want) in [(True, False), (False, True), (Null, Null)] {
        assert_eq!(eval(&format!("NOT {}", lit(a))), Value::from(want));
    }
}

#[test]
fn de_morgan() {
    for a in Trilean::ALL {
        for b in Trilean::ALL {
            assert_eq!(!(a & b), !a | !b);
            assert_eq!(!(a | b), !a & !b);
        }
    }
}

#[test]
fn logic_rejects_non_booleans() {
    assert_eq!(eval_err("1 AND 2"), EvalErrorKind::TypeMismatch);
    assert_eq!(eval_err("true AND 1"), EvalErrorKind::TypeMismatch);
    assert_eq!(eval_err("NOT 'a'"), EvalErrorKind::TypeMismatch);
    // no short-circuit: the error on the right still surfaces
    assert_eq!(eval_err("false AND 1"), EvalErrorKind::TypeMismatch);
}

#[test]
fn lists() {
    assert_eq!(t("[1, 2, 3][-1]"), Value::Int(3));
    assert_eq!(t("[1, 2, 3][0]"), Value::Int(1));
    assert_eq!(t("[1, 2, 3][3]"), Value::Null);
    assert_eq!(t("[1, 2, 3][-4]"), Value::Null);
    assert_eq!(t("[][0]"), Value::Null);
    assert_eq!(t("[1, 2, 3][0..10]"), t("[1, 2, 3]"));
    assert_eq!(t("[1, 2, 3][1..]"), t("[2, 3]"));
    assert_eq!(t("[1, 2, 3][..-1]"), t("[1, 2]"));
    assert_eq!(t("[1, 2, 3][2..1]"), t("[]"));
    assert_eq!(t("[][0..2]"), t("[]"));
    assert_eq!(t("5 IN []"), Value::Bool(false));
    assert_eq!(t("2 IN [1, 2]"), Value::Bool(true));
    assert_eq!(t("3 IN [1, null]"), Value::Null);
    assert_eq!(t("null IN [1]"), Value::Null);
    assert_eq!(eval_err("1[0]"), EvalErrorKind::TypeMismatch);
    assert_eq!(eval_err("[1][0..'a']"), EvalErrorKind::TypeMismatch);
    assert_eq!(eval_err("1 IN 1"), EvalErrorKind::TypeMismatch);
}

#[test]
fn maps_and_properties() {
    assert_eq!(t("{a: 1, b: 2, a: 3}.a"), Value::Int(3));
    assert_eq!(t("{a: 1}.b"), Value::Null);
    assert_eq!(t("{}.a"), Value::Null);
    assert_eq!(t("null.a"), Value::Null);
    assert_eq!(eval_err("1.a"), EvalErrorKind::TypeMismatch);

    let g = fixtures::citation();
    let n1 = g.node_by_name("n1").unwrap();
    let u: Record = [("x".to_string(), Value::Node(n1))].into_iter().collect();
    assert_eq!(eval_in(&g, "x.name", &u).unwrap(), Value::str("Nils"));
    assert_eq!(eval_in(&g, "x.acmid", &u).unwrap(), Value::Null);
    assert_eq!(
        eval_in(&g, "y", &u).unwrap_err().kind,
        EvalErrorKind::UnknownName
    );
}

#[test]
fn strings() {
    assert_eq!(t("'abc' CONTAINS 'b'"), Value::Bool(true));
    assert_eq!(t("'abc' STARTS WITH 'ab'"), Value::Bool(true));
    assert_eq!(t("'abc' ENDS WITH 'b'"), Value::Bool(false));
    assert_eq!(t("null CONTAINS 'b'"), Value::Null);
    assert_eq!(t("'abc' STARTS WITH null"), Value::Null);
    assert_eq!(eval_err("1 CONTAINS 'a'"), EvalErrorKind::TypeMismatch);
}

#[test]
fn comparisons() {
    assert_eq!(t("1 < 2"), Value::Bool(true));
    assert_eq!(t("'b' <= 'a'"), Value::Bool(false));
    assert_eq!(t("null < 1"), Value::Null);
    assert_eq!(t("null = null"), Value::Null);
    assert_eq!(t("1 <> null"), Value::Null);
    assert_eq!(t("null IS NULL"), Value::Bool(true));
    assert_eq!(t("1 IS NOT NULL"), Value::Bool(true));
    assert_eq!(t("{a: 1} = {a: 1, b: 2}"), Value::Bool(false));
    assert_eq!(t("{a: 1} = {b: 1}"), Value::Bool(false));
    assert_eq!(t("{a: null} = {a: 1}"), Value::Null);
    assert_eq!(t("{} = {}"), Value::Bool(true));
    assert_eq!(t("{} = {a: 1}"), Value::Bool(false));
    assert_eq!(t("[1, null] = [1, 2]"), Value::Null);
    assert_eq!(t("[1, null] = [2, null]"), Value::Bool(false));
    assert_eq!(t("[1] = [1, 2]"), Value::Bool(false));
    assert_eq!(t("[] = []"), Value::Bool(true));
    assert_eq!(t("[1] = 1"), Value::Bool(false));
    assert_eq!(t("1 = 'a'"), Value::Bool(false));
    assert_eq!(eval_err("1 < 'a'"), EvalErrorKind::TypeMismatch);
    assert_eq!(eval_err("[1] < [2]"), EvalErrorKind::TypeMismatch);
}

#[test]
fn functions() {
    assert_eq!(t("plus(2, 3)"), Value::Int(5));
    assert_eq!(t("plus(2, null)"), Value::Null);
    assert_eq!(t("size([1, 2, 3])"), Value::Int(3));
    assert_eq!(t("toUpper('ab')"), Value::str("AB"));
    assert_eq!(eval_err("nope(1)"), EvalErrorKind::UnknownFunction);
    assert_eq!(eval_err("plus(1)"), EvalErrorKind::ArityMismatch);
    assert_eq!(
        eval_err("plus(9223372036854775807, 1)"),
        EvalErrorKind::Overflow
    );
}

#[test]
fn paths_compare_by_identity() {
    let g = fixtures::teachers();
    let n = |s: &str| g.node_by_name(s).unwrap();
    let r1 = g.rel_by_name("r1").unwrap();
    let p = Value::Path(PathValue::new(vec![n("n1"), n("n2")], vec![r1]).unwrap());
    let q = Value::Path(PathValue::single(n("n1")));
    assert_eq!(equals(&p, &p), Trilean::True);
    assert_eq!(equals(&p, &q), Trilean::False);
    assert_eq!(
        equals(&p, &Value::list([Value::Node(n("n1"))])),
        Trilean::False
    );
    assert_eq!(
        equals(&Value::Node(NodeId(0)), &Value::Rel(r1)),
        Trilean::False
    );
}

use crate::values::PathValue;

fn reference_slice(items: &[i64], i: i64, j: i64) -> Vec<i64> {
    let m = items.len() as i64;
    let norm = |x: i64| if x < 0 { m + x } else { x };
    let (i, j) = (norm(i), norm(j));
    (0..m)
        .filter(|&k| k >= i && k < j)
        .map(|k| items[k as usize])
        .collect()
}

fn arb_value() -> impl Strategy<Value = Value> {
    let leaf = prop_oneof![
        Just(Value::Null),
        any::<bool>().prop_map(Value::Bool),
        (-2i64..3).prop_map(Value::Int),
        "[ab]{0,2}".prop_map(Value::Str),
        (0u32..3).prop_map(|i| Value::Node(NodeId(i))),
    ];
    leaf.prop_recursive(2, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..3).prop_map(Value::List),
            prop::collection::vec(("[ab]", inner), 0..3).prop_map(|kvs| {
                let mut m = ValueMap::new();
                for (k, v) in kvs {
                    m.insert(k, v);
                }
                Value::Map(m)
            }),
        ]
    })
}

proptest! {
    #[test]
    fn slicing_matches_reference(items in prop::collection::vec(-5i64..5, 0..6), i in -12i64..12, j in -12i64..12) {
        let m = items.len() as i64;
        prop_assume!(i.abs() <= 2 * m.max(1) && j.abs() <= 2 * m.max(1));
        let values: Vec<Value> = items.iter().map(|&x| Value::Int(x)).collect();
        let want: Vec<Value> = reference_slice(&items, i, j).into_iter().map(Value::Int).collect();
        prop_assert_eq!(slice_list(&values, i, j), want);
    }

    #[test]
    fn equality_is_symmetric(a in arb_value(), b in arb_value()) {
        prop_assert_eq!(equals(&a, &b), equals(&b, &a));
    }

    #[test]
    fn equality_is_reflexive_without_nulls(a in arb_value()) {
        let e = equals(&a, &a);
        prop_assert!(e == Trilean::True || e == Trilean::Null);
    }

    #[test]
    fn membership_folds_equality(v in arb_value(), items in prop::collection::vec(arb_value(), 0..4)) {
        let results: Vec<Trilean> = items.iter().map(|w| equals(&v, w)).collect();
        let want = if results.contains(&Trilean::True) {
            Trilean::True
        } else if results.contains(&Trilean::Null) {
            Trilean::Null
        } else {
            Trilean::False
        };
        prop_assert_eq!(list_contains(&v, &items), want);
    }

    #[test]
    fn not_equal_is_negated_equal(a in arb_value(), b in arb_value()) {
        let ne = compare(CmpOp::Ne, &a, &b).unwrap();
        let eq = compare(CmpOp::Eq, &a, &b).unwrap();
        prop_assert_eq!(ne, !eq);
    }
}
