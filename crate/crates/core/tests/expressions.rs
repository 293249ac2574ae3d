use cypher_ref::fixtures::{check_expression_case, citation, expression_cases, expression_env};
use cypher_ref::Evaluator;

#[test]
fn hand_written_expression_cases() {
    let g = citation();
    let ev = Evaluator::new(&g);
    let env = expression_env(&g);
    let cases = expression_cases();
    assert!(cases.len() >= 60);
    let failures: Vec<String> = cases
        .iter()
        .filter_map(|c| {
            check_expression_case(&ev, &env, c)
                .err()
                .map(|why| format!("line {}: {}: {why}", c.line, c.expr))
        })
        .collect();
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
