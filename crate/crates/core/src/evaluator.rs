//! Expression semantics: the value of an expression under a graph and an
//! assignment of values to names.
//!
//! The rules are partial. Where no rule covers the argument types (`1 AND 2`,
//! slicing an integer, `"abc" < 3`) evaluation fails with
//! [`EvalErrorKind::TypeMismatch`] instead of inventing a result.
//!
//! Both operands of a binary operator are always evaluated; there is no
//! short-circuiting, so an error on either side surfaces.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::ast::{CmpOp, Expr, ExprKind, Literal, LogicOp, Span, StrOp};
use crate::graph::{Element, PropertyGraph};
use crate::tables::Record;
use crate::values::{FunctionRegistry, Trilean, Value, ValueError, ValueMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalErrorKind {
    TypeMismatch,
    UnknownName,
    UnknownFunction,
    ArityMismatch,
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub message: String,
    pub span: Span,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

impl EvalError {
    pub(crate) fn new(kind: EvalErrorKind, message: impl Into<String>, span: Span) -> EvalError {
        EvalError {
            kind,
            message: message.into(),
            span,
        }
    }

    fn mismatch(what: &str, values: &[&Value], span: Span) -> EvalError {
        let tags: Vec<_> = values.iter().map(|v| v.type_name()).collect();
        EvalError::new(
            EvalErrorKind::TypeMismatch,
            format!("{what} is not defined on ({})", tags.join(", ")),
            span,
        )
    }

    fn from_value_error(err: ValueError, span: Span) -> EvalError {
        let kind = match err {
            ValueError::UnknownFunction(_) => EvalErrorKind::UnknownFunction,
            ValueError::ArityMismatch { .. } => EvalErrorKind::ArityMismatch,
            ValueError::Overflow(_) => EvalErrorKind::Overflow,
            _ => EvalErrorKind::TypeMismatch,
        };
        EvalError::new(kind, err.to_string(), span)
    }
}

/// Evaluates expressions against one graph with one function registry.
#[derive(Debug, Clone)]
pub struct Evaluator<'g> {
    graph: &'g PropertyGraph,
    functions: FunctionRegistry,
}

impl<'g> Evaluator<'g> {
    pub fn new(graph: &'g PropertyGraph) -> Self {
        Evaluator::with_functions(graph, FunctionRegistry::standard())
    }

    pub fn with_functions(graph: &'g PropertyGraph, functions: FunctionRegistry) -> Self {
        Evaluator { graph, functions }
    }

    pub fn graph(&self) -> &'g PropertyGraph {
        self.graph
    }

    pub fn eval(&self, e: &Expr, u: &Record) -> Result<Value, EvalError> {
        let span = e.span;
        match &e.kind {
            ExprKind::Literal(l) => Ok(match l {
                Literal::Null => Value::Null,
                Literal::Bool(b) => Value::Bool(*b),
                Literal::Int(i) => Value::Int(*i),
                Literal::Str(s) => Value::Str(s.clone()),
            }),
            ExprKind::Var(a) => u.get(a).cloned().ok_or_else(|| {
                EvalError::new(
                    EvalErrorKind::UnknownName,
                    format!("unknown name `{a}`"),
                    span,
                )
            }),
            ExprKind::Call(f, args) => {
                let args = args
                    .iter()
                    .map(|a| self.eval(a, u))
                    .collect::<Result<Vec<_>, _>>()?;
                self.functions
                    .apply(f, &args)
                    .map_err(|err| EvalError::from_value_error(err, span))
            }
            ExprKind::Prop(base, key) => {
                let v = self.eval(base, u)?;
                self.property(&v, key, span)
            }
            ExprKind::Map(entries) => {
                let values = entries
                    .iter()
                    .map(|(k, e)| Ok((k, self.eval(e, u)?)))
                    .collect::<Result<Vec<_>, EvalError>>()?;
                // only the last occurrence of a repeated key is kept
                let mut map = ValueMap::new();
                for (i, (k, v)) in values.iter().enumerate() {
                    if !values[i + 1..].iter().any(|(k2, _)| k2 == k) {
                        map.insert(k.as_str(), v.clone());
                    }
                }
                Ok(Value::Map(map))
            }
            ExprKind::List(items) => Ok(Value::List(
                items
                    .iter()
                    .map(|e| self.eval(e, u))
                    .collect::<Result<_, _>>()?,
            )),
            ExprKind::In(needle, hay) => {
                let needle = self.eval(needle, u)?;
                let hay = self.eval(hay, u)?;
                match hay {
                    Value::List(items) => Ok(list_contains(&needle, &items).into()),
                    other => Err(EvalError::mismatch("IN", &[&needle, &other], span)),
                }
            }
            ExprKind::Index(list, index) => {
                let list = self.eval(list, u)?;
                let index = self.eval(index, u)?;
                match (&list, &index) {
                    (Value::List(items), Value::Int(i)) => Ok(index_list(items, *i)),
                    _ => Err(EvalError::mismatch("indexing", &[&list, &index], span)),
                }
            }
            ExprKind::Slice { list, from, to } => {
                let list = self.eval(list, u)?;
                let from = from.as_ref().map(|e| self.eval(e, u)).transpose()?;
                let to = to.as_ref().map(|e| self.eval(e, u)).transpose()?;
                let Value::List(items) = &list else {
                    return Err(EvalError::mismatch("slicing", &[&list], span));
                };
                let bound = |b: Option<Value>, default: i64| match b {
                    None => Ok(default),
                    Some(Value::Int(i)) => Ok(i),
                    Some(other) => Err(EvalError::mismatch("slice bound", &[&other], span)),
                };
                let i = bound(from, 0)?;
                let j = bound(to, items.len() as i64)?;
                Ok(Value::List(slice_list(items, i, j)))
            }
            ExprKind::Str(op, a, b) => {
                let a = self.eval(a, u)?;
                let b = self.eval(b, u)?;
                match (&a, &b) {
                    (Value::Str(s), Value::Str(t)) => Ok(Value::Bool(match op {
                        StrOp::StartsWith => s.starts_with(t.as_str()),
                        StrOp::EndsWith => s.ends_with(t.as_str()),
                        StrOp::Contains => s.contains(t.as_str()),
                    })),
                    (Value::Str(_) | Value::Null, Value::Str(_) | Value::Null) => Ok(Value::Null),
                    _ => Err(EvalError::mismatch(&op.to_string(), &[&a, &b], span)),
                }
            }
            ExprKind::Logic(op, a, b) => {
                let a = self.eval(a, u)?;
                let b = self.eval(b, u)?;
                match (Trilean::from_value(&a), Trilean::from_value(&b)) {
                    (Some(x), Some(y)) => Ok(match op {
                        LogicOp::And => x & y,
                        LogicOp::Or => x | y,
                        LogicOp::Xor => x ^ y,
                    }
                    .into()),
                    _ => Err(EvalError::mismatch(&op.to_string(), &[&a, &b], span)),
                }
            }
            ExprKind::Not(e) => {
                let v = self.eval(e, u)?;
                Trilean::from_value(&v)
                    .map(|t| (!t).into())
                    .ok_or_else(|| EvalError::mismatch("NOT", &[&v], span))
            }
            ExprKind::IsNull { expr, negated } => {
                let v = self.eval(expr, u)?;
                Ok(Value::Bool(v.is_null() != *negated))
            }
            ExprKind::Cmp(op, a, b) => {
                let a = self.eval(a, u)?;
                let b = self.eval(b, u)?;
                compare(*op, &a, &b)
                    .map(Value::from)
                    .ok_or_else(|| EvalError::mismatch(&format!("`{op}`"), &[&a, &b], span))
            }
        }
    }

    /// Evaluates and projects onto the trilean domain.
    pub fn eval_trilean(&self, e: &Expr, u: &Record) -> Result<Trilean, EvalError> {
        let v = self.eval(e, u)?;
        Trilean::from_value(&v).ok_or_else(|| EvalError::mismatch("a condition", &[&v], e.span))
    }

    fn property(&self, v: &Value, key: &str, span: Span) -> Result<Value, EvalError> {
        let element = match v {
            Value::Node(n) => Element::Node(*n),
            Value::Rel(r) => Element::Rel(*r),
            Value::Map(m) => return Ok(m.get(key).cloned().unwrap_or(Value::Null)),
            Value::Null => return Ok(Value::Null),
            other => return Err(EvalError::mismatch("property access", &[other], span)),
        };
        self.graph
            .prop(element, key)
            .map_err(|err| EvalError::new(EvalErrorKind::TypeMismatch, err.to_string(), span))
    }
}

/// `list[i]` with negative indices counting from the end; out of range is
/// `null`.
pub fn index_list(items: &[Value], i: i64) -> Value {
    let m = items.len() as i64;
    let pos = if i < 0 { m + i } else { i };
    if (0..m).contains(&pos) {
        items[pos as usize].clone()
    } else {
        Value::Null
    }
}

/// `list[i..j]`: negative bounds count from the end, then the range is
/// clamped to the list; crossing bounds give the empty list.
pub fn slice_list(items: &[Value], i: i64, j: i64) -> Vec<Value> {
    let m = items.len() as i64;
    let i = if i >= 0 { i } else { m + i };
    let j = if j >= 0 { j } else { m + j };
    let lo = i.max(0);
    let hi = (m - 1).min(j - 1);
    if lo <= hi {
        items[lo as usize..=hi as usize].to_vec()
    } else {
        Vec::new()
    }
}

/// `v IN list`: true if some element is `=`-true, otherwise null if some
/// element is `=`-null, otherwise false.
pub fn list_contains(needle: &Value, items: &[Value]) -> Trilean {
    let mut saw_null = false;
    for w in items {
        match equals(needle, w) {
            Trilean::True => return Trilean::True,
            Trilean::Null => saw_null = true,
            Trilean::False => {}
        }
    }
    if saw_null {
        Trilean::Null
    } else {
        Trilean::False
    }
}

/// Language-level equality `=`.
///
/// `null` on either side gives `null`. Lists compare element-wise (lengths
/// must agree), maps key-wise (key sets must agree), and everything else by
/// identity. Values of different types compare `false`.
pub fn equals(a: &Value, b: &Value) -> Trilean {
    match (a, b) {
        (Value::Null, _) | (_, Value::Null) => Trilean::Null,
        (Value::List(xs), Value::List(ys)) => {
            if xs.len() != ys.len() {
                return Trilean::False;
            }
            all_of(xs.iter().zip(ys).map(|(x, y)| equals(x, y)))
        }
        (Value::Map(m1), Value::Map(m2)) => {
            if m1.is_empty() || m2.is_empty() {
                return (m1.is_empty() && m2.is_empty()).into();
            }
            if m1.len() != m2.len() {
                return Trilean::False;
            }
            let mut results = Vec::with_capacity(m1.len());
            for (k, v) in m1.iter() {
                match m2.get(k) {
                    Some(w) => results.push(equals(v, w)),
                    None => return Trilean::False,
                }
            }
            all_of(results.into_iter())
        }
        (Value::Int(x), Value::Int(y)) => (x == y).into(),
        (Value::Str(x), Value::Str(y)) => (x == y).into(),
        (Value::Bool(x), Value::Bool(y)) => (x == y).into(),
        (Value::Node(x), Value::Node(y)) => (x == y).into(),
        (Value::Rel(x), Value::Rel(y)) => (x == y).into(),
        (Value::Path(x), Value::Path(y)) => (x == y).into(),
        _ => Trilean::False,
    }
}

// true if all true; null if none false but some null; false otherwise
fn all_of(results: impl Iterator<Item = Trilean>) -> Trilean {
    let mut out = Trilean::True;
    for t in results {
        match t {
            Trilean::False => return Trilean::False,
            Trilean::Null => out = Trilean::Null,
            Trilean::True => {}
        }
    }
    out
}

/// Comparison operators. `None` when no rule applies (ordering across
/// types, or on anything but integers and strings).
pub fn compare(op: CmpOp, a: &Value, b: &Value) -> Option<Trilean> {
    if a.is_null() || b.is_null() {
        return Some(Trilean::Null);
    }
    let ord = match op {
        CmpOp::Eq => return Some(equals(a, b)),
        CmpOp::Ne => return Some(!equals(a, b)),
        _ => match (a, b) {
            (Value::Int(x), Value::Int(y)) => x.cmp(y),
            (Value::Str(x), Value::Str(y)) => x.cmp(y),
            _ => return None,
        },
    };
    Some(
        match op {
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Ge => ord != Ordering::Less,
            CmpOp::Gt => ord == Ordering::Greater,
            CmpOp::Eq | CmpOp::Ne => unreachable!(),
        }
        .into(),
    )
}

#[cfg(test)]
mod tests;
