//! Abstract syntax of patterns, expressions, clauses and queries.
//!
//! Every node carries a [`Span`] into the source text. Spans never take part
//! in equality: two ASTs are equal when they have the same shape, which is
//! what the parser round-trip relies on.

mod display;

pub(crate) use display::is_keyword;
pub use display::{quote_name, quote_string, quote_symbolic};

use std::collections::BTreeSet;

pub use crate::graph::Direction;

/// Byte range in the query text.
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Literal {
    Null,
    Bool(bool),
    Int(i64),
    Str(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LogicOp {
    And,
    Or,
    Xor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Ge,
    Gt,
    Eq,
    Ne,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StrOp {
    StartsWith,
    EndsWith,
    Contains,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Literal(Literal),
    Var(String),
    Call(String, Vec<Expr>),
    Prop(Box<Expr>, String),
    /// Map literal; duplicate keys are allowed in syntax.
    Map(Vec<(String, Expr)>),
    List(Vec<Expr>),
    In(Box<Expr>, Box<Expr>),
    Index(Box<Expr>, Box<Expr>),
    /// `e[a..b]`, `e[a..]`, `e[..b]`
    Slice {
        list: Box<Expr>,
        from: Option<Box<Expr>>,
        to: Option<Box<Expr>>,
    },
    Str(StrOp, Box<Expr>, Box<Expr>),
    Logic(LogicOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    /// `e IS NULL`, or `e IS NOT NULL` when `negated`.
    IsNull {
        expr: Box<Expr>,
        negated: bool,
    },
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span }
    }

    /// Builds an expression with an empty span; for programmatic construction.
    pub fn synth(kind: ExprKind) -> Expr {
        Expr::new(kind, Span::default())
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::synth(ExprKind::Var(name.into()))
    }

    pub fn int(i: i64) -> Expr {
        Expr::synth(ExprKind::Literal(Literal::Int(i)))
    }

    pub fn as_var(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Var(name) => Some(name),
            _ => None,
        }
    }

    /// Names referenced anywhere in the expression.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        match &self.kind {
            ExprKind::Literal(_) => {}
            ExprKind::Var(a) => {
                out.insert(a.clone());
            }
            ExprKind::Call(_, args) | ExprKind::List(args) => {
                args.iter().for_each(|e| e.collect_names(out))
            }
            ExprKind::Map(entries) => entries.iter().for_each(|(_, e)| e.collect_names(out)),
            ExprKind::Prop(e, _) | ExprKind::Not(e) | ExprKind::IsNull { expr: e, .. } => {
                e.collect_names(out)
            }
            ExprKind::In(a, b)
            | ExprKind::Index(a, b)
            | ExprKind::Str(_, a, b)
            | ExprKind::Logic(_, a, b)
            | ExprKind::Cmp(_, a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            ExprKind::Slice { list, from, to } => {
                list.collect_names(out);
                for e in [from, to].into_iter().flatten() {
                    e.collect_names(out);
                }
            }
        }
    }
}

/// `(a:L1:L2 {k: e})`
#[derive(Clone, Debug, PartialEq, Default)]
pub struct NodePattern {
    pub name: Option<String>,
    pub labels: Vec<String>,
    pub props: Vec<(String, Expr)>,
    pub span: Span,
}

/// Hop-count specification of a relationship pattern; `None` on the
/// pattern means the length token was absent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Length {
    pub min: Option<u64>,
    pub max: Option<u64>,
}

impl Length {
    pub fn exact(n: u64) -> Length {
        Length {
            min: Some(n),
            max: Some(n),
        }
    }
}

/// Resolved hop range `[lo, hi]`, `hi = None` meaning unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HopRange {
    pub lo: u64,
    pub hi: Option<u64>,
    /// The pattern had no length token: it binds the relationship itself
    /// rather than a list of relationships.
    pub single: bool,
}

impl HopRange {
    pub fn contains(&self, hops: u64) -> bool {
        hops >= self.lo && self.hi.is_none_or(|hi| hops <= hi)
    }

    pub fn is_rigid(&self) -> bool {
        self.hi == Some(self.lo)
    }
}

/// `-[a:T1|T2 *m..n {k: e}]->`
#[derive(Clone, Debug, PartialEq)]
pub struct RelPattern {
    pub direction: Direction,
    pub name: Option<String>,
    pub types: Vec<String>,
    pub props: Vec<(String, Expr)>,
    pub length: Option<Length>,
    pub span: Span,
}

impl RelPattern {
    pub fn new(direction: Direction) -> RelPattern {
        RelPattern {
            direction,
            name: None,
            types: Vec::new(),
            props: Vec::new(),
            length: None,
            span: Span::default(),
        }
    }

    /// Missing lower bound reads as 1, missing upper bound as unbounded, and
    /// an absent length token as exactly one hop.
    pub fn range(&self) -> HopRange {
        match self.length {
            None => HopRange {
                lo: 1,
                hi: Some(1),
                single: true,
            },
            Some(Length { min, max }) => HopRange {
                lo: min.unwrap_or(1),
                hi: max,
                single: false,
            },
        }
    }

    pub fn is_rigid(&self) -> bool {
        self.range().is_rigid()
    }
}

/// `[a =] (..)-[..]-(..)...`, stored as a start node and a list of steps.
#[derive(Clone, Debug, PartialEq)]
pub struct PathPattern {
    pub name: Option<String>,
    pub start: NodePattern,
    pub steps: Vec<(RelPattern, NodePattern)>,
    pub span: Span,
}

impl PathPattern {
    pub fn node(start: NodePattern) -> PathPattern {
        PathPattern {
            name: None,
            start,
            steps: Vec::new(),
            span: Span::default(),
        }
    }

    pub fn node_patterns(&self) -> impl Iterator<Item = &NodePattern> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|(_, n)| n))
    }

    pub fn rel_patterns(&self) -> impl Iterator<Item = &RelPattern> {
        self.steps.iter().map(|(r, _)| r)
    }

    pub fn is_rigid(&self) -> bool {
        self.rel_patterns().all(RelPattern::is_rigid)
    }

    /// Names bound by the pattern, including the path name.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self
            .node_patterns()
            .filter_map(|n| n.name.clone())
            .chain(self.rel_patterns().filter_map(|r| r.name.clone()))
            .collect();
        out.extend(self.name.clone());
        out
    }

    /// Rigid patterns subsumed by this one, restricted to those whose total
    /// hop count is at most `max_total_hops`. Slot hop counts are enumerated
    /// in lexicographic order.
    pub fn rigid_expansions(&self, max_total_hops: u64) -> Vec<PathPattern> {
        let ranges: Vec<HopRange> = self.rel_patterns().map(RelPattern::range).collect();
        let mut out = Vec::new();
        let mut counts = Vec::with_capacity(ranges.len());
        self.expand_into(&ranges, &mut counts, max_total_hops, &mut out);
        out
    }

    fn expand_into(
        &self,
        ranges: &[HopRange],
        counts: &mut Vec<u64>,
        budget: u64,
        out: &mut Vec<PathPattern>,
    ) {
        let i = counts.len();
        if i == ranges.len() {
            let mut p = self.clone();
            for ((rel, _), (&m, range)) in p.steps.iter_mut().zip(counts.iter().zip(ranges)) {
                // a pattern without length token is already rigid and stays as is
                if !range.single {
                    rel.length = Some(Length::exact(m));
                }
            }
            out.push(p);
            return;
        }
        let range = ranges[i];
        let hi = range.hi.map_or(budget, |h| h.min(budget));
        for m in range.lo..=hi {
            counts.push(m);
            self.expand_into(ranges, counts, budget - m, out);
            counts.pop();
        }
    }
}

/// A non-empty tuple of path patterns, as in `MATCH p1, p2`.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternTuple(pub Vec<PathPattern>);

impl PatternTuple {
    pub fn free_vars(&self) -> BTreeSet<String> {
        self.0.iter().flat_map(PathPattern::free_vars).collect()
    }

    pub fn patterns(&self) -> &[PathPattern] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionItem {
    pub expr: Expr,
    pub alias: Option<String>,
}

/// Items of `RETURN` / `WITH`: `*`, a list, or `*` followed by a list.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub star: bool,
    pub items: Vec<ProjectionItem>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Clause {
    Match {
        optional: bool,
        pattern: PatternTuple,
        filter: Option<Expr>,
    },
    With {
        projection: Projection,
        filter: Option<Expr>,
    },
    Unwind {
        expr: Expr,
        alias: String,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Query {
    /// Clauses followed by `RETURN`.
    Single {
        clauses: Vec<Clause>,
        ret: Projection,
    },
    Union {
        left: Box<Query>,
        right: Box<Query>,
        all: bool,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(name: Option<&str>) -> NodePattern {
        NodePattern {
            name: name.map(String::from),
            ..Default::default()
        }
    }

    fn rel(length: Option<Length>) -> RelPattern {
        RelPattern {
            length,
            types: vec!["KNOWS".into()],
            ..RelPattern::new(Direction::Outgoing)
        }
    }

    fn var_length() -> PathPattern {
        let r = rel(Some(Length {
            min: Some(1),
            max: Some(2),
        }));
        PathPattern {
            name: None,
            start: NodePattern {
                labels: vec!["Teacher".into()],
                ..node(Some("x"))
            },
            steps: vec![
                (r.clone(), node(Some("z"))),
                (
                    r,
                    NodePattern {
                        labels: vec!["Teacher".into()],
                        ..node(Some("y"))
                    },
                ),
            ],
            span: Span::default(),
        }
    }

    #[test]
    fn free_vars_of_patterns() {
        let p = var_length();
        assert_eq!(
            p.free_vars(),
            ["x", "y", "z"].into_iter().map(String::from).collect()
        );
        let anon = PathPattern {
            steps: vec![(rel(None), node(None))],
            ..PathPattern::node(node(None))
        };
        assert!(anon.free_vars().is_empty());
        let named = PathPattern {
            name: Some("a".into()),
            ..anon.clone()
        };
        let tuple = PatternTuple(vec![named, p]);
        assert_eq!(
            tuple.free_vars(),
            ["a", "x", "y", "z"].into_iter().map(String::from).collect()
        );
    }

    #[test]
    fn ranges() {
        let r = |min, max| rel(Some(Length { min, max })).range();
        assert_eq!(
            r(Some(1), Some(1)),
            HopRange {
                lo: 1,
                hi: Some(1),
                single: false
            }
        );
        assert_eq!(
            rel(None).range(),
            HopRange {
                lo: 1,
                hi: Some(1),
                single: true
            }
        );
        assert_eq!(r(None, None).hi, None);
        assert_eq!(r(None, None).lo, 1);
        assert_eq!(r(Some(3), None).lo, 3);
        assert_eq!(
            r(None, Some(4)),
            HopRange {
                lo: 1,
                hi: Some(4),
                single: false
            }
        );
        assert!(r(Some(2), Some(2)).is_rigid());
        assert!(!r(Some(1), Some(2)).is_rigid());
        assert!(rel(None).is_rigid());
    }

    #[test]
    fn rigid_expansion_of_two_ranged_slots() {
        let expansions = var_length().rigid_expansions(10);
        let counts: Vec<Vec<Option<Length>>> = expansions
            .iter()
            .map(|p| p.rel_patterns().map(|r| r.length).collect())
            .collect();
        let e = |n| Some(Length::exact(n));
        assert_eq!(
            counts,
            vec![
                vec![e(1), e(1)],
                vec![e(1), e(2)],
                vec![e(2), e(1)],
                vec![e(2), e(2)]
            ]
        );
        assert!(expansions.iter().all(PathPattern::is_rigid));
        assert_eq!(var_length().rigid_expansions(3).len(), 3);
    }

    #[test]
    fn empty_range_has_no_expansion() {
        let p = PathPattern {
            steps: vec![(
                rel(Some(Length {
                    min: Some(2),
                    max: Some(1),
                })),
                node(None),
            )],
            ..PathPattern::node(node(None))
        };
        assert!(p.rigid_expansions(5).is_empty());
    }
}
