//! Brute-force reference semantics for differential testing, and a random
//! generator of small graphs and queries.
//!
//! The oracle follows the definitions literally: it lists every path of the
//! graph with distinct relationships, every rigid pattern within the hop
//! bound, every candidate assignment, and counts the satisfying combinations.
//! It shares only the expression evaluator with the optimized engine.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::*;
use crate::engine::{alias, EngineError};
use crate::evaluator::{equals, EvalError, EvalErrorKind, Evaluator};
use crate::graph::{Element, GraphBuilder, PropertyGraph};
use crate::tables::{Record, Table};
use crate::values::{NodeId, PathValue, RelId, Trilean, Value};

/// A path as parallel node and relationship sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Walk {
    nodes: Vec<NodeId>,
    rels: Vec<RelId>,
}

/// Every path of `g` whose relationships are pairwise distinct.
fn all_walks(g: &PropertyGraph) -> Vec<Walk> {
    let mut out = Vec::new();
    let mut stack: Vec<Walk> = g
        .nodes()
        .map(|n| Walk {
            nodes: vec![n],
            rels: vec![],
        })
        .collect();
    while let Some(w) = stack.pop() {
        let last = *w.nodes.last().unwrap();
        for r in g.rels() {
            if w.rels.contains(&r) {
                continue;
            }
            let (s, t) = (g.src(r), g.tgt(r));
            let next = if s == last {
                t
            } else if t == last {
                s
            } else {
                continue;
            };
            let mut w2 = w.clone();
            w2.rels.push(r);
            w2.nodes.push(next);
            stack.push(w2);
        }
        out.push(w);
    }
    out
}

fn hop_counts(pat: &PathPattern) -> Vec<usize> {
    pat.rel_patterns()
        .map(|r| match r.length {
            None => 1,
            Some(Length { min, .. }) => min.unwrap_or(1) as usize,
        })
        .collect()
}

fn prop_true(
    ev: &Evaluator<'_>,
    element: Element,
    key: &str,
    e: &Expr,
    u: &Record,
) -> Result<bool, EvalError> {
    let want = ev.eval(e, u)?;
    let have = ev
        .graph()
        .prop(element, key)
        .map_err(|err| EvalError::new(EvalErrorKind::TypeMismatch, err.to_string(), e.span))?;
    Ok(equals(&have, &want) == Trilean::True)
}

// Conditions of the rigid satisfaction rules that do not involve names or
// property maps: labels, types and orientation.
fn shape_fits(g: &PropertyGraph, w: &Walk, pat: &PathPattern) -> bool {
    let hops = hop_counts(pat);
    if hops.iter().sum::<usize>() != w.rels.len() {
        return false;
    }
    let fits_node = |n: NodeId, chi: &NodePattern| chi.labels.iter().all(|l| g.has_label(n, l));
    if !fits_node(w.nodes[0], &pat.start) {
        return false;
    }
    let mut pos = 0;
    for ((rho, chi), m) in pat.steps.iter().zip(hops) {
        for i in pos..pos + m {
            let r = w.rels[i];
            if !rho.types.is_empty() && !rho.types.iter().any(|t| t == g.rel_type(r)) {
                return false;
            }
            let (a, b) = (w.nodes[i], w.nodes[i + 1]);
            let oriented = match rho.direction {
                Direction::Outgoing => g.src(r) == a && g.tgt(r) == b,
                Direction::Incoming => g.src(r) == b && g.tgt(r) == a,
                Direction::Both => {
                    (g.src(r) == a && g.tgt(r) == b) || (g.src(r) == b && g.tgt(r) == a)
                }
            };
            if !oriented {
                return false;
            }
        }
        pos += m;
        if !fits_node(w.nodes[pos], chi) {
            return false;
        }
    }
    true
}

/// `(p, G, u) ⊨ π'` for a rigid `π'`, rule by rule.
fn satisfies_rigid(
    ev: &Evaluator<'_>,
    w: &Walk,
    pat: &PathPattern,
    u: &Record,
) -> Result<bool, EvalError> {
    let g = ev.graph();
    let distinct: BTreeSet<RelId> = w.rels.iter().copied().collect();
    if distinct.len() != w.rels.len() || !shape_fits(g, w, pat) {
        return Ok(false);
    }
    let node_ok = |n: NodeId, chi: &NodePattern| -> Result<bool, EvalError> {
        if let Some(a) = &chi.name {
            if u.get(a) != Some(&Value::Node(n)) {
                return Ok(false);
            }
        }
        for (k, e) in &chi.props {
            if !prop_true(ev, Element::Node(n), k, e, u)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    if !node_ok(w.nodes[0], &pat.start)? {
        return Ok(false);
    }
    let mut pos = 0;
    for ((rho, chi), m) in pat.steps.iter().zip(hop_counts(pat)) {
        let slot = &w.rels[pos..pos + m];
        if let Some(a) = &rho.name {
            let want = if rho.length.is_none() {
                Value::Rel(slot[0])
            } else {
                Value::List(slot.iter().map(|&r| Value::Rel(r)).collect())
            };
            if u.get(a) != Some(&want) {
                return Ok(false);
            }
        }
        for &r in slot {
            for (k, e) in &rho.props {
                if !prop_true(ev, Element::Rel(r), k, e, u)? {
                    return Ok(false);
                }
            }
        }
        pos += m;
        if !node_ok(w.nodes[pos], chi)? {
            return Ok(false);
        }
    }
    if let Some(a) = &pat.name {
        let p = PathValue::new(w.nodes.clone(), w.rels.clone()).expect("walk is a path");
        if u.get(a) != Some(&Value::Path(p)) {
            return Ok(false);
        }
    }
    Ok(true)
}

// Values a name can take given where it occurs in the rigid pattern.
fn occurrences(w: &Walk, pat: &PathPattern, out: &mut Vec<(String, Value)>) {
    let mut push = |name: &Option<String>, v: Value| {
        if let Some(a) = name {
            out.push((a.clone(), v));
        }
    };
    push(&pat.start.name, Value::Node(w.nodes[0]));
    let mut pos = 0;
    for ((rho, chi), m) in pat.steps.iter().zip(hop_counts(pat)) {
        let slot = &w.rels[pos..pos + m];
        let v = if rho.length.is_none() {
            Value::Rel(slot[0])
        } else {
            Value::List(slot.iter().map(|&r| Value::Rel(r)).collect())
        };
        push(&rho.name, v);
        pos += m;
        push(&chi.name, Value::Node(w.nodes[pos]));
    }
    if pat.name.is_some() {
        let p = PathValue::new(w.nodes.clone(), w.rels.clone()).expect("walk is a path");
        push(&pat.name, Value::Path(p));
    }
}

/// `match(π̄, G, u)` by exhaustive enumeration.
pub fn oracle_match(
    pats: &PatternTuple,
    ev: &Evaluator<'_>,
    u: &Record,
) -> Result<Table, EvalError> {
    let g = ev.graph();
    let free = pats.free_vars();
    for p in pats.patterns() {
        let exprs = p
            .node_patterns()
            .flat_map(|n| &n.props)
            .chain(p.rel_patterns().flat_map(|r| &r.props));
        for (_, e) in exprs {
            if let Some(a) = e
                .names()
                .into_iter()
                .find(|a| !free.contains(a) && !u.contains(a))
            {
                return Err(EvalError::new(
                    EvalErrorKind::UnknownName,
                    format!("unknown name `{a}`"),
                    e.span,
                ));
            }
        }
    }
    let fields: BTreeSet<String> = free.iter().filter(|a| !u.contains(a)).cloned().collect();
    let bound = g.rel_count() as u64;
    let walks = all_walks(g);

    // per component: every (rigid pattern, path) with a compatible shape
    let mut per_component: Vec<Vec<(PathPattern, &Walk)>> = Vec::new();
    for pat in pats.patterns() {
        let mut pairs = Vec::new();
        for rigid in pat.rigid_expansions(bound) {
            for w in &walks {
                if shape_fits(g, w, &rigid) {
                    pairs.push((rigid.clone(), w));
                }
            }
        }
        per_component.push(pairs);
    }

    let mut table = Table::empty(fields.iter().cloned());
    let mut chosen: Vec<usize> = Vec::new();
    tuples(ev, u, &fields, &per_component, &mut chosen, &mut table)?;
    Ok(table)
}

fn tuples(
    ev: &Evaluator<'_>,
    u: &Record,
    fields: &BTreeSet<String>,
    per_component: &[Vec<(PathPattern, &Walk)>],
    chosen: &mut Vec<usize>,
    table: &mut Table,
) -> Result<(), EvalError> {
    let i = chosen.len();
    if i < per_component.len() {
        for j in 0..per_component[i].len() {
            let w = per_component[i][j].1;
            let clash = chosen.iter().enumerate().any(|(c, &k)| {
                per_component[c][k]
                    .1
                    .rels
                    .iter()
                    .any(|r| w.rels.contains(r))
            });
            if clash {
                continue;
            }
            chosen.push(j);
            tuples(ev, u, fields, per_component, chosen, table)?;
            chosen.pop();
        }
        return Ok(());
    }

    let picked: Vec<&(PathPattern, &Walk)> = chosen
        .iter()
        .enumerate()
        .map(|(c, &k)| &per_component[c][k])
        .collect();
    let mut occ = Vec::new();
    for (pat, w) in &picked {
        occurrences(w, pat, &mut occ);
    }
    let names: Vec<&String> = fields.iter().collect();
    let candidates: Vec<Vec<Value>> = names
        .iter()
        .map(|a| {
            let mut vs: Vec<Value> = occ
                .iter()
                .filter(|(b, _)| b == *a)
                .map(|(_, v)| v.clone())
                .collect();
            vs.sort();
            vs.dedup();
            vs
        })
        .collect();

    // every combination of candidate values
    let mut idx = vec![0usize; names.len()];
    if candidates.iter().any(Vec::is_empty) {
        return Ok(());
    }
    loop {
        let ext: Record = names
            .iter()
            .zip(&idx)
            .zip(&candidates)
            .map(|((a, &k), vs)| ((*a).clone(), vs[k].clone()))
            .collect();
        let full = u.concat(&ext).expect("extension names are unbound in u");
        let mut ok = true;
        for (pat, w) in &picked {
            if !satisfies_rigid(ev, w, pat, &full)? {
                ok = false;
                break;
            }
        }
        if ok {
            table.push(ext, 1).expect("extension covers the fields");
        }
        let mut d = 0;
        loop {
            if d == idx.len() {
                return Ok(());
            }
            idx[d] += 1;
            if idx[d] < candidates[d].len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Clause and query semantics over plain row lists.
pub struct OracleEngine<'g> {
    ev: Evaluator<'g>,
}

type Rows = (BTreeSet<String>, Vec<Record>);

impl<'g> OracleEngine<'g> {
    pub fn new(g: &'g PropertyGraph) -> Self {
        OracleEngine {
            ev: Evaluator::new(g),
        }
    }

    pub fn output(&self, q: &Query) -> Result<Table, EngineError> {
        let (fields, rows) = self.query(q, (BTreeSet::new(), vec![Record::new()]))?;
        Ok(Table::from_records(fields, rows).expect("oracle rows are uniform"))
    }

    pub fn run_query(&self, q: &Query, t: &Table) -> Result<Table, EngineError> {
        let input = (t.fields().clone(), t.expanded().cloned().collect());
        let (fields, rows) = self.query(q, input)?;
        Ok(Table::from_records(fields, rows).expect("oracle rows are uniform"))
    }

    fn query(&self, q: &Query, input: Rows) -> Result<Rows, EngineError> {
        match q {
            Query::Single { clauses, ret } => {
                let mut t = input;
                for c in clauses {
                    t = self.clause(c, t)?;
                }
                self.project(ret, t)
            }
            Query::Union { left, right, all } => {
                let (lf, mut lr) = self.query(left, input.clone())?;
                let (rf, rr) = self.query(right, input)?;
                if lf != rf {
                    return Err(EngineError::FieldMismatch {
                        left: lf,
                        right: rf,
                    });
                }
                lr.extend(rr);
                if !*all {
                    lr.sort();
                    lr.dedup();
                }
                Ok((lf, lr))
            }
        }
    }

    fn clause(&self, c: &Clause, (fields, rows): Rows) -> Result<Rows, EngineError> {
        match c {
            Clause::Match {
                optional,
                pattern,
                filter,
            } => {
                let mut out_fields = fields.clone();
                out_fields.extend(pattern.free_vars());
                let mut out = Vec::new();
                for u in &rows {
                    let mut mine = Vec::new();
                    for ext in oracle_match(pattern, &self.ev, u)?.expanded() {
                        let row = u.concat(ext).expect("disjoint");
                        if self.passes(filter.as_ref(), &row)? {
                            mine.push(row);
                        }
                    }
                    if *optional && mine.is_empty() {
                        let mut row = u.clone();
                        for a in out_fields.difference(&fields) {
                            row = row.with(a.clone(), Value::Null).expect("fresh");
                        }
                        mine.push(row);
                    }
                    out.extend(mine);
                }
                Ok((out_fields, out))
            }
            Clause::With { projection, filter } => {
                let (f, rows) = self.project(projection, (fields, rows))?;
                let mut kept = Vec::new();
                for u in rows {
                    if self.passes(filter.as_ref(), &u)? {
                        kept.push(u);
                    }
                }
                Ok((f, kept))
            }
            Clause::Unwind { expr, alias } => {
                if fields.contains(alias) {
                    return Err(EngineError::NameClash(alias.clone()));
                }
                let mut out = Vec::new();
                for u in &rows {
                    let items = match self.ev.eval(expr, u)? {
                        Value::List(vs) => vs,
                        v => vec![v],
                    };
                    for v in items {
                        out.push(u.clone().with(alias.clone(), v).expect("fresh"));
                    }
                }
                let mut f = fields;
                f.insert(alias.clone());
                Ok((f, out))
            }
        }
    }

    fn passes(&self, filter: Option<&Expr>, u: &Record) -> Result<bool, EngineError> {
        Ok(match filter {
            None => true,
            Some(e) => self.ev.eval(e, u)? == Value::Bool(true),
        })
    }

    fn project(&self, p: &Projection, (fields, rows): Rows) -> Result<Rows, EngineError> {
        let mut items: Vec<(String, Expr)> = Vec::new();
        if p.star {
            if fields.is_empty() {
                return Err(EngineError::StarOnEmptyFields);
            }
            for b in &fields {
                items.push((b.clone(), Expr::var(b.clone())));
            }
        }
        for it in &p.items {
            let a = it.alias.clone().unwrap_or_else(|| alias(&it.expr));
            if items.iter().any(|(b, _)| *b == a) {
                return Err(EngineError::AliasClash(a));
            }
            items.push((a, it.expr.clone()));
        }
        let out_fields = items.iter().map(|(a, _)| a.clone()).collect();
        let mut out = Vec::new();
        for u in &rows {
            let mut row = Record::new();
            for (a, e) in &items {
                row = row.with(a.clone(), self.ev.eval(e, u)?).expect("distinct");
            }
            out.push(row);
        }
        Ok((out_fields, out))
    }
}

/// Bounds and alphabets for [`gen_case`].
#[derive(Debug, Clone)]
pub struct GenConfig {
    pub max_nodes: usize,
    pub max_rels: usize,
    pub labels: Vec<String>,
    pub types: Vec<String>,
    pub keys: Vec<String>,
    /// Relationship slots per MATCH, summed over the tuple.
    pub max_slots: usize,
    pub max_range: u64,
    /// Clauses before `RETURN`.
    pub max_clauses: usize,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_nodes: 5,
            max_rels: 5,
            labels: vec!["A".into(), "B".into()],
            types: vec!["T".into(), "U".into()],
            keys: vec!["k".into()],
            max_slots: 3,
            max_range: 3,
            max_clauses: 3,
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn with_seed(seed: u64) -> Self {
        GenConfig {
            seed,
            ..GenConfig::default()
        }
    }
}

/// A deterministic pseudo-random graph and query.
pub fn gen_case(cfg: &GenConfig) -> (PropertyGraph, Query) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let g = gen_graph(cfg, &mut rng);
    let q = QueryGen::new(cfg, &mut rng).query();
    (g, q)
}

pub fn gen_graph(cfg: &GenConfig, rng: &mut impl Rng) -> PropertyGraph {
    let n = if rng.gen_bool(0.05) {
        0
    } else {
        rng.gen_range(1..=cfg.max_nodes.max(1))
    };
    let m = if n == 0 {
        0
    } else {
        rng.gen_range(0..=cfg.max_rels)
    };
    let mut b = GraphBuilder::new();
    for i in 1..=n {
        let labels: Vec<&String> = cfg.labels.iter().filter(|_| rng.gen_bool(0.4)).collect();
        let props = gen_props(&cfg.keys, rng);
        b.add_node(&format!("n{i}"), labels, props)
            .expect("fresh node id");
    }
    for i in 1..=m {
        let s = rng.gen_range(1..=n);
        let t = rng.gen_range(1..=n);
        let ty = cfg.types.choose(rng).expect("type alphabet").clone();
        let props = gen_props(&cfg.keys, rng);
        b.add_rel(
            &format!("r{i}"),
            &ty,
            &format!("n{s}"),
            &format!("n{t}"),
            props,
        )
        .expect("endpoints exist");
    }
    b.build()
}

fn gen_props(keys: &[String], rng: &mut impl Rng) -> Vec<(String, Value)> {
    let mut out = Vec::new();
    for k in keys {
        if rng.gen_bool(0.6) {
            out.push((k.clone(), Value::Int(rng.gen_range(0..3))));
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kind {
    Node,
    Rel,
    RelList,
    Path,
    Other,
}

struct QueryGen<'c, 'r, R: Rng> {
    cfg: &'c GenConfig,
    rng: &'r mut R,
    counter: usize,
}

impl<'c, 'r, R: Rng> QueryGen<'c, 'r, R> {
    fn new(cfg: &'c GenConfig, rng: &'r mut R) -> Self {
        QueryGen {
            cfg,
            rng,
            counter: 0,
        }
    }

    fn fresh(&mut self, prefix: &str) -> String {
        self.counter += 1;
        format!("{prefix}{}", self.counter)
    }

    fn query(&mut self) -> Query {
        if self.rng.gen_bool(0.12) {
            let width = self.rng.gen_range(1..=2);
            let cols: Vec<String> = (0..width).map(|i| format!("o{i}")).collect();
            let left = self.single(Some(&cols));
            let right = self.single(Some(&cols));
            Query::Union {
                left: Box::new(left),
                right: Box::new(right),
                all: self.rng.gen_bool(0.5),
            }
        } else {
            self.single(None)
        }
    }

    fn single(&mut self, cols: Option<&[String]>) -> Query {
        let mut scope: Vec<(String, Kind)> = Vec::new();
        let n = self.rng.gen_range(1..=self.cfg.max_clauses.max(1));
        let mut clauses = Vec::new();
        for i in 0..n {
            let c = if i == 0 || self.rng.gen_bool(0.6) {
                self.match_clause(&mut scope)
            } else if self.rng.gen_bool(0.5) {
                self.unwind(&mut scope)
            } else {
                self.with(&mut scope)
            };
            clauses.push(c);
        }
        let ret = self.ret(&scope, cols);
        Query::Single { clauses, ret }
    }

    fn names_of(scope: &[(String, Kind)], kind: Kind) -> Vec<String> {
        scope
            .iter()
            .filter(|(_, k)| *k == kind)
            .map(|(a, _)| a.clone())
            .collect()
    }

    fn small_int(&mut self) -> Expr {
        Expr::int(self.rng.gen_range(0..3))
    }

    // a property-map value: a literal, or a property of a node in scope
    fn prop_value(&mut self, nodes: &[String]) -> Expr {
        if !nodes.is_empty() && self.rng.gen_bool(0.4) {
            let a = nodes.choose(self.rng).unwrap().clone();
            let k = self.cfg.keys.choose(self.rng).unwrap().clone();
            Expr::synth(ExprKind::Prop(Box::new(Expr::var(a)), k))
        } else {
            self.small_int()
        }
    }

    fn props(&mut self, nodes: &[String], p: f64) -> Vec<(String, Expr)> {
        if self.rng.gen_bool(p) {
            let k = self.cfg.keys.choose(self.rng).unwrap().clone();
            vec![(k, self.prop_value(nodes))]
        } else {
            Vec::new()
        }
    }

    fn node_pattern(&mut self, scope: &mut Vec<(String, Kind)>) -> NodePattern {
        let nodes = Self::names_of(scope, Kind::Node);
        let name = if self.rng.gen_bool(0.45) {
            None
        } else if !nodes.is_empty() && self.rng.gen_bool(0.35) {
            Some(nodes.choose(self.rng).unwrap().clone())
        } else {
            let a = self.fresh("a");
            scope.push((a.clone(), Kind::Node));
            Some(a)
        };
        let labels = if self.rng.gen_bool(0.3) {
            vec![self.cfg.labels.choose(self.rng).unwrap().clone()]
        } else {
            Vec::new()
        };
        let props = self.props(&Self::names_of(scope, Kind::Node), 0.15);
        NodePattern {
            name,
            labels,
            props,
            span: Span::default(),
        }
    }

    fn length(&mut self) -> Option<Length> {
        let hi = self.cfg.max_range;
        let bound = |rng: &mut R| rng.gen_range(0..=hi);
        match self.rng.gen_range(0..10) {
            0..=3 => None,
            4 => Some(Length {
                min: None,
                max: None,
            }),
            5 => Some(Length {
                min: Some(0),
                max: None,
            }),
            6 => Some(Length::exact(bound(self.rng))),
            7 => Some(Length {
                min: None,
                max: Some(bound(self.rng)),
            }),
            8 => Some(Length {
                min: Some(bound(self.rng)),
                max: None,
            }),
            _ => {
                let a = bound(self.rng);
                let b = bound(self.rng);
                Some(Length {
                    min: Some(a),
                    max: Some(b),
                })
            }
        }
    }

    fn rel_pattern(&mut self, scope: &mut Vec<(String, Kind)>) -> RelPattern {
        let direction = match self.rng.gen_range(0..5) {
            0 | 1 => Direction::Both,
            2 | 3 => Direction::Outgoing,
            _ => Direction::Incoming,
        };
        let length = self.length();
        let name = if self.rng.gen_bool(0.3) {
            let a = self.fresh("r");
            let kind = if length.is_none() {
                Kind::Rel
            } else {
                Kind::RelList
            };
            scope.push((a.clone(), kind));
            Some(a)
        } else {
            None
        };
        let mut types = Vec::new();
        if self.rng.gen_bool(0.5) {
            types.push(self.cfg.types.choose(self.rng).unwrap().clone());
            if self.rng.gen_bool(0.2) {
                let t = self.cfg.types.choose(self.rng).unwrap().clone();
                if !types.contains(&t) {
                    types.push(t);
                }
            }
        }
        let props = self.props(&Self::names_of(scope, Kind::Node), 0.1);
        RelPattern {
            direction,
            name,
            types,
            props,
            length,
            span: Span::default(),
        }
    }

    fn path_pattern(&mut self, slots: usize, scope: &mut Vec<(String, Kind)>) -> PathPattern {
        let start = self.node_pattern(scope);
        let mut steps = Vec::new();
        for _ in 0..slots {
            let r = self.rel_pattern(scope);
            let n = self.node_pattern(scope);
            steps.push((r, n));
        }
        let name = if self.rng.gen_bool(0.15) {
            let a = self.fresh("p");
            scope.push((a.clone(), Kind::Path));
            Some(a)
        } else {
            None
        };
        PathPattern {
            name,
            start,
            steps,
            span: Span::default(),
        }
    }

    fn match_clause(&mut self, scope: &mut Vec<(String, Kind)>) -> Clause {
        let optional = self.rng.gen_bool(0.2);
        let total = self.rng.gen_range(0..=self.cfg.max_slots);
        let parts = if total >= 1 && self.rng.gen_bool(0.3) {
            2
        } else {
            1
        };
        let mut pats = Vec::new();
        let first = if parts == 2 {
            self.rng.gen_range(0..=total)
        } else {
            total
        };
        pats.push(self.path_pattern(first, scope));
        if parts == 2 {
            pats.push(self.path_pattern(total - first, scope));
        }
        let filter = if self.rng.gen_bool(0.3) {
            Some(self.condition(scope, 2))
        } else {
            None
        };
        Clause::Match {
            optional,
            pattern: PatternTuple(pats),
            filter,
        }
    }

    fn unwind(&mut self, scope: &mut Vec<(String, Kind)>) -> Clause {
        let lists = Self::names_of(scope, Kind::RelList);
        let expr = if !lists.is_empty() && self.rng.gen_bool(0.5) {
            Expr::var(lists.choose(self.rng).unwrap().clone())
        } else {
            let n = if self.rng.gen_bool(0.1) {
                0
            } else {
                self.rng.gen_range(1..=3)
            };
            Expr::synth(ExprKind::List((0..n).map(|_| self.small_int()).collect()))
        };
        let alias = self.fresh("u");
        scope.push((alias.clone(), Kind::Other));
        Clause::Unwind { expr, alias }
    }

    fn with(&mut self, scope: &mut Vec<(String, Kind)>) -> Clause {
        let star = !scope.is_empty() && self.rng.gen_bool(0.3);
        let mut items = Vec::new();
        let mut next_scope = if star { scope.clone() } else { Vec::new() };
        for (a, kind) in scope.iter() {
            if star || !self.rng.gen_bool(0.6) {
                continue;
            }
            if self.rng.gen_bool(0.3) {
                let b = self.fresh("w");
                items.push(ProjectionItem {
                    expr: Expr::var(a.clone()),
                    alias: Some(b.clone()),
                });
                next_scope.push((b, *kind));
            } else {
                items.push(ProjectionItem {
                    expr: Expr::var(a.clone()),
                    alias: None,
                });
                next_scope.push((a.clone(), *kind));
            }
        }
        if !star && items.is_empty() {
            let b = self.fresh("w");
            items.push(ProjectionItem {
                expr: self.small_int(),
                alias: Some(b.clone()),
            });
            next_scope.push((b, Kind::Other));
        }
        *scope = next_scope;
        let filter = if self.rng.gen_bool(0.25) {
            Some(self.condition(scope, 2))
        } else {
            None
        };
        Clause::With {
            projection: Projection { star, items },
            filter,
        }
    }

    fn term(&mut self, scope: &[(String, Kind)]) -> Expr {
        let nodes = Self::names_of(scope, Kind::Node);
        let rels = Self::names_of(scope, Kind::Rel);
        let lists = Self::names_of(scope, Kind::RelList);
        match self.rng.gen_range(0..4) {
            0 if !nodes.is_empty() || !rels.is_empty() => {
                let pool = if nodes.is_empty() || (!rels.is_empty() && self.rng.gen_bool(0.3)) {
                    rels
                } else {
                    nodes
                };
                let a = pool.choose(self.rng).unwrap().clone();
                let k = self.cfg.keys.choose(self.rng).unwrap().clone();
                Expr::synth(ExprKind::Prop(Box::new(Expr::var(a)), k))
            }
            1 if !lists.is_empty() => {
                let a = lists.choose(self.rng).unwrap().clone();
                Expr::synth(ExprKind::Call("size".into(), vec![Expr::var(a)]))
            }
            // occasionally a string, so that ordering comparisons can fail
            2 if self.rng.gen_bool(0.1) => Expr::synth(ExprKind::Literal(Literal::Str("a".into()))),
            _ => self.small_int(),
        }
    }

    fn condition(&mut self, scope: &[(String, Kind)], depth: usize) -> Expr {
        if depth > 0 && self.rng.gen_bool(0.3) {
            let a = self.condition(scope, depth - 1);
            if self.rng.gen_bool(0.25) {
                return Expr::synth(ExprKind::Not(Box::new(a)));
            }
            let b = self.condition(scope, depth - 1);
            let op = *[LogicOp::And, LogicOp::Or, LogicOp::Xor]
                .choose(self.rng)
                .unwrap();
            return Expr::synth(ExprKind::Logic(op, Box::new(a), Box::new(b)));
        }
        let nodes = Self::names_of(scope, Kind::Node);
        match self.rng.gen_range(0..4) {
            0 if nodes.len() >= 2 => {
                let a = nodes.choose(self.rng).unwrap().clone();
                let b = nodes.choose(self.rng).unwrap().clone();
                let op = if self.rng.gen_bool(0.5) {
                    CmpOp::Eq
                } else {
                    CmpOp::Ne
                };
                Expr::synth(ExprKind::Cmp(
                    op,
                    Box::new(Expr::var(a)),
                    Box::new(Expr::var(b)),
                ))
            }
            1 if !scope.is_empty() => {
                let (a, _) = scope.choose(self.rng).unwrap().clone();
                Expr::synth(ExprKind::IsNull {
                    expr: Box::new(Expr::var(a)),
                    negated: self.rng.gen_bool(0.5),
                })
            }
            _ => {
                let a = self.term(scope);
                let b = self.term(scope);
                let op = *[
                    CmpOp::Lt,
                    CmpOp::Le,
                    CmpOp::Ge,
                    CmpOp::Gt,
                    CmpOp::Eq,
                    CmpOp::Ne,
                ]
                .choose(self.rng)
                .unwrap();
                Expr::synth(ExprKind::Cmp(op, Box::new(a), Box::new(b)))
            }
        }
    }

    fn ret(&mut self, scope: &[(String, Kind)], cols: Option<&[String]>) -> Projection {
        if let Some(cols) = cols {
            let items = cols
                .iter()
                .map(|c| {
                    let expr = if !scope.is_empty() && self.rng.gen_bool(0.7) {
                        Expr::var(scope.choose(self.rng).unwrap().0.clone())
                    } else {
                        self.term(scope)
                    };
                    ProjectionItem {
                        expr,
                        alias: Some(c.clone()),
                    }
                })
                .collect();
            return Projection { star: false, items };
        }
        if !scope.is_empty() && self.rng.gen_bool(0.3) {
            return Projection {
                star: true,
                items: Vec::new(),
            };
        }
        let mut items = Vec::new();
        for (a, _) in scope {
            if self.rng.gen_bool(0.6) {
                items.push(ProjectionItem {
                    expr: Expr::var(a.clone()),
                    alias: None,
                });
            }
        }
        if items.is_empty() || self.rng.gen_bool(0.3) {
            let b = self.fresh("x");
            items.push(ProjectionItem {
                expr: self.term(scope),
                alias: Some(b),
            });
        }
        Projection { star: false, items }
    }
}

/// A failing case in replayable form: the graph document and query text.
pub fn serialize_case(g: &PropertyGraph, q: &Query) -> String {
    format!("// graph\n{}\n// query\n{q}\n", g.to_json_string())
}

#[cfg(test)]
mod tests;
