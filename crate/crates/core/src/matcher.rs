//! Pattern matching: the satisfaction relation and the bag-valued
//! `match(π̄, G, u)`.
//!
//! A variable-length pattern stands for the infinite set of rigid patterns it
//! subsumes, and every (rigid pattern, path tuple) pair that satisfies the
//! pattern contributes one copy of its binding. The search below walks each
//! relationship slot hop by hop; at every hop count inside the slot's range it
//! may close the slot and move on, so each pair is visited exactly once.
//! Relationships are never reused within a tuple, which bounds every walk by
//! the number of relationships in the graph.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::{Expr, NodePattern, PathPattern, PatternTuple, RelPattern};
use crate::evaluator::{equals, EvalError, EvalErrorKind, Evaluator};
use crate::graph::{Direction, Element, PropertyGraph};
use crate::par::{self, ExecMode};
use crate::tables::{Record, Table};
use crate::values::{NodeId, PathValue, RelId, Trilean, Value};

/// Counters collected during one search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MatchStats {
    /// Longest partial walk explored, in relationships used across the tuple.
    pub max_walk_hops: usize,
    /// Satisfying (rigid pattern, path tuple) pairs found.
    pub witnesses: usize,
}

impl MatchStats {
    fn merge(&mut self, other: MatchStats) {
        self.max_walk_hops = self.max_walk_hops.max(other.max_walk_hops);
        self.witnesses += other.witnesses;
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Matcher<'e, 'g> {
    ev: &'e Evaluator<'g>,
    mode: ExecMode,
}

impl<'e, 'g> Matcher<'e, 'g> {
    pub fn new(ev: &'e Evaluator<'g>, mode: ExecMode) -> Self {
        Matcher { ev, mode }
    }

    /// `match(π̄, G, u)`: a table over `free(π̄) − dom(u)`.
    pub fn match_tuple(&self, pats: &PatternTuple, u: &Record) -> Result<Table, EvalError> {
        self.match_tuple_with_stats(pats, u).map(|(t, _)| t)
    }

    pub fn match_tuple_with_stats(
        &self,
        pats: &PatternTuple,
        u: &Record,
    ) -> Result<(Table, MatchStats), EvalError> {
        check_scope(pats, u)?;
        let fields: BTreeSet<String> = pats
            .free_vars()
            .into_iter()
            .filter(|a| !u.contains(a))
            .collect();
        let g = self.ev.graph();
        let patterns = pats.patterns();

        let parts = if self.mode.is_parallel() && !patterns.is_empty() {
            let starts: Vec<NodeId> = g.nodes().collect();
            par::try_map(self.mode, &starts, |&n| {
                let mut s = Search::new(self.ev, patterns, u, None);
                s.component(0, Some(n))?;
                Ok((s.out, s.stats))
            })?
        } else {
            let mut s = Search::new(self.ev, patterns, u, None);
            s.component(0, None)?;
            vec![(s.out, s.stats)]
        };

        let mut table = Table::empty(fields);
        let mut stats = MatchStats::default();
        for (rows, st) in parts {
            stats.merge(st);
            for (record, count) in rows {
                table
                    .push(record, count)
                    .expect("match rows bind exactly the unbound free names");
            }
        }
        Ok((table, stats))
    }

    /// `(n, G, u) ⊨ χ`. Names used by the pattern must be bound in `u`.
    pub fn satisfies_node(
        &self,
        n: NodeId,
        chi: &NodePattern,
        u: &Record,
    ) -> Result<bool, EvalError> {
        if let Some(a) = &chi.name {
            if u.get(a) != Some(&Value::Node(n)) {
                return Ok(false);
            }
        }
        let g = self.ev.graph();
        if !chi.labels.iter().all(|l| g.has_label(n, l)) {
            return Ok(false);
        }
        for (k, e) in &chi.props {
            if !prop_matches(self.ev, Element::Node(n), k, e, u)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `(p, G, u) ⊨ π`: some rigid pattern subsumed by `pat` is satisfied by
    /// `p`. Names of `pat` that `u` leaves unbound are existentially
    /// quantified.
    pub fn satisfies_path(
        &self,
        p: &PathValue,
        pat: &PathPattern,
        u: &Record,
    ) -> Result<bool, EvalError> {
        let pats = std::slice::from_ref(pat);
        check_scope(&PatternTuple(pats.to_vec()), u)?;
        let mut s = Search::new(self.ev, pats, u, Some(p));
        s.component(0, None)?;
        Ok(s.stats.witnesses > 0)
    }
}

/// Sequential `match(π̄, G, u)`.
pub fn match_tuple(
    pats: &PatternTuple,
    ev: &Evaluator<'_>,
    u: &Record,
) -> Result<Table, EvalError> {
    Matcher::new(ev, ExecMode::Sequential).match_tuple(pats, u)
}

// Every name in a property expression must be bound by `u` or by the pattern.
fn check_scope(pats: &PatternTuple, u: &Record) -> Result<(), EvalError> {
    let free = pats.free_vars();
    let exprs = pats.patterns().iter().flat_map(|p| {
        p.node_patterns()
            .flat_map(|n| n.props.iter())
            .chain(p.rel_patterns().flat_map(|r| r.props.iter()))
            .map(|(_, e)| e)
    });
    for e in exprs {
        for a in e.names() {
            if !free.contains(&a) && !u.contains(&a) {
                return Err(EvalError::new(
                    EvalErrorKind::UnknownName,
                    format!("unknown name `{a}`"),
                    e.span,
                ));
            }
        }
    }
    Ok(())
}

fn prop_matches(
    ev: &Evaluator<'_>,
    element: Element,
    key: &str,
    e: &Expr,
    u: &Record,
) -> Result<bool, EvalError> {
    let expected = ev.eval(e, u)?;
    let stored = ev
        .graph()
        .prop(element, key)
        .map_err(|err| EvalError::new(EvalErrorKind::TypeMismatch, err.to_string(), e.span))?;
    Ok(equals(&stored, &expected) == Trilean::True)
}

struct Check<'a> {
    element: Element,
    key: &'a str,
    expr: &'a Expr,
}

struct Search<'a, 'e, 'g> {
    ev: &'e Evaluator<'g>,
    g: &'g PropertyGraph,
    pats: &'a [PathPattern],
    base: &'a Record,
    along: Option<&'a PathValue>,
    extra: Vec<(&'a str, Value)>,
    pending: Vec<Check<'a>>,
    used: Vec<bool>,
    used_count: usize,
    nodes: Vec<NodeId>,
    rels: Vec<RelId>,
    out: BTreeMap<Record, usize>,
    stats: MatchStats,
}

type Mark = (usize, usize);

impl<'a, 'e, 'g> Search<'a, 'e, 'g> {
    fn new(
        ev: &'e Evaluator<'g>,
        pats: &'a [PathPattern],
        base: &'a Record,
        along: Option<&'a PathValue>,
    ) -> Self {
        let g = ev.graph();
        Search {
            ev,
            g,
            pats,
            base,
            along,
            extra: Vec::new(),
            pending: Vec::new(),
            used: vec![false; g.rel_count()],
            used_count: 0,
            nodes: Vec::new(),
            rels: Vec::new(),
            out: BTreeMap::new(),
            stats: MatchStats::default(),
        }
    }

    fn mark(&self) -> Mark {
        (self.extra.len(), self.pending.len())
    }

    fn reset(&mut self, (extra, pending): Mark) {
        self.extra.truncate(extra);
        self.pending.truncate(pending);
    }

    fn lookup(&self, name: &str) -> Option<&Value> {
        self.extra
            .iter()
            .rev()
            .find(|(a, _)| *a == name)
            .map(|(_, v)| v)
            .or_else(|| self.base.get(name))
    }

    // Binds a fresh name or checks an existing binding.
    fn bind(&mut self, name: &'a str, value: Value) -> bool {
        match self.lookup(name) {
            Some(v) => *v == value,
            None => {
                self.extra.push((name, value));
                true
            }
        }
    }

    fn assignment(&self) -> Record {
        self.base
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .chain(self.extra.iter().map(|(k, v)| (k.to_string(), v.clone())))
            .collect()
    }

    // Evaluates a property check now if its names are bound, else defers it.
    fn check(&mut self, element: Element, key: &'a str, expr: &'a Expr) -> Result<bool, EvalError> {
        let names = expr.names();
        if names.iter().all(|a| self.lookup(a).is_some()) {
            let u = if names.is_empty() {
                Record::new()
            } else {
                self.assignment()
            };
            prop_matches(self.ev, element, key, expr, &u)
        } else {
            self.pending.push(Check { element, key, expr });
            Ok(true)
        }
    }

    fn node_ok(&mut self, n: NodeId, chi: &'a NodePattern) -> Result<bool, EvalError> {
        if let Some(a) = &chi.name {
            if !self.bind(a, Value::Node(n)) {
                return Ok(false);
            }
        }
        if !chi.labels.iter().all(|l| self.g.has_label(n, l)) {
            return Ok(false);
        }
        for (k, e) in &chi.props {
            if !self.check(Element::Node(n), k, e)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn rel_ok(&mut self, r: RelId, rho: &'a RelPattern) -> Result<bool, EvalError> {
        if !rho.types.is_empty() && !rho.types.iter().any(|t| t == self.g.rel_type(r)) {
            return Ok(false);
        }
        for (k, e) in &rho.props {
            if !self.check(Element::Rel(r), k, e)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn start_candidates(&self, pat: &PathPattern, only: Option<NodeId>) -> Vec<NodeId> {
        if let Some(p) = self.along {
            return vec![p.start()];
        }
        let mut out: Vec<NodeId> = match pat.start.name.as_deref().and_then(|a| self.lookup(a)) {
            Some(Value::Node(n)) if self.g.contains_node(*n) => vec![*n],
            Some(_) => Vec::new(),
            None => self.g.nodes().collect(),
        };
        if let Some(n) = only {
            out.retain(|&m| m == n);
        }
        out
    }

    fn component(&mut self, i: usize, only: Option<NodeId>) -> Result<(), EvalError> {
        if i == self.pats.len() {
            return self.finish();
        }
        let pat = &self.pats[i];
        for n in self.start_candidates(pat, only) {
            let mark = self.mark();
            if self.node_ok(n, &pat.start)? {
                let (node_base, rel_base) = (self.nodes.len(), self.rels.len());
                self.nodes.push(n);
                self.step(i, 0, n, node_base, rel_base)?;
                self.nodes.truncate(node_base);
            }
            self.reset(mark);
        }
        Ok(())
    }

    fn step(
        &mut self,
        i: usize,
        j: usize,
        cur: NodeId,
        node_base: usize,
        rel_base: usize,
    ) -> Result<(), EvalError> {
        let pat = &self.pats[i];
        if j < pat.steps.len() {
            return self.slot(i, j, cur, self.rels.len(), node_base, rel_base);
        }
        if let Some(p) = self.along {
            if self.rels.len() - rel_base != p.hops() {
                return Ok(());
            }
        }
        let mark = self.mark();
        let ok = match &pat.name {
            Some(a) => {
                let path = PathValue::new(
                    self.nodes[node_base..].to_vec(),
                    self.rels[rel_base..].to_vec(),
                )
                .expect("walks alternate nodes and relationships");
                self.bind(a, Value::Path(path))
            }
            None => true,
        };
        if ok {
            self.component(i + 1, None)?;
        }
        self.reset(mark);
        Ok(())
    }

    fn slot(
        &mut self,
        i: usize,
        j: usize,
        cur: NodeId,
        slot_start: usize,
        node_base: usize,
        rel_base: usize,
    ) -> Result<(), EvalError> {
        let pats = self.pats;
        let (rho, next) = &pats[i].steps[j];
        let range = rho.range();
        let hops = (self.rels.len() - slot_start) as u64;

        if range.contains(hops) {
            let mark = self.mark();
            let bound = match &rho.name {
                None => true,
                Some(a) => {
                    let value = if range.single {
                        Value::Rel(self.rels[slot_start])
                    } else {
                        Value::List(
                            self.rels[slot_start..]
                                .iter()
                                .map(|&r| Value::Rel(r))
                                .collect(),
                        )
                    };
                    self.bind(a, value)
                }
            };
            if bound && self.node_ok(cur, next)? {
                self.step(i, j + 1, cur, node_base, rel_base)?;
            }
            self.reset(mark);
        }

        if range.hi.is_some_and(|hi| hops >= hi) {
            return Ok(());
        }
        let candidates = match rho.direction {
            Direction::Outgoing => self.g.outgoing(cur).to_vec(),
            Direction::Incoming => self.g.incoming(cur).to_vec(),
            Direction::Both => self
                .g
                .incident(cur, Direction::Both)
                .expect("walks stay inside the graph"),
        };
        for r in candidates {
            if self.used[r.index()] {
                continue;
            }
            if let Some(p) = self.along {
                if p.rels().get(self.rels.len() - rel_base) != Some(&r) {
                    continue;
                }
            }
            let mark = self.mark();
            if self.rel_ok(r, rho)? {
                let other = if self.g.src(r) == cur {
                    self.g.tgt(r)
                } else {
                    self.g.src(r)
                };
                self.used[r.index()] = true;
                self.used_count += 1;
                self.stats.max_walk_hops = self.stats.max_walk_hops.max(self.used_count);
                self.rels.push(r);
                self.nodes.push(other);
                self.slot(i, j, other, slot_start, node_base, rel_base)?;
                self.nodes.pop();
                self.rels.pop();
                self.used_count -= 1;
                self.used[r.index()] = false;
            }
            self.reset(mark);
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<(), EvalError> {
        if !self.pending.is_empty() {
            let u = self.assignment();
            for c in &self.pending {
                if !prop_matches(self.ev, c.element, c.key, c.expr, &u)? {
                    return Ok(());
                }
            }
        }
        let record: Record = self
            .extra
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect();
        *self.out.entry(record).or_insert(0) += 1;
        self.stats.witnesses += 1;
        Ok(())
    }
}
