//! Clauses and queries as functions from tables to tables.
//!
//! A query is run against the unit table, the table with one empty record.
//! Each clause maps rows independently, so rows are processed in parallel
//! when the engine runs in [`ExecMode::Parallel`]; the resulting bag does not
//! depend on the mode.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ast::{Clause, Expr, PatternTuple, Projection, Query};
use crate::evaluator::{EvalError, Evaluator};
use crate::graph::PropertyGraph;
use crate::matcher::Matcher;
use crate::par;
pub use crate::par::ExecMode;
use crate::tables::{Record, Table, TableError};
use crate::values::Value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("output name `{0}` is used more than once")]
    AliasClash(String),
    #[error("`*` requires at least one field in scope")]
    StarOnEmptyFields,
    #[error("UNION branches return different fields: {left:?} and {right:?}")]
    FieldMismatch {
        left: BTreeSet<String>,
        right: BTreeSet<String>,
    },
    #[error("name `{0}` is already bound")]
    NameClash(String),
}

impl From<TableError> for EngineError {
    fn from(err: TableError) -> Self {
        match err {
            TableError::NameClash(a) => EngineError::NameClash(a),
            TableError::FieldMismatch { left, right } => EngineError::FieldMismatch { left, right },
            TableError::NonUniform { .. } => unreachable!("engine rows are uniform: {err}"),
        }
    }
}

/// The column name of an un-aliased projection item: a variable keeps its
/// name, anything else is named by its canonical text.
pub fn alias(e: &Expr) -> String {
    match e.as_var() {
        Some(a) => a.to_string(),
        None => e.to_string(),
    }
}

#[derive(Debug, Clone)]
pub struct Engine<'g> {
    ev: Evaluator<'g>,
    mode: ExecMode,
}

impl<'g> Engine<'g> {
    pub fn new(graph: &'g PropertyGraph) -> Self {
        Engine::with_mode(graph, ExecMode::default())
    }

    pub fn with_mode(graph: &'g PropertyGraph, mode: ExecMode) -> Self {
        Engine {
            ev: Evaluator::new(graph),
            mode,
        }
    }

    pub fn with_evaluator(ev: Evaluator<'g>, mode: ExecMode) -> Self {
        Engine { ev, mode }
    }

    pub fn evaluator(&self) -> &Evaluator<'g> {
        &self.ev
    }

    pub fn mode(&self) -> ExecMode {
        self.mode
    }

    /// `⟦Q⟧_G(T_unit)`.
    pub fn output(&self, q: &Query) -> Result<Table, EngineError> {
        self.run_query(q, &Table::unit())
    }

    pub fn run_query(&self, q: &Query, t: &Table) -> Result<Table, EngineError> {
        match q {
            Query::Single { clauses, ret } => {
                let mut t = t.clone();
                for c in clauses {
                    t = self.run_clause(c, &t)?;
                }
                self.project(ret, &t, false)
            }
            Query::Union { left, right, all } => {
                let l = self.run_query(left, t)?;
                let r = self.run_query(right, t)?;
                let union = l.bag_union(&r)?;
                Ok(if *all { union } else { union.distinct() })
            }
        }
    }

    pub fn run_clause(&self, c: &Clause, t: &Table) -> Result<Table, EngineError> {
        match c {
            Clause::Match {
                optional: false,
                pattern,
                filter,
            } => {
                let matched = self.match_rows(pattern, t)?;
                match filter {
                    Some(e) => self.filter(e, &matched),
                    None => Ok(matched),
                }
            }
            Clause::Match {
                optional: true,
                pattern,
                filter,
            } => self.optional_match(pattern, filter.as_ref(), t),
            Clause::With { projection, filter } => {
                let projected = self.project(projection, t, true)?;
                match filter {
                    Some(e) => self.filter(e, &projected),
                    None => Ok(projected),
                }
            }
            Clause::Unwind { expr, alias } => self.unwind(expr, alias, t),
        }
    }

    /// `WHERE e`: keeps the rows on which `e` is exactly `true`.
    pub fn filter(&self, e: &Expr, t: &Table) -> Result<Table, EngineError> {
        self.per_row(t, t.fields().clone(), |u| {
            let keep = self.ev.eval(e, u)? == Value::Bool(true);
            Ok(if keep {
                vec![(u.clone(), 1)]
            } else {
                Vec::new()
            })
        })
    }

    fn matcher(&self) -> Matcher<'_, 'g> {
        Matcher::new(&self.ev, self.mode)
    }

    fn match_fields(pattern: &PatternTuple, t: &Table) -> BTreeSet<String> {
        t.fields().union(&pattern.free_vars()).cloned().collect()
    }

    fn match_rows(&self, pattern: &PatternTuple, t: &Table) -> Result<Table, EngineError> {
        let matcher = self.matcher();
        self.per_row(t, Self::match_fields(pattern, t), |u| {
            let found = matcher.match_tuple(pattern, u)?;
            found
                .iter()
                .map(|(ext, count)| Ok((u.concat(ext)?, count)))
                .collect()
        })
    }

    fn optional_match(
        &self,
        pattern: &PatternTuple,
        filter: Option<&Expr>,
        t: &Table,
    ) -> Result<Table, EngineError> {
        let fields = Self::match_fields(pattern, t);
        let padding: Vec<String> = fields.difference(t.fields()).cloned().collect();
        let matcher = self.matcher();
        self.per_row(t, fields.clone(), |u| {
            let mut rows = Vec::new();
            for (ext, count) in matcher.match_tuple(pattern, u)?.iter() {
                let row = u.concat(ext)?;
                let keep = match filter {
                    Some(e) => self.ev.eval(e, &row)? == Value::Bool(true),
                    None => true,
                };
                if keep {
                    rows.push((row, count));
                }
            }
            if rows.is_empty() {
                let mut row = u.clone();
                for a in &padding {
                    row = row.with(a.clone(), Value::Null)?;
                }
                rows.push((row, 1));
            }
            Ok(rows)
        })
    }

    fn unwind(&self, e: &Expr, a: &str, t: &Table) -> Result<Table, EngineError> {
        if t.fields().contains(a) {
            return Err(EngineError::NameClash(a.to_string()));
        }
        let mut fields = t.fields().clone();
        fields.insert(a.to_string());
        self.per_row(t, fields, |u| {
            let values = match self.ev.eval(e, u)? {
                Value::List(items) => items,
                other => vec![other],
            };
            values
                .into_iter()
                .map(|v| Ok((u.clone().with(a, v)?, 1)))
                .collect()
        })
    }

    /// `RETURN` / `WITH` projection. Output names are checked before any row
    /// is evaluated.
    fn project(&self, p: &Projection, t: &Table, is_with: bool) -> Result<Table, EngineError> {
        let mut columns: Vec<(String, Expr)> = Vec::new();
        if p.star {
            if t.fields().is_empty() {
                return Err(EngineError::StarOnEmptyFields);
            }
            columns.extend(t.fields().iter().map(|b| (b.clone(), Expr::var(b.clone()))));
        }
        for item in &p.items {
            let name = match &item.alias {
                Some(a) => a.clone(),
                None => {
                    debug_assert!(!is_with || item.expr.as_var().is_some());
                    alias(&item.expr)
                }
            };
            columns.push((name, item.expr.clone()));
        }
        let mut names = BTreeSet::new();
        for (a, _) in &columns {
            if !names.insert(a.clone()) {
                return Err(EngineError::AliasClash(a.clone()));
            }
        }
        self.per_row(t, names, |u| {
            let row = columns
                .iter()
                .map(|(a, e)| Ok((a.clone(), self.ev.eval(e, u)?)))
                .collect::<Result<Record, EvalError>>()?;
            Ok(vec![(row, 1)])
        })
    }

    // Applies `f` to each distinct row and scales the produced counts by the
    // row's multiplicity.
    fn per_row<F>(&self, t: &Table, fields: BTreeSet<String>, f: F) -> Result<Table, EngineError>
    where
        F: Fn(&Record) -> Result<Vec<(Record, usize)>, EngineError> + Sync + Send,
    {
        let rows: Vec<(&Record, usize)> = t.iter().collect();
        let produced = par::try_map(self.mode, &rows, |&(u, count)| f(u).map(|out| (out, count)))?;
        let mut table = Table::empty(fields);
        for (out, count) in produced {
            for (row, c) in out {
                table.push(row, c * count)?;
            }
        }
        Ok(table)
    }
}

/// `output(Q, G)`.
pub fn output(q: &Query, g: &PropertyGraph) -> Result<Table, EngineError> {
    Engine::new(g).output(q)
}
