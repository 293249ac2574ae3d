//! Records and tables.
//!
//! A [`Record`] is a finite partial map from names to values. A [`Table`] is a
//! bag of records that all share the same domain (its fields). Tables are
//! stored as a counted multiset keyed by the record itself, so neither row
//! order nor column order is observable and table equality is bag equality.
//! Bag counting uses structural identity of values, in which `null` is
//! identical to `null`.

use std::collections::{btree_map, BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::values::Value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("name `{0}` is bound on both sides")]
    NameClash(String),
    #[error("tables have different fields: {left:?} vs {right:?}")]
    FieldMismatch {
        left: BTreeSet<String>,
        right: BTreeSet<String>,
    },
    #[error("record over {found:?} does not fit a table with fields {expected:?}")]
    NonUniform {
        expected: BTreeSet<String>,
        found: BTreeSet<String>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Record(BTreeMap<String, Value>);

impl Record {
    pub fn new() -> Self {
        Record::default()
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn dom(&self) -> BTreeSet<String> {
        self.0.keys().cloned().collect()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// `(u, a:v)`; fails when `a` is already bound.
    pub fn with(mut self, name: impl Into<String>, value: Value) -> Result<Record, TableError> {
        match self.0.entry(name.into()) {
            btree_map::Entry::Occupied(e) => Err(TableError::NameClash(e.key().clone())),
            btree_map::Entry::Vacant(e) => {
                e.insert(value);
                Ok(self)
            }
        }
    }

    /// `(u, u')` for records with disjoint domains.
    pub fn concat(&self, other: &Record) -> Result<Record, TableError> {
        let mut out = self.clone();
        for (k, v) in &other.0 {
            out = out.with(k.clone(), v.clone())?;
        }
        Ok(out)
    }

    /// Keeps only the given names.
    pub fn restrict(&self, names: &BTreeSet<String>) -> Record {
        Record(
            self.0
                .iter()
                .filter(|(k, _)| names.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        )
    }
}

impl FromIterator<(String, Value)> for Record {
    fn from_iter<I: IntoIterator<Item = (String, Value)>>(iter: I) -> Self {
        Record(iter.into_iter().collect())
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}: {v:?}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    fields: BTreeSet<String>,
    rows: BTreeMap<Record, usize>,
}

impl Table {
    pub fn empty<I, S>(fields: I) -> Table
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Table {
            fields: fields.into_iter().map(Into::into).collect(),
            rows: BTreeMap::new(),
        }
    }

    /// The table holding exactly one empty record.
    pub fn unit() -> Table {
        let mut t = Table::empty(Vec::<String>::new());
        t.rows.insert(Record::new(), 1);
        t
    }

    pub fn from_records<I>(fields: BTreeSet<String>, records: I) -> Result<Table, TableError>
    where
        I: IntoIterator<Item = Record>,
    {
        let mut t = Table {
            fields,
            rows: BTreeMap::new(),
        };
        for r in records {
            t.push(r, 1)?;
        }
        Ok(t)
    }

    /// Adds `count` copies of `record`.
    pub fn push(&mut self, record: Record, count: usize) -> Result<(), TableError> {
        if record.0.len() != self.fields.len() || !record.0.keys().eq(self.fields.iter()) {
            return Err(TableError::NonUniform {
                expected: self.fields.clone(),
                found: record.dom(),
            });
        }
        if count > 0 {
            *self.rows.entry(record).or_insert(0) += count;
        }
        Ok(())
    }

    pub fn fields(&self) -> &BTreeSet<String> {
        &self.fields
    }

    /// Total number of rows, counting multiplicities.
    pub fn len(&self) -> usize {
        self.rows.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Number of distinct records.
    pub fn support_len(&self) -> usize {
        self.rows.len()
    }

    pub fn multiplicity(&self, record: &Record) -> usize {
        self.rows.get(record).copied().unwrap_or(0)
    }

    /// Distinct records with their multiplicities, in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&Record, usize)> {
        self.rows.iter().map(|(r, &c)| (r, c))
    }

    /// Every row, with duplicates repeated.
    pub fn expanded(&self) -> impl Iterator<Item = &Record> {
        self.rows
            .iter()
            .flat_map(|(r, &c)| std::iter::repeat_n(r, c))
    }

    /// Bag union: multiplicities add up.
    pub fn bag_union(&self, other: &Table) -> Result<Table, TableError> {
        let mut out = self.clone();
        out.absorb(other.clone())?;
        Ok(out)
    }

    /// In-place bag union.
    pub fn absorb(&mut self, other: Table) -> Result<(), TableError> {
        if self.fields != other.fields {
            return Err(TableError::FieldMismatch {
                left: self.fields.clone(),
                right: other.fields,
            });
        }
        for (r, c) in other.rows {
            *self.rows.entry(r).or_insert(0) += c;
        }
        Ok(())
    }

    /// Duplicate elimination.
    pub fn distinct(&self) -> Table {
        Table {
            fields: self.fields.clone(),
            rows: self.rows.keys().map(|r| (r.clone(), 1)).collect(),
        }
    }
}
