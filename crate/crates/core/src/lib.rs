//! A reference interpreter for the read-only core of Cypher.
//!
//! Queries are parsed into [`ast`] form and evaluated as functions from
//! tables to tables ([`engine`]), starting from the unit table. Pattern
//! matching ([`matcher`]) returns bags of variable bindings, one copy per
//! (rigid pattern, path) witness. Expressions ([`evaluator`]) follow
//! three-valued logic with `null`. The [`oracle`] module is an independent
//! brute-force implementation of matching and clause semantics used for
//! differential testing.

pub mod ast;
pub mod engine;
pub mod evaluator;
pub mod fixtures;
pub mod graph;
pub mod matcher;
pub mod oracle;
pub mod par;
pub mod parser;
pub mod tables;
pub mod values;

pub use ast::Query;
pub use engine::{output, Engine, EngineError, ExecMode};
pub use evaluator::{EvalError, Evaluator};
pub use graph::{Direction, PropertyGraph};
pub use parser::{parse_expr, parse_pattern, parse_query, ParseError};
pub use tables::{Record, Table};
pub use values::{NodeId, RelId, Trilean, Value};
