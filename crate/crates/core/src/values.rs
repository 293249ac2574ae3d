//! The value universe: identifiers, integers, strings, trileans, lists, maps
//! and paths, plus the registry of base functions callable from expressions.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{BitAnd, BitOr, BitXor, Not};

use thiserror::Error;

/// Dense identifier of a node inside one [`PropertyGraph`](crate::graph::PropertyGraph).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

/// Dense identifier of a relationship inside one graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl RelId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValueError {
    #[error("cannot concatenate paths: first ends at node {left_end}, second starts at node {right_start}")]
    ConcatMismatch { left_end: u32, right_start: u32 },
    #[error("malformed path: {nodes} nodes and {rels} relationships")]
    MalformedPath { nodes: usize, rels: usize },
    #[error("duplicate map key `{0}`")]
    DuplicateKey(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("function `{name}` called with {got} argument(s), expected {expected}")]
    ArityMismatch {
        name: String,
        expected: String,
        got: usize,
    },
    #[error("function `{function}` is not defined on {got}")]
    TypeMismatch { function: String, got: String },
    #[error("integer overflow in `{0}`")]
    Overflow(String),
}

/// A path value `n1 r1 n2 ... r(m-1) nm`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathValue {
    nodes: Vec<NodeId>,
    rels: Vec<RelId>,
}

impl PathValue {
    pub fn single(node: NodeId) -> Self {
        PathValue {
            nodes: vec![node],
            rels: Vec::new(),
        }
    }

    pub fn new(nodes: Vec<NodeId>, rels: Vec<RelId>) -> Result<Self, ValueError> {
        if nodes.is_empty() || nodes.len() != rels.len() + 1 {
            return Err(ValueError::MalformedPath {
                nodes: nodes.len(),
                rels: rels.len(),
            });
        }
        Ok(PathValue { nodes, rels })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn rels(&self) -> &[RelId] {
        &self.rels
    }

    pub fn start(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn end(&self) -> NodeId {
        self.nodes[self.nodes.len() - 1]
    }

    /// Number of relationships on the path.
    pub fn hops(&self) -> usize {
        self.rels.len()
    }

    /// Joins two paths at their shared node, which appears once in the result.
    pub fn concat(&self, other: &PathValue) -> Result<PathValue, ValueError> {
        if self.end() != other.start() {
            return Err(ValueError::ConcatMismatch {
                left_end: self.end().0,
                right_start: other.start().0,
            });
        }
        let mut nodes = self.nodes.clone();
        nodes.extend_from_slice(&other.nodes[1..]);
        let mut rels = self.rels.clone();
        rels.extend_from_slice(&other.rels);
        Ok(PathValue { nodes, rels })
    }
}

/// Map value. Keys are distinct; insertion order is kept for display only and
/// never affects equality, ordering or hashing.
#[derive(Clone, Debug, Default)]
pub struct ValueMap {
    entries: Vec<(String, Value)>,
}

impl ValueMap {
    pub fn new() -> Self {
        ValueMap::default()
    }

    pub fn from_entries<I, K>(entries: I) -> Result<Self, ValueError>
    where
        I: IntoIterator<Item = (K, Value)>,
        K: Into<String>,
    {
        let mut map = ValueMap::new();
        for (k, v) in entries {
            let k = k.into();
            if map.get(&k).is_some() {
                return Err(ValueError::DuplicateKey(k));
            }
            map.entries.push((k, v));
        }
        Ok(map)
    }

    /// Inserts or replaces; a replaced key keeps its original position.
    pub fn insert(&mut self, key: impl Into<String>, value: Value) -> Option<Value> {
        let key = key.into();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some((_, slot)) => Some(std::mem::replace(slot, value)),
            None => {
                self.entries.push((key, value));
                None
            }
        }
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    fn sorted(&self) -> Vec<(&str, &Value)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }
}

impl PartialEq for ValueMap {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.sorted() == other.sorted()
    }
}

impl Eq for ValueMap {}

impl PartialOrd for ValueMap {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ValueMap {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sorted().cmp(&other.sorted())
    }
}

impl Hash for ValueMap {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.sorted().hash(state);
    }
}

/// A runtime value.
///
/// The derived `Eq`/`Ord`/`Hash` are structural identity ("equality as data"):
/// `Null` equals `Null` here. The language-level `=` is trilean and lives in
/// [`crate::evaluator`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Null,
    Bool(bool),
    Int(i64),
    Str(String),
    Node(NodeId),
    Rel(RelId),
    List(Vec<Value>),
    Map(ValueMap),
    Path(PathValue),
}

impl Value {
    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Int(_) => "integer",
            Value::Str(_) => "string",
            Value::Node(_) => "node",
            Value::Rel(_) => "relationship",
            Value::List(_) => "list",
            Value::Map(_) => "map",
            Value::Path(_) => "path",
        }
    }

    /// Lists, maps and paths.
    pub fn is_composite(&self) -> bool {
        matches!(self, Value::List(_) | Value::Map(_) | Value::Path(_))
    }

    pub fn str(s: impl Into<String>) -> Value {
        Value::Str(s.into())
    }

    pub fn list(items: impl IntoIterator<Item = Value>) -> Value {
        Value::List(items.into_iter().collect())
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

impl From<Trilean> for Value {
    fn from(t: Trilean) -> Self {
        match t {
            Trilean::True => Value::Bool(true),
            Trilean::False => Value::Bool(false),
            Trilean::Null => Value::Null,
        }
    }
}

/// Three-valued truth: `true`, `false` and `null`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Trilean {
    True,
    False,
    Null,
}

impl Trilean {
    pub const ALL: [Trilean; 3] = [Trilean::True, Trilean::False, Trilean::Null];

    /// `None` when the value is not one of `true`, `false`, `null`.
    pub fn from_value(v: &Value) -> Option<Trilean> {
        match v {
            Value::Bool(true) => Some(Trilean::True),
            Value::Bool(false) => Some(Trilean::False),
            Value::Null => Some(Trilean::Null),
            _ => None,
        }
    }

    pub fn is_true(self) -> bool {
        self == Trilean::True
    }
}

impl From<bool> for Trilean {
    fn from(b: bool) -> Self {
        if b {
            Trilean::True
        } else {
            Trilean::False
        }
    }
}

impl Not for Trilean {
    type Output = Trilean;

    fn not(self) -> Trilean {
        match self {
            Trilean::True => Trilean::False,
            Trilean::False => Trilean::True,
            Trilean::Null => Trilean::Null,
        }
    }
}

// AND: false absorbs null.
impl BitAnd for Trilean {
    type Output = Trilean;

    fn bitand(self, other: Trilean) -> Trilean {
        use Trilean::*;
        match (self, other) {
            (True, True) => True,
            (False, _) | (_, False) => False,
            _ => Null,
        }
    }
}

// OR: true absorbs null.
impl BitOr for Trilean {
    type Output = Trilean;

    fn bitor(self, other: Trilean) -> Trilean {
        use Trilean::*;
        match (self, other) {
            (True, _) | (_, True) => True,
            (False, False) => False,
            _ => Null,
        }
    }
}

// XOR: null on either side wins.
impl BitXor for Trilean {
    type Output = Trilean;

    fn bitxor(self, other: Trilean) -> Trilean {
        use Trilean::*;
        match (self, other) {
            (Null, _) | (_, Null) => Null,
            (a, b) if a == b => False,
            _ => True,
        }
    }
}

impl fmt::Display for Trilean {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trilean::True => "true",
            Trilean::False => "false",
            Trilean::Null => "null",
        })
    }
}

/// A base function. Must not depend on anything but its arguments.
pub type BaseFn = fn(&[Value]) -> Result<Value, ValueError>;

/// Base functions callable as `f(e1, ..., em)`, keyed by lower-cased name and
/// arity.
#[derive(Clone)]
pub struct FunctionRegistry {
    fns: HashMap<(String, usize), BaseFn>,
}

impl fmt::Debug for FunctionRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut keys: Vec<_> = self.fns.keys().collect();
        keys.sort();
        f.debug_struct("FunctionRegistry")
            .field("fns", &keys)
            .finish()
    }
}

impl Default for FunctionRegistry {
    fn default() -> Self {
        FunctionRegistry::standard()
    }
}

impl FunctionRegistry {
    pub fn empty() -> Self {
        FunctionRegistry {
            fns: HashMap::new(),
        }
    }

    /// `plus`, `minus`, `mult`, `size`, `toUpper`, `toLower`.
    pub fn standard() -> Self {
        let mut reg = FunctionRegistry::empty();
        reg.register("plus", 2, builtin::plus);
        reg.register("minus", 2, builtin::minus);
        reg.register("mult", 2, builtin::mult);
        reg.register("size", 1, builtin::size);
        reg.register("toUpper", 1, builtin::to_upper);
        reg.register("toLower", 1, builtin::to_lower);
        reg
    }

    pub fn register(&mut self, name: &str, arity: usize, f: BaseFn) {
        self.fns.insert((name.to_lowercase(), arity), f);
    }

    pub fn apply(&self, name: &str, args: &[Value]) -> Result<Value, ValueError> {
        let key = name.to_lowercase();
        if let Some(f) = self.fns.get(&(key.clone(), args.len())) {
            return f(args);
        }
        let mut arities: Vec<usize> = self
            .fns
            .keys()
            .filter(|(n, _)| *n == key)
            .map(|(_, a)| *a)
            .collect();
        if arities.is_empty() {
            return Err(ValueError::UnknownFunction(name.to_string()));
        }
        arities.sort_unstable();
        Err(ValueError::ArityMismatch {
            name: name.to_string(),
            expected: arities
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(" or "),
            got: args.len(),
        })
    }
}

mod builtin {
    use super::{Value, ValueError};

    fn mismatch(function: &str, args: &[Value]) -> ValueError {
        ValueError::TypeMismatch {
            function: function.to_string(),
            got: args
                .iter()
                .map(Value::type_name)
                .collect::<Vec<_>>()
                .join(", "),
        }
    }

    fn arith(
        name: &str,
        args: &[Value],
        op: fn(i64, i64) -> Option<i64>,
    ) -> Result<Value, ValueError> {
        match (&args[0], &args[1]) {
            (Value::Int(a), Value::Int(b)) => op(*a, *b)
                .map(Value::Int)
                .ok_or_else(|| ValueError::Overflow(name.to_string())),
            (Value::Null, Value::Int(_) | Value::Null) | (Value::Int(_), Value::Null) => {
                Ok(Value::Null)
            }
            _ => Err(mismatch(name, args)),
        }
    }

    pub fn plus(args: &[Value]) -> Result<Value, ValueError> {
        arith("plus", args, i64::checked_add)
    }

    pub fn minus(args: &[Value]) -> Result<Value, ValueError> {
        arith("minus", args, i64::checked_sub)
    }

    pub fn mult(args: &[Value]) -> Result<Value, ValueError> {
        arith("mult", args, i64::checked_mul)
    }

    pub fn size(args: &[Value]) -> Result<Value, ValueError> {
        match &args[0] {
            Value::List(items) => Ok(Value::Int(items.len() as i64)),
            Value::Str(s) => Ok(Value::Int(s.chars().count() as i64)),
            Value::Null => Ok(Value::Null),
            _ => Err(mismatch("size", args)),
        }
    }

    pub fn to_upper(args: &[Value]) -> Result<Value, ValueError> {
        match &args[0] {
            Value::Str(s) => Ok(Value::Str(s.to_uppercase())),
            Value::Null => Ok(Value::Null),
            _ => Err(mismatch("toUpper", args)),
        }
    }

    pub fn to_lower(args: &[Value]) -> Result<Value, ValueError> {
        match &args[0] {
            Value::Str(s) => Ok(Value::Str(s.to_lowercase())),
            Value::Null => Ok(Value::Null),
            _ => Err(mismatch("toLower", args)),
        }
    }
}
