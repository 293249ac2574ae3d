//! Immutable in-memory property graphs.
//!
//! Document ids are opaque strings; they are interned to dense [`NodeId`] /
//! [`RelId`] indices on load. Every relationship has exactly one type and its
//! endpoints are declared nodes. Property lookup is total: an unset key reads
//! as `null`, and stored `null`s are dropped on load.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::values::{NodeId, RelId, Value, ValueMap};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("relationship `{rel}` references undeclared node `{node}`")]
    DanglingEndpoint { rel: String, node: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("unknown node id {0:?}")]
    UnknownNode(NodeId),
    #[error("unknown relationship id {0:?}")]
    UnknownRel(RelId),
}

/// Traversal direction of a relationship relative to the current node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    /// `-[]->`
    Outgoing,
    /// `<-[]-`
    Incoming,
    /// `-[]-`
    Both,
}

impl Direction {
    pub fn reversed(self) -> Direction {
        match self {
            Direction::Outgoing => Direction::Incoming,
            Direction::Incoming => Direction::Outgoing,
            Direction::Both => Direction::Both,
        }
    }
}

/// A node or relationship, as the first argument of a property lookup.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Element {
    Node(NodeId),
    Rel(RelId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: String,
    #[serde(default)]
    pub labels: Vec<String>,
    #[serde(default)]
    pub properties: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelDoc {
    pub id: String,
    #[serde(rename = "type")]
    pub rel_type: String,
    pub src: String,
    pub tgt: String,
    #[serde(default)]
    pub properties: serde_json::Map<String, serde_json::Value>,
}

/// The on-disk graph description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub nodes: Vec<NodeDoc>,
    pub relationships: Vec<RelDoc>,
}

type Props = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyGraph {
    node_names: Vec<String>,
    rel_names: Vec<String>,
    node_lookup: HashMap<String, NodeId>,
    rel_lookup: HashMap<String, RelId>,
    labels: Vec<BTreeSet<String>>,
    node_props: Vec<Props>,
    src: Vec<NodeId>,
    tgt: Vec<NodeId>,
    rel_types: Vec<String>,
    rel_props: Vec<Props>,
    outgoing: Vec<Vec<RelId>>,
    incoming: Vec<Vec<RelId>>,
}

impl Default for PropertyGraph {
    fn default() -> Self {
        GraphBuilder::new().build()
    }
}

impl PropertyGraph {
    pub fn empty() -> Self {
        PropertyGraph::default()
    }

    pub fn from_json_str(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDocument =
            serde_json::from_str(text).map_err(|e| GraphError::Schema(e.to_string()))?;
        PropertyGraph::from_document(&doc)
    }

    pub fn from_document(doc: &GraphDocument) -> Result<Self, GraphError> {
        let mut b = GraphBuilder::new();
        for n in &doc.nodes {
            let props = props_from_json(&n.properties)
                .map_err(|e| GraphError::Schema(format!("node `{}`: {e}", n.id)))?;
            b.add_node(&n.id, n.labels.iter().cloned(), props)?;
        }
        for r in &doc.relationships {
            let props = props_from_json(&r.properties)
                .map_err(|e| GraphError::Schema(format!("relationship `{}`: {e}", r.id)))?;
            b.add_rel(&r.id, &r.rel_type, &r.src, &r.tgt, props)?;
        }
        Ok(b.build())
    }

    /// Inverse of [`PropertyGraph::from_document`], up to the order of labels
    /// and property keys.
    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            nodes: self
                .nodes()
                .map(|n| NodeDoc {
                    id: self.node_name(n).to_string(),
                    labels: self.labels[n.index()].iter().cloned().collect(),
                    properties: props_to_json(&self.node_props[n.index()]),
                })
                .collect(),
            relationships: self
                .rels()
                .map(|r| RelDoc {
                    id: self.rel_name(r).to_string(),
                    rel_type: self.rel_types[r.index()].clone(),
                    src: self.node_name(self.src(r)).to_string(),
                    tgt: self.node_name(self.tgt(r)).to_string(),
                    properties: props_to_json(&self.rel_props[r.index()]),
                })
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("graph documents serialize")
    }

    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    pub fn rel_count(&self) -> usize {
        self.rel_names.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + Clone {
        (0..self.node_names.len() as u32).map(NodeId)
    }

    pub fn rels(&self) -> impl Iterator<Item = RelId> + Clone {
        (0..self.rel_names.len() as u32).map(RelId)
    }

    pub fn contains_node(&self, n: NodeId) -> bool {
        n.index() < self.node_names.len()
    }

    pub fn contains_rel(&self, r: RelId) -> bool {
        r.index() < self.rel_names.len()
    }

    pub fn node_name(&self, n: NodeId) -> &str {
        &self.node_names[n.index()]
    }

    pub fn rel_name(&self, r: RelId) -> &str {
        &self.rel_names[r.index()]
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.node_lookup.get(name).copied()
    }

    pub fn rel_by_name(&self, name: &str) -> Option<RelId> {
        self.rel_lookup.get(name).copied()
    }

    pub fn src(&self, r: RelId) -> NodeId {
        self.src[r.index()]
    }

    pub fn tgt(&self, r: RelId) -> NodeId {
        self.tgt[r.index()]
    }

    pub fn labels(&self, n: NodeId) -> &BTreeSet<String> {
        &self.labels[n.index()]
    }

    pub fn has_label(&self, n: NodeId, label: &str) -> bool {
        self.labels[n.index()].contains(label)
    }

    pub fn rel_type(&self, r: RelId) -> &str {
        &self.rel_types[r.index()]
    }

    /// Property lookup; `null` when the key is unset.
    pub fn prop(&self, element: Element, key: &str) -> Result<Value, GraphError> {
        let props = match element {
            Element::Node(n) => self
                .node_props
                .get(n.index())
                .ok_or(GraphError::UnknownNode(n))?,
            Element::Rel(r) => self
                .rel_props
                .get(r.index())
                .ok_or(GraphError::UnknownRel(r))?,
        };
        Ok(props.get(key).cloned().unwrap_or(Value::Null))
    }

    pub fn node_props(&self, n: NodeId) -> &BTreeMap<String, Value> {
        &self.node_props[n.index()]
    }

    pub fn rel_props(&self, r: RelId) -> &BTreeMap<String, Value> {
        &self.rel_props[r.index()]
    }

    /// Relationships leaving `n`.
    pub fn outgoing(&self, n: NodeId) -> &[RelId] {
        &self.outgoing[n.index()]
    }

    /// Relationships entering `n`.
    pub fn incoming(&self, n: NodeId) -> &[RelId] {
        &self.incoming[n.index()]
    }

    /// Relationships incident to `n` in the given direction. A self-loop is
    /// listed once even for [`Direction::Both`].
    pub fn incident(&self, n: NodeId, direction: Direction) -> Result<Vec<RelId>, GraphError> {
        if !self.contains_node(n) {
            return Err(GraphError::UnknownNode(n));
        }
        Ok(match direction {
            Direction::Outgoing => self.outgoing(n).to_vec(),
            Direction::Incoming => self.incoming(n).to_vec(),
            Direction::Both => {
                let mut all: BTreeSet<RelId> = self.outgoing(n).iter().copied().collect();
                all.extend(self.incoming(n).iter().copied());
                all.into_iter().collect()
            }
        })
    }

    /// The same graph with every relationship's endpoints swapped.
    pub fn reversed(&self) -> PropertyGraph {
        let mut g = self.clone();
        std::mem::swap(&mut g.src, &mut g.tgt);
        std::mem::swap(&mut g.outgoing, &mut g.incoming);
        g
    }
}

/// Incremental construction of a [`PropertyGraph`]; relationships must be
/// added after their endpoints.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    node_names: Vec<String>,
    rel_names: Vec<String>,
    node_lookup: HashMap<String, NodeId>,
    rel_lookup: HashMap<String, RelId>,
    labels: Vec<BTreeSet<String>>,
    node_props: Vec<Props>,
    src: Vec<NodeId>,
    tgt: Vec<NodeId>,
    rel_types: Vec<String>,
    rel_props: Vec<Props>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        GraphBuilder::default()
    }

    fn check_fresh(&self, id: &str) -> Result<(), GraphError> {
        if self.node_lookup.contains_key(id) || self.rel_lookup.contains_key(id) {
            return Err(GraphError::DuplicateId(id.to_string()));
        }
        Ok(())
    }

    pub fn add_node<L, S>(
        &mut self,
        id: &str,
        labels: L,
        props: impl IntoIterator<Item = (String, Value)>,
    ) -> Result<NodeId, GraphError>
    where
        L: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.check_fresh(id)?;
        let n = NodeId(self.node_names.len() as u32);
        self.node_names.push(id.to_string());
        self.node_lookup.insert(id.to_string(), n);
        self.labels
            .push(labels.into_iter().map(Into::into).collect());
        self.node_props.push(strip_nulls(props));
        Ok(n)
    }

    pub fn add_rel(
        &mut self,
        id: &str,
        rel_type: &str,
        src: &str,
        tgt: &str,
        props: impl IntoIterator<Item = (String, Value)>,
    ) -> Result<RelId, GraphError> {
        self.check_fresh(id)?;
        let endpoint = |name: &str| {
            self.node_lookup
                .get(name)
                .copied()
                .ok_or_else(|| GraphError::DanglingEndpoint {
                    rel: id.to_string(),
                    node: name.to_string(),
                })
        };
        let (s, t) = (endpoint(src)?, endpoint(tgt)?);
        let r = RelId(self.rel_names.len() as u32);
        self.rel_names.push(id.to_string());
        self.rel_lookup.insert(id.to_string(), r);
        self.src.push(s);
        self.tgt.push(t);
        self.rel_types.push(rel_type.to_string());
        self.rel_props.push(strip_nulls(props));
        Ok(r)
    }

    pub fn build(self) -> PropertyGraph {
        let mut outgoing = vec![Vec::new(); self.node_names.len()];
        let mut incoming = vec![Vec::new(); self.node_names.len()];
        for (i, (s, t)) in self.src.iter().zip(&self.tgt).enumerate() {
            outgoing[s.index()].push(RelId(i as u32));
            incoming[t.index()].push(RelId(i as u32));
        }
        PropertyGraph {
            node_names: self.node_names,
            rel_names: self.rel_names,
            node_lookup: self.node_lookup,
            rel_lookup: self.rel_lookup,
            labels: self.labels,
            node_props: self.node_props,
            src: self.src,
            tgt: self.tgt,
            rel_types: self.rel_types,
            rel_props: self.rel_props,
            outgoing,
            incoming,
        }
    }
}

fn strip_nulls(props: impl IntoIterator<Item = (String, Value)>) -> Props {
    props.into_iter().filter(|(_, v)| !v.is_null()).collect()
}

fn props_from_json(
    props: &serde_json::Map<String, serde_json::Value>,
) -> Result<Vec<(String, Value)>, String> {
    props
        .iter()
        .map(|(k, v)| Ok((k.clone(), stored_value_from_json(v)?)))
        .collect()
}

fn props_to_json(props: &Props) -> serde_json::Map<String, serde_json::Value> {
    props
        .iter()
        .map(|(k, v)| (k.clone(), stored_value_to_json(v)))
        .collect()
}

/// Converts a property value from a graph document. Objects become maps and
/// arrays become lists; only integral numbers are accepted.
pub fn stored_value_from_json(v: &serde_json::Value) -> Result<Value, String> {
    use serde_json::Value as J;
    Ok(match v {
        J::Null => Value::Null,
        J::Bool(b) => Value::Bool(*b),
        J::Number(n) => Value::Int(
            n.as_i64()
                .ok_or_else(|| format!("unsupported number `{n}` (only 64-bit integers)"))?,
        ),
        J::String(s) => Value::Str(s.clone()),
        J::Array(items) => Value::List(
            items
                .iter()
                .map(stored_value_from_json)
                .collect::<Result<_, _>>()?,
        ),
        J::Object(entries) => {
            let mut map = ValueMap::new();
            for (k, v) in entries {
                map.insert(k.clone(), stored_value_from_json(v)?);
            }
            Value::Map(map)
        }
    })
}

fn stored_value_to_json(v: &Value) -> serde_json::Value {
    use serde_json::Value as J;
    match v {
        Value::Null => J::Null,
        Value::Bool(b) => J::Bool(*b),
        Value::Int(i) => J::from(*i),
        Value::Str(s) => J::String(s.clone()),
        Value::List(items) => J::Array(items.iter().map(stored_value_to_json).collect()),
        Value::Map(m) => J::Object(
            m.iter()
                .map(|(k, v)| (k.to_string(), stored_value_to_json(v)))
                .collect(),
        ),
        // not representable in a document; never produced by the loader
        Value::Node(_) | Value::Rel(_) | Value::Path(_) => J::Null,
    }
}
