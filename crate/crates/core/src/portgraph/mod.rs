//! Higher-order port-graphs over a [`PSignature`].
//!
//! Nodes carry a label and a class (first-order or higher-order); the number
//! of ports and their names follow from the label's declaration. Edges join
//! two `(node, port)` pairs and every port takes part in at most one edge.

mod canon;
mod iso;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signature::{NameKind, PSignature, PortName};

pub use canon::{CanonicalForm, GraphDigest};
pub use iso::find_isomorphism;

/// Identifier of a node, unique within a graph across both node classes.
/// Rendered as `n<k>` in files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid node id `{0}` (expected `n` followed by digits)")]
pub struct ParseNodeIdError(pub String);

impl FromStr for NodeId {
    type Err = ParseNodeIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix('n')
            .filter(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|rest| rest.parse().ok())
            .map(NodeId)
            .ok_or_else(|| ParseNodeIdError(s.to_string()))
    }
}

impl Serialize for NodeId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NodeId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    Fo,
    Ho,
}

impl NodeClass {
    fn admits(self, kind: NameKind) -> bool {
        match self {
            NodeClass::Fo => kind.is_first_order(),
            NodeClass::Ho => kind == NameKind::HoVariable,
        }
    }
}

impl fmt::Display for NodeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeClass::Fo => "fo",
            NodeClass::Ho => "ho",
        })
    }
}

/// A physical port `node.port`, with 1-based port index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortRef {
    pub node: NodeId,
    pub port: usize,
}

impl PortRef {
    pub fn new(node: NodeId, port: usize) -> Self {
        Self { node, port }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.node, self.port)
    }
}

impl Serialize for PortRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (self.node, self.port).serialize(s)
    }
}

impl<'de> Deserialize<'de> for PortRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (node, port) = <(NodeId, usize)>::deserialize(d)?;
        Ok(PortRef { node, port })
    }
}

/// An undirected edge, stored with its endpoints in ascending order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge(PortRef, PortRef);

impl Edge {
    pub fn new(a: PortRef, b: PortRef) -> Self {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn endpoints(&self) -> (PortRef, PortRef) {
        (self.0, self.1)
    }

    pub fn touches(&self, node: NodeId) -> bool {
        self.0.node == node || self.1.node == node
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}--{}", self.0, self.1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Node {
    pub label: String,
    pub class: NodeClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("label `{0}` is not declared in the signature")]
    UnknownLabel(String),
    #[error("label `{label}` cannot label a {class} node")]
    ClassMismatch { label: String, class: NodeClass },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {0} already exists")]
    DuplicateNode(NodeId),
    #[error("port {0} is out of range")]
    PortOutOfRange(PortRef),
    #[error("port {0} is already connected")]
    PortOccupied(PortRef),
    #[error("cannot connect port {0} to itself")]
    SelfPort(PortRef),
    #[error("graphs are built over different signatures")]
    SignatureMismatch,
}

/// Non-fatal remarks about a well-formed graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GraphWarning {
    /// An edge joins two ports of the same node.
    SameNodeEdge(Edge),
}

impl fmt::Display for GraphWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphWarning::SameNodeEdge(e) => {
                write!(f, "edge {e} joins two ports of the same node")
            }
        }
    }
}

/// The witness of syntactic equality: label- and edge-preserving bijections
/// on first-order and higher-order nodes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EqualityWitness {
    pub tr: BTreeMap<NodeId, NodeId>,
    pub ho_tr: BTreeMap<NodeId, NodeId>,
}

impl EqualityWitness {
    pub fn map(&self, id: NodeId) -> Option<NodeId> {
        self.tr.get(&id).or_else(|| self.ho_tr.get(&id)).copied()
    }

    pub fn inverse(&self) -> Self {
        Self {
            tr: self.tr.iter().map(|(a, b)| (*b, *a)).collect(),
            ho_tr: self.ho_tr.iter().map(|(a, b)| (*b, *a)).collect(),
        }
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Self) -> Self {
        Self {
            tr: self.tr.iter().map(|(a, b)| (*a, other.tr[b])).collect(),
            ho_tr: self.ho_tr.iter().map(|(a, b)| (*a, other.ho_tr[b])).collect(),
        }
    }
}

/// A labelled higher-order port-graph.
#[derive(Debug, Clone)]
pub struct PortGraph {
    sig: Arc<PSignature>,
    nodes: BTreeMap<NodeId, Node>,
    // Symmetric: both orientations of every edge are stored.
    links: BTreeMap<PortRef, PortRef>,
}

impl PartialEq for PortGraph {
    /// Identity equality (same ids, labels and edges), not syntactic equality.
    fn eq(&self, other: &Self) -> bool {
        self.same_signature(other) && self.nodes == other.nodes && self.links == other.links
    }
}

impl Eq for PortGraph {}

impl PortGraph {
    pub fn new(sig: Arc<PSignature>) -> Self {
        Self {
            sig,
            nodes: BTreeMap::new(),
            links: BTreeMap::new(),
        }
    }

    /// An empty graph over the same signature.
    pub fn empty_like(&self) -> Self {
        Self::new(self.sig.clone())
    }

    pub fn sig(&self) -> &Arc<PSignature> {
        &self.sig
    }

    pub fn same_signature(&self, other: &PortGraph) -> bool {
        Arc::ptr_eq(&self.sig, &other.sig) || *self.sig == *other.sig
    }

    /// Rebinds the graph to `sig`, which must declare every label used here
    /// identically.
    pub fn retarget(&self, sig: Arc<PSignature>) -> Result<PortGraph, GraphError> {
        for node in self.nodes.values() {
            if sig.get(&node.label) != self.sig.get(&node.label) {
                return Err(GraphError::SignatureMismatch);
            }
        }
        Ok(PortGraph {
            sig,
            nodes: self.nodes.clone(),
            links: self.links.clone(),
        })
    }

    /// The smallest id strictly greater than every id in the graph.
    pub fn next_id(&self) -> NodeId {
        NodeId(self.nodes.keys().next_back().map_or(1, |id| id.0 + 1))
    }

    pub fn add_node(&mut self, label: &str, class: NodeClass) -> Result<NodeId, GraphError> {
        let id = self.next_id();
        self.add_node_with_id(id, label, class)?;
        Ok(id)
    }

    pub fn add_fo(&mut self, label: &str) -> Result<NodeId, GraphError> {
        self.add_node(label, NodeClass::Fo)
    }

    pub fn add_ho(&mut self, label: &str) -> Result<NodeId, GraphError> {
        self.add_node(label, NodeClass::Ho)
    }

    pub fn add_node_with_id(&mut self, id: NodeId, label: &str, class: NodeClass) -> Result<(), GraphError> {
        let decl = self
            .sig
            .get(label)
            .ok_or_else(|| GraphError::UnknownLabel(label.to_string()))?;
        if !class.admits(decl.kind) {
            return Err(GraphError::ClassMismatch {
                label: label.to_string(),
                class,
            });
        }
        if self.nodes.contains_key(&id) {
            return Err(GraphError::DuplicateNode(id));
        }
        self.nodes.insert(
            id,
            Node {
                label: label.to_string(),
                class,
            },
        );
        Ok(())
    }

    pub fn add_edge(&mut self, a: PortRef, b: PortRef) -> Result<(), GraphError> {
        for p in [a, b] {
            if !self.has_port(p) {
                return Err(if self.nodes.contains_key(&p.node) {
                    GraphError::PortOutOfRange(p)
                } else {
                    GraphError::UnknownNode(p.node)
                });
            }
        }
        if a == b {
            return Err(GraphError::SelfPort(a));
        }
        for p in [a, b] {
            if self.links.contains_key(&p) {
                return Err(GraphError::PortOccupied(p));
            }
        }
        self.links.insert(a, b);
        self.links.insert(b, a);
        Ok(())
    }

    /// Shorthand for `add_edge(a.pa, b.pb)`.
    pub fn connect(&mut self, a: NodeId, pa: usize, b: NodeId, pb: usize) -> Result<(), GraphError> {
        self.add_edge(PortRef::new(a, pa), PortRef::new(b, pb))
    }

    pub fn remove_edge(&mut self, edge: Edge) -> bool {
        let (a, b) = edge.endpoints();
        if self.links.get(&a) == Some(&b) {
            self.links.remove(&a);
            self.links.remove(&b);
            true
        } else {
            false
        }
    }

    /// Removes a node together with its incident edges.
    pub fn remove_node(&mut self, id: NodeId) -> Option<Node> {
        let node = self.nodes.remove(&id)?;
        let degree = self.sig.arity(&node.label).unwrap_or(0);
        for port in 1..=degree {
            if let Some(other) = self.links.remove(&PortRef::new(id, port)) {
                self.links.remove(&other);
            }
        }
        Some(node)
    }

    pub fn has_port(&self, p: PortRef) -> bool {
        p.port >= 1 && self.degree(p.node).is_some_and(|d| p.port <= d)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(&id)
    }

    pub fn label(&self, id: NodeId) -> Option<&str> {
        self.nodes.get(&id).map(|n| n.label.as_str())
    }

    pub fn class(&self, id: NodeId) -> Option<NodeClass> {
        self.nodes.get(&id).map(|n| n.class)
    }

    pub fn degree(&self, id: NodeId) -> Option<usize> {
        self.nodes.get(&id).and_then(|n| self.sig.arity(&n.label))
    }

    /// Port name of a physical port, derived from the signature.
    pub fn port_name(&self, p: PortRef) -> Option<&PortName> {
        self.sig.port_name(self.label(p.node)?, p.port)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Node)> + '_ {
        self.nodes.iter().map(|(id, n)| (*id, n))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn fo_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes_of(NodeClass::Fo)
    }

    pub fn ho_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes_of(NodeClass::Ho)
    }

    fn nodes_of(&self, class: NodeClass) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .filter(move |(_, n)| n.class == class)
            .map(|(id, _)| *id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.links.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The port at the other end of the edge on `p`, if any.
    pub fn neighbor(&self, p: PortRef) -> Option<PortRef> {
        self.links.get(&p).copied()
    }

    pub fn has_edge(&self, edge: Edge) -> bool {
        let (a, b) = edge.endpoints();
        self.links.get(&a) == Some(&b)
    }

    /// Edges in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.links.iter().filter(|(a, b)| a < b).map(|(a, b)| Edge(*a, *b))
    }

    /// All ports of a node, in port order.
    pub fn ports(&self, id: NodeId) -> impl Iterator<Item = PortRef> {
        (1..=self.degree(id).unwrap_or(0)).map(move |p| PortRef::new(id, p))
    }

    /// The interface: every port that occurs in no edge, in ascending order.
    pub fn interface(&self) -> Vec<PortRef> {
        self.node_ids()
            .flat_map(|id| self.ports(id))
            .filter(|p| !self.links.contains_key(p))
            .collect()
    }

    pub fn is_subgraph(&self, h: &PortGraph) -> bool {
        self.same_signature(h)
            && self.nodes.iter().all(|(id, n)| h.nodes.get(id) == Some(n))
            && self.edges().all(|e| h.has_edge(e))
    }

    /// A sub-graph that contains every edge of `h` between its nodes.
    pub fn is_full_subgraph(&self, h: &PortGraph) -> bool {
        self.is_subgraph(h)
            && h.edges()
                .filter(|e| {
                    let (a, b) = e.endpoints();
                    self.contains(a.node) && self.contains(b.node)
                })
                .all(|e| self.has_edge(e))
    }

    /// The node-induced sub-graph on `nodes`.
    pub fn induced_full_subgraph(&self, nodes: &BTreeSet<NodeId>) -> Result<PortGraph, GraphError> {
        let mut out = self.empty_like();
        for id in nodes {
            let node = self.nodes.get(id).ok_or(GraphError::UnknownNode(*id))?;
            out.nodes.insert(*id, node.clone());
        }
        for (a, b) in &self.links {
            if nodes.contains(&a.node) && nodes.contains(&b.node) {
                out.links.insert(*a, *b);
            }
        }
        Ok(out)
    }

    /// Returns the lexicographically least witness (in node-id order) of
    /// syntactic equality, if the graphs are equal up to renaming.
    pub fn syntactic_equal(&self, h: &PortGraph) -> Option<EqualityWitness> {
        if !self.same_signature(h) {
            return None;
        }
        let map = find_isomorphism(self, h, &[])?;
        let mut witness = EqualityWitness::default();
        for (a, b) in map {
            match self.class(a) {
                Some(NodeClass::Fo) => witness.tr.insert(a, b),
                _ => witness.ho_tr.insert(a, b),
            };
        }
        Some(witness)
    }

    pub fn canonical_form(&self) -> CanonicalForm {
        CanonicalForm::of(self)
    }

    /// Renaming-insensitive digest: equal for syntactically equal graphs.
    pub fn digest(&self) -> GraphDigest {
        self.canonical_form().digest()
    }

    /// Recomputes every structural invariant from scratch. Graphs built via
    /// the public API always pass; the check exists for fuzzing and imports.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (id, node) in &self.nodes {
            match self.sig.get(&node.label) {
                None => out.push(format!("{id}: label `{}` undeclared", node.label)),
                Some(decl) if !node.class.admits(decl.kind) => {
                    out.push(format!("{id}: class {} does not admit `{}`", node.class, node.label))
                }
                _ => {}
            }
        }
        for (a, b) in &self.links {
            if !self.has_port(*a) {
                out.push(format!("edge endpoint {a} out of range"));
            }
            if a == b {
                out.push(format!("port {a} linked to itself"));
            }
            if self.links.get(b) != Some(a) {
                out.push(format!("link {a}->{b} is not symmetric"));
            }
        }
        out
    }

    pub fn warnings(&self) -> Vec<GraphWarning> {
        self.edges()
            .filter(|e| e.0.node == e.1.node)
            .map(GraphWarning::SameNodeEdge)
            .collect()
    }
}
