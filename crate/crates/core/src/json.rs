//! JSON file formats for signatures, graphs, rules and morphisms.
//!
//! Output is canonical: keys sorted, pretty-printed, newline-terminated.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::matcher::Morphism;
use crate::portgraph::{Edge, GraphError, NodeClass, NodeId, PortGraph, PortRef};
use crate::rewrite::{compile_rule, Rule, RuleError};
use crate::signature::{NameKind, NodeNameDecl, PSignature, PortName, SignatureError};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignatureDoc {
    pub nodes: Vec<DeclDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclDoc {
    pub name: String,
    pub kind: NameKind,
    pub ports: Vec<PortName>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: NodeId,
    pub label: String,
    pub class: NodeClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleDoc {
    pub name: String,
    pub lhs: GraphDoc,
    pub rhs: GraphDoc,
    pub interface: Vec<InterfaceEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceEntry {
    pub from: PortRef,
    pub to: Vec<PortRef>,
}

impl SignatureDoc {
    pub fn of(sig: &PSignature) -> Self {
        SignatureDoc {
            nodes: sig
                .decls()
                .map(|d| DeclDoc {
                    name: d.name.clone(),
                    kind: d.kind,
                    ports: d.interface.clone(),
                })
                .collect(),
        }
    }

    pub fn build(&self) -> Result<PSignature, JsonError> {
        let mut sig = PSignature::new();
        for d in &self.nodes {
            sig.insert(NodeNameDecl::new(d.name.clone(), d.kind, d.ports.clone()))?;
        }
        Ok(sig)
    }
}

impl GraphDoc {
    pub fn of(g: &PortGraph) -> Self {
        GraphDoc {
            nodes: g
                .nodes()
                .map(|(id, n)| NodeDoc {
                    id,
                    label: n.label.clone(),
                    class: n.class,
                })
                .collect(),
            edges: g.edges().collect(),
        }
    }

    pub fn build(&self, sig: Arc<PSignature>) -> Result<PortGraph, JsonError> {
        let mut g = PortGraph::new(sig);
        for n in &self.nodes {
            g.add_node_with_id(n.id, &n.label, n.class)?;
        }
        for e in &self.edges {
            let (a, b) = e.endpoints();
            g.add_edge(a, b)?;
        }
        Ok(g)
    }
}

impl RuleDoc {
    pub fn of(rule: &Rule) -> Self {
        RuleDoc {
            name: rule.name.clone(),
            lhs: GraphDoc::of(&rule.lhs),
            rhs: GraphDoc::of(&rule.rhs),
            interface: rule
                .interface_map
                .iter()
                .map(|(from, to)| InterfaceEntry {
                    from: *from,
                    to: to.iter().copied().collect(),
                })
                .collect(),
        }
    }

    pub fn build(&self, sig: Arc<PSignature>) -> Result<Rule, JsonError> {
        let lhs = self.lhs.build(sig.clone())?;
        let rhs = self.rhs.build(sig)?;
        let map: BTreeMap<PortRef, BTreeSet<PortRef>> = self
            .interface
            .iter()
            .map(|e| (e.from, e.to.iter().copied().collect()))
            .collect();
        Ok(compile_rule(lhs, rhs, map, self.name.clone())?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MorphismDoc {
    fo: BTreeMap<NodeId, NodeId>,
    ho: BTreeMap<NodeId, BTreeSet<NodeId>>,
    sigma_n: BTreeMap<String, String>,
    tr_ports: BTreeMap<NodeId, Vec<PortRef>>,
}

/// Morphisms serialize their node maps, name substitution and port
/// translations. The port substitution and edge map are derived data and
/// are rebuilt by [`Morphism::assemble`].
impl Serialize for Morphism {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MorphismDoc {
            fo: self.fo.clone(),
            ho: self.ho.clone(),
            sigma_n: self.sigma_n.clone(),
            tr_ports: self.tr_ports.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Morphism {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = MorphismDoc::deserialize(d)?;
        Ok(Morphism {
            fo: doc.fo,
            ho: doc.ho,
            sigma_n: doc.sigma_n,
            tr_ports: doc.tr_ports,
            ..Morphism::default()
        })
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_canonical_string<T: Serialize>(value: &T) -> String {
    let v: Value = serde_json::to_value(value).expect("document serializes");
    let mut out = serde_json::to_string_pretty(&v).expect("value serializes");
    out.push('\n');
    out
}

pub fn signature_to_string(sig: &PSignature) -> String {
    to_canonical_string(&SignatureDoc::of(sig))
}

pub fn signature_from_str(text: &str) -> Result<PSignature, JsonError> {
    serde_json::from_str::<SignatureDoc>(text)?.build()
}

pub fn graph_to_string(g: &PortGraph) -> String {
    to_canonical_string(&GraphDoc::of(g))
}

pub fn graph_from_str(text: &str, sig: Arc<PSignature>) -> Result<PortGraph, JsonError> {
    serde_json::from_str::<GraphDoc>(text)?.build(sig)
}

pub fn rule_to_string(rule: &Rule) -> String {
    to_canonical_string(&RuleDoc::of(rule))
}

pub fn rule_from_str(text: &str, sig: Arc<PSignature>) -> Result<Rule, JsonError> {
    serde_json::from_str::<RuleDoc>(text)?.build(sig)
}
