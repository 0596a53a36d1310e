use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{NodeClass, NodeId, PortGraph, PortRef};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
struct NodeCode {
    class: NodeClass,
    label: String,
    // Per port: (local index of the neighbour, neighbour port), or free.
    links: Vec<Option<(u32, u32)>>,
}

/// A renaming-invariant encoding of a port-graph: two graphs have the same
/// canonical form iff they are syntactically equal.
///
/// Each connected component is encoded by a breadth-first walk that visits
/// ports in index order; since every port has at most one neighbour the walk
/// is fully determined by its start node. The component code is the least
/// code over all start nodes, and the graph code is the sorted list of
/// component codes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CanonicalForm(Vec<Vec<NodeCode>>);

impl CanonicalForm {
    pub fn of(g: &PortGraph) -> Self {
        let mut codes: Vec<Vec<NodeCode>> = components(g)
            .iter()
            .map(|comp| comp.iter().map(|&start| walk(g, start)).min().unwrap_or_default())
            .collect();
        codes.sort();
        CanonicalForm(codes)
    }

    pub fn digest(&self) -> GraphDigest {
        let bytes = serde_json::to_vec(self).expect("canonical form serializes");
        GraphDigest(hex::encode(Sha256::digest(&bytes)))
    }
}

/// Hex SHA-256 of a graph's canonical form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GraphDigest(pub String);

impl fmt::Display for GraphDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn components(g: &PortGraph) -> Vec<Vec<NodeId>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for id in g.node_ids() {
        if !seen.insert(id) {
            continue;
        }
        let mut comp = vec![id];
        let mut stack = vec![id];
        while let Some(u) = stack.pop() {
            for p in g.ports(u) {
                if let Some(q) = g.neighbor(p) {
                    if seen.insert(q.node) {
                        comp.push(q.node);
                        stack.push(q.node);
                    }
                }
            }
        }
        out.push(comp);
    }
    out
}

fn walk(g: &PortGraph, start: NodeId) -> Vec<NodeCode> {
    let mut index: BTreeMap<NodeId, u32> = BTreeMap::new();
    let mut queue = VecDeque::new();
    index.insert(start, 0);
    queue.push_back(start);
    let mut out = Vec::new();
    while let Some(u) = queue.pop_front() {
        let node = g.node(u).expect("walk stays inside the graph");
        let mut links = Vec::new();
        for p in g.ports(u) {
            links.push(g.neighbor(p).map(|PortRef { node: w, port }| {
                let next = index.len() as u32;
                let local = *index.entry(w).or_insert_with(|| {
                    queue.push_back(w);
                    next
                });
                (local, port as u32)
            }));
        }
        out.push(NodeCode {
            class: node.class,
            label: node.label.clone(),
            links,
        });
    }
    out
}
