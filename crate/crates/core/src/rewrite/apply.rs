use std::collections::{BTreeMap, BTreeSet};

use super::{RewriteError, Rule};
use crate::exec::Exec;
use crate::matcher::{check_morphism, find_morphisms, MatchError, MatchOptions, Morphism};
use crate::portgraph::{Edge, GraphError, NodeClass, NodeId, PortGraph, PortRef};
use crate::signature::NameKind;

/// A rule together with one of its matches.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Redex {
    pub rule: usize,
    pub morphism: Morphism,
}

impl Redex {
    pub fn apply(&self, rules: &[Rule], g: &PortGraph) -> Result<Applied, RewriteError> {
        let rule = rules.get(self.rule).ok_or(RewriteError::UnknownRule(self.rule))?;
        apply(rule, &self.morphism, g)
    }
}

/// Every redex of every rule in `g`, by rule order then morphism order.
pub fn enumerate_redexes(rules: &[Rule], g: &PortGraph) -> Result<Vec<Redex>, MatchError> {
    enumerate_redexes_with(Exec::default(), rules, g)
}

pub fn enumerate_redexes_with(exec: Exec, rules: &[Rule], g: &PortGraph) -> Result<Vec<Redex>, MatchError> {
    let per_rule = exec.map(rules.iter().enumerate().collect(), |(i, rule)| {
        find_morphisms(&rule.lhs, g, &MatchOptions::default()).map(|ms| {
            ms.into_iter()
                .map(|morphism| Redex { rule: i, morphism })
                .collect::<Vec<_>>()
        })
    });
    let mut out = Vec::new();
    for redexes in per_rule {
        out.extend(redexes?);
    }
    Ok(out)
}

/// An instantiated right-hand side: fresh nodes, and where each right-hand
/// port ended up.
#[derive(Debug, Clone)]
pub struct Fragment {
    pub graph: PortGraph,
    pub ports: BTreeMap<PortRef, PortRef>,
}

/// Builds `m(R)` with node ids starting at `first`. First-order variables are
/// renamed by the substitution; every higher-order node becomes a fresh copy
/// of the image of the first left-hand node with the same label, its ports
/// placed by that node's port translation.
pub fn instantiate_rhs(
    rule: &Rule,
    m: &Morphism,
    subject: &PortGraph,
    first: NodeId,
) -> Result<Fragment, RewriteError> {
    let sig = rule.rhs.sig();
    let mut graph = PortGraph::new(sig.clone());
    let mut ports = BTreeMap::new();
    let mut next = first.0;
    let mut fresh = || {
        let id = NodeId(next);
        next += 1;
        id
    };
    for (id, node) in rule.rhs.nodes() {
        match node.class {
            NodeClass::Fo => {
                let label = match sig.kind(&node.label) {
                    Some(NameKind::FoVariable) => m
                        .sigma_n
                        .get(&node.label)
                        .ok_or_else(|| RewriteError::UnboundVariable(node.label.clone()))?,
                    _ => &node.label,
                };
                let copy = fresh();
                graph.add_node_with_id(copy, label, NodeClass::Fo).map_err(internal)?;
                for p in rule.rhs.ports(id) {
                    ports.insert(p, PortRef::new(copy, p.port));
                }
            }
            NodeClass::Ho => {
                let unbound = || RewriteError::UnboundVariable(node.label.clone());
                let source = rule.lhs_occurrence(&node.label).ok_or_else(unbound)?;
                let image = m.ho.get(&source).ok_or_else(unbound)?;
                let translation = m.tr_ports.get(&source).ok_or_else(unbound)?;
                let mut renaming = BTreeMap::new();
                for &n in image {
                    let copy = fresh();
                    let original = subject.node(n).ok_or_else(unbound)?;
                    graph
                        .add_node_with_id(copy, &original.label, original.class)
                        .map_err(internal)?;
                    renaming.insert(n, copy);
                }
                for e in subject.edges() {
                    let (a, b) = e.endpoints();
                    if let (Some(&x), Some(&y)) = (renaming.get(&a.node), renaming.get(&b.node)) {
                        graph
                            .add_edge(PortRef::new(x, a.port), PortRef::new(y, b.port))
                            .map_err(internal)?;
                    }
                }
                for (i, target) in translation.iter().enumerate() {
                    let copied = PortRef::new(renaming[&target.node], target.port);
                    ports.insert(PortRef::new(id, i + 1), copied);
                }
            }
        }
    }
    for e in rule.rhs.edges() {
        let (a, b) = e.endpoints();
        graph.add_edge(ports[&a], ports[&b]).map_err(internal)?;
    }
    Ok(Fragment { graph, ports })
}

fn internal(e: GraphError) -> RewriteError {
    match e {
        GraphError::PortOccupied(p) => RewriteError::LinearityOverflow(p),
        other => panic!("instantiating a compiled rule cannot fail: {other}"),
    }
}

/// What a rewrite step changed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RewriteDiff {
    pub removed: Vec<NodeId>,
    pub added: Vec<NodeId>,
    /// Edges created by reconnecting the context to the new nodes.
    pub rewired: Vec<Edge>,
}

#[derive(Debug, Clone)]
pub struct Applied {
    pub graph: PortGraph,
    pub diff: RewriteDiff,
}

/// Rewrites `g` at `m`: removes the matched nodes, adds a fresh instance of
/// the right-hand side, and reconnects every edge that left the match
/// through the interface map.
///
/// Edges from the context into a deleted port are dropped and leave the
/// context port free. Edges joining two interface ports of the match that
/// are not images of pattern edges are kept between the corresponding new
/// ports when both have exactly one image.
pub fn apply(rule: &Rule, m: &Morphism, g: &PortGraph) -> Result<Applied, RewriteError> {
    let violations = check_morphism(m, &rule.lhs, g);
    if !violations.is_empty() {
        return Err(RewriteError::StaleMorphism(violations));
    }
    let matched = m.image_nodes();
    let first = g.next_id();
    let fragment = instantiate_rhs(rule, m, g, first)?;

    // Subject port of each left-hand interface port, inverted.
    let inverse: BTreeMap<PortRef, PortRef> = rule
        .lhs
        .interface()
        .into_iter()
        .filter_map(|p| Some((m.translate(&rule.lhs, p)?, p)))
        .collect();
    let targets = |subject_port: PortRef| -> Vec<PortRef> {
        inverse
            .get(&subject_port)
            .and_then(|p| rule.interface_map.get(p))
            .into_iter()
            .flatten()
            .map(|q| fragment.ports[q])
            .collect()
    };
    let pattern_edges: BTreeSet<Edge> = m.edges.values().copied().collect();

    let mut out = g.clone();
    let mut reconnect = Vec::new();
    for e in g.edges() {
        let (a, b) = e.endpoints();
        match (matched.contains(&a.node), matched.contains(&b.node)) {
            (false, false) => {}
            (true, false) => reconnect.push((b, targets(a))),
            (false, true) => reconnect.push((a, targets(b))),
            (true, true) => {
                if pattern_edges.contains(&e) || !inverse.contains_key(&a) || !inverse.contains_key(&b) {
                    continue;
                }
                let (ta, tb) = (targets(a), targets(b));
                match (ta.as_slice(), tb.as_slice()) {
                    ([x], [y]) => reconnect.push((*x, vec![*y])),
                    ([], _) | (_, []) => {}
                    ([_, _, ..], _) => return Err(RewriteError::LinearityOverflow(tb[0])),
                    (_, _) => return Err(RewriteError::LinearityOverflow(ta[0])),
                }
            }
        }
    }
    for n in &matched {
        out.remove_node(*n);
    }
    for (id, node) in fragment.graph.nodes() {
        out.add_node_with_id(id, &node.label, node.class)
            .expect("fresh ids are above every existing id");
    }
    for e in fragment.graph.edges() {
        let (a, b) = e.endpoints();
        out.add_edge(a, b).expect("fragment edges join fresh ports");
    }
    let mut rewired = Vec::new();
    for (from, to) in reconnect {
        match to.as_slice() {
            [] => {}
            [t] => {
                out.add_edge(from, *t).map_err(|err| match err {
                    GraphError::PortOccupied(p) => RewriteError::LinearityOverflow(p),
                    GraphError::SelfPort(p) => RewriteError::LinearityOverflow(p),
                    other => panic!("reconnection between existing ports failed: {other}"),
                })?;
                rewired.push(Edge::new(from, *t));
            }
            _ => return Err(RewriteError::LinearityOverflow(from)),
        }
    }
    rewired.sort();
    Ok(Applied {
        diff: RewriteDiff {
            removed: matched.into_iter().collect(),
            added: fragment.graph.node_ids().collect(),
            rewired,
        },
        graph: out,
    })
}
