//! Seeded generators for random signatures, graphs, patterns and rules.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use hoport_core::matcher::image_interface;
use hoport_core::{compile_rule, NodeClass, NodeId, NodeNameDecl, PSignature, PortGraph, PortName, PortRef, Rule};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const CONSTANTS: [&str; 3] = ["A", "B", "C"];
pub const HO: [&str; 3] = ["H0", "H1", "H2"];
pub const SIM_SLOTS: usize = 4;

/// Constants `A(a)`, `B(l, r)`, `C(x, y, z)`; first-order variables `U`
/// (shaped like `A`), `V` (two variable ports) and `K` (like `B`, with the
/// constant port `r`); higher-order variables `H0`, `H1`, `H2` of arity 0..2;
/// and fresh higher-order names `SIM{arity}_{i}` for the simulation check.
pub fn signature() -> Arc<PSignature> {
    let mut s = PSignature::new();
    let v = PortName::variable;
    let decls = [
        NodeNameDecl::fo_constant("A", &["a"]),
        NodeNameDecl::fo_constant("B", &["l", "r"]),
        NodeNameDecl::fo_constant("C", &["x", "y", "z"]),
        NodeNameDecl::fo_variable("U", vec![v("u")]),
        NodeNameDecl::fo_variable("V", vec![v("v1"), v("v2")]),
        NodeNameDecl::fo_variable("K", vec![v("k"), PortName::constant("r")]),
        NodeNameDecl::ho_variable("H0", &[]),
        NodeNameDecl::ho_variable("H1", &["h"]),
        NodeNameDecl::ho_variable("H2", &["h1", "h2"]),
    ];
    for d in decls {
        s.insert(d).unwrap();
    }
    for arity in 1..=3 {
        let ports: Vec<String> = (1..=arity).map(|i| format!("s{i}")).collect();
        let ports: Vec<&str> = ports.iter().map(String::as_str).collect();
        for i in 1..=SIM_SLOTS {
            s.insert(NodeNameDecl::ho_variable(format!("SIM{arity}_{i}"), &ports))
                .unwrap();
        }
    }
    Arc::new(s)
}

/// Connects random pairs of free ports. Same-node edges only when
/// `self_loops` is set.
pub fn add_random_edges(g: &mut PortGraph, rng: &mut impl Rng, density: f64, self_loops: bool) {
    let mut free = g.interface();
    free.shuffle(rng);
    while free.len() >= 2 {
        let a = free.pop().unwrap();
        if !rng.gen_bool(density) {
            continue;
        }
        let candidates: Vec<usize> = (0..free.len())
            .filter(|&i| self_loops || free[i].node != a.node)
            .collect();
        let Some(&i) = candidates.choose(rng) else { continue };
        let b = free.swap_remove(i);
        g.add_edge(a, b).unwrap();
    }
}

/// A graph of first-order constants.
pub fn random_subject(rng: &mut impl Rng, max_nodes: usize, self_loops: bool) -> PortGraph {
    let mut g = PortGraph::new(signature());
    let n = rng.gen_range(1..=max_nodes);
    for _ in 0..n {
        g.add_fo(CONSTANTS.choose(rng).unwrap()).unwrap();
    }
    let density = rng.gen_range(0.3..0.95);
    add_random_edges(&mut g, rng, density, self_loops);
    g
}

fn variable_for(label: &str, rng: &mut impl Rng) -> Option<&'static str> {
    match label {
        "A" => Some("U"),
        "B" => Some(*["V", "K"].choose(rng).unwrap()),
        _ => None,
    }
}

/// A pattern cut out of `subject`, so that it usually matches: some subject
/// nodes become first-order pattern nodes (possibly abstracted to
/// variables), and up to `max_ho` disjoint node sets with small interfaces
/// become higher-order nodes. Edges are kept with high probability.
pub fn derived_pattern(rng: &mut impl Rng, subject: &PortGraph, max_nodes: usize, max_ho: usize) -> PortGraph {
    let mut ids: Vec<NodeId> = subject.node_ids().collect();
    ids.shuffle(rng);
    let mut pattern = PortGraph::new(subject.sig().clone());
    // Subject port -> pattern port.
    let mut port_map: BTreeMap<PortRef, PortRef> = BTreeMap::new();
    let mut budget = rng.gen_range(1..=max_nodes);
    let mut ho_left = rng.gen_range(0..=max_ho);
    let mut rest = ids.into_iter().peekable();
    while budget > 0 && rest.peek().is_some() {
        if ho_left > 0 && rng.gen_bool(0.4) {
            let size = rng.gen_range(1..=2);
            let group: BTreeSet<NodeId> = rest.by_ref().take(size).collect();
            let interface = image_interface(subject, &group);
            if interface.len() <= 2 {
                let h = pattern.add_ho(HO[interface.len()]).unwrap();
                let mut order = interface.clone();
                order.shuffle(rng);
                for (i, p) in order.into_iter().enumerate() {
                    port_map.insert(p, PortRef::new(h, i + 1));
                }
                ho_left -= 1;
                budget -= 1;
            }
            continue;
        }
        let id = rest.next().unwrap();
        let label = subject.label(id).unwrap();
        let label = match variable_for(label, rng) {
            Some(var) if rng.gen_bool(0.4) => var,
            _ => label,
        };
        let v = pattern.add_fo(label).unwrap();
        for p in subject.ports(id) {
            port_map.insert(p, PortRef::new(v, p.port));
        }
        budget -= 1;
    }
    for e in subject.edges() {
        let (a, b) = e.endpoints();
        if let (Some(x), Some(y)) = (port_map.get(&a), port_map.get(&b)) {
            if rng.gen_bool(0.85) {
                pattern.add_edge(*x, *y).unwrap();
            }
        }
    }
    pattern
}

/// A pattern with arbitrary labels and edges, usually without matches.
pub fn free_pattern(rng: &mut impl Rng, max_nodes: usize, max_ho: usize) -> PortGraph {
    let mut g = PortGraph::new(signature());
    let n = rng.gen_range(1..=max_nodes);
    let mut ho = 0;
    for _ in 0..n {
        if ho < max_ho && rng.gen_bool(0.3) {
            g.add_ho(HO.choose(rng).unwrap()).unwrap();
            ho += 1;
        } else {
            let labels = ["A", "B", "C", "U", "V", "K"];
            g.add_fo(labels.choose(rng).unwrap()).unwrap();
        }
    }
    add_random_edges(&mut g, rng, 0.6, true);
    g
}

pub fn random_pattern(rng: &mut impl Rng, subject: &PortGraph, max_nodes: usize, max_ho: usize) -> PortGraph {
    if rng.gen_bool(0.75) {
        derived_pattern(rng, subject, max_nodes, max_ho)
    } else {
        free_pattern(rng, max_nodes, max_ho)
    }
}

/// Replaces every first-order variable node by a node labelled with a fresh
/// higher-order variable of the same arity; ids are kept.
pub fn simulate_variables(g: &PortGraph) -> PortGraph {
    let sig = g.sig();
    let mut out = PortGraph::new(sig.clone());
    let mut slot: BTreeMap<usize, usize> = BTreeMap::new();
    for (id, node) in g.nodes() {
        let is_var = node.class == NodeClass::Fo && sig.kind(&node.label).is_some_and(|k| k.is_variable());
        if is_var {
            let arity = sig.arity(&node.label).unwrap();
            let i = slot.entry(arity).or_insert(0);
            *i += 1;
            out.add_node_with_id(id, &format!("SIM{arity}_{i}"), NodeClass::Ho)
                .unwrap();
        } else {
            out.add_node_with_id(id, &node.label, node.class).unwrap();
        }
    }
    for e in g.edges() {
        let (a, b) = e.endpoints();
        out.add_edge(a, b).unwrap();
    }
    out
}

/// A pattern containing at least one first-order variable.
pub fn variable_pattern(rng: &mut impl Rng, subject: &PortGraph) -> Option<PortGraph> {
    for _ in 0..20 {
        let p = derived_pattern(rng, subject, 4, 0);
        let sig = p.sig().clone();
        if p.nodes()
            .any(|(_, n)| sig.kind(&n.label).is_some_and(|k| k.is_variable()))
        {
            return Some(p);
        }
    }
    None
}

/// A rule whose left-hand side is cut out of `subject` and whose right-hand
/// side reuses its variables, new constants, and random wiring.
pub fn random_rule(rng: &mut impl Rng, subject: &PortGraph) -> Rule {
    loop {
        let lhs = derived_pattern(rng, subject, 3, 1);
        let mut rhs = PortGraph::new(lhs.sig().clone());
        for (_, node) in lhs.nodes() {
            let copies = match node.class {
                NodeClass::Ho => rng.gen_range(0..=2),
                NodeClass::Fo => rng.gen_range(0..=1),
            };
            for _ in 0..copies {
                rhs.add_node(&node.label, node.class).unwrap();
            }
        }
        for _ in 0..rng.gen_range(0..=2) {
            rhs.add_fo(CONSTANTS.choose(rng).unwrap()).unwrap();
        }
        add_random_edges(&mut rhs, rng, 0.4, false);
        let targets = rhs.interface();
        let map = lhs
            .interface()
            .into_iter()
            .map(|p| {
                let k = match rng.gen_range(0..10) {
                    0..=1 => 0,
                    2..=8 => 1,
                    _ => 2,
                };
                let chosen: BTreeSet<PortRef> = targets.choose_multiple(rng, k).copied().collect();
                (p, chosen)
            })
            .collect();
        if let Ok(rule) = compile_rule(lhs, rhs, map, "random") {
            return rule;
        }
    }
}
