use std::collections::{BTreeMap, BTreeSet};

use super::{NodeId, PortGraph, PortRef};

#[derive(Clone, Default)]
struct State {
    map: BTreeMap<NodeId, NodeId>,
    used: BTreeSet<NodeId>,
}

/// Finds a label-, class- and edge-preserving bijection from the nodes of `g`
/// onto the nodes of `h` that sends every port in the left column of `fixed`
/// to the port in the right column.
///
/// Unforced choices are made for the smallest unmapped node of `g` first and
/// tried in ascending order, so the result is the lexicographically least
/// bijection. Because every port carries at most one edge, fixing one node
/// fixes its whole connected component; the search only branches once per
/// component.
pub fn find_isomorphism(
    g: &PortGraph,
    h: &PortGraph,
    fixed: &[(PortRef, PortRef)],
) -> Option<BTreeMap<NodeId, NodeId>> {
    if g.node_count() != h.node_count() || g.edge_count() != h.edge_count() {
        return None;
    }
    let mut labels_g: Vec<_> = g.nodes().map(|(_, n)| (n.class, n.label.as_str())).collect();
    let mut labels_h: Vec<_> = h.nodes().map(|(_, n)| (n.class, n.label.as_str())).collect();
    labels_g.sort_unstable();
    labels_h.sort_unstable();
    if labels_g != labels_h {
        return None;
    }

    let mut state = State::default();
    for (a, b) in fixed {
        if a.port != b.port || !assign(g, h, &mut state, a.node, b.node) {
            return None;
        }
    }
    search(g, h, state)
}

fn search(g: &PortGraph, h: &PortGraph, state: State) -> Option<BTreeMap<NodeId, NodeId>> {
    let Some(next) = g.node_ids().find(|id| !state.map.contains_key(id)) else {
        return Some(state.map);
    };
    let node = g.node(next)?;
    for cand in h.node_ids() {
        if state.used.contains(&cand) || h.node(cand) != Some(node) {
            continue;
        }
        let mut branch = state.clone();
        if assign(g, h, &mut branch, next, cand) {
            if let Some(found) = search(g, h, branch) {
                return Some(found);
            }
        }
    }
    None
}

/// Maps `a ↦ b` and propagates along edges. Returns false on conflict.
fn assign(g: &PortGraph, h: &PortGraph, state: &mut State, a: NodeId, b: NodeId) -> bool {
    let mut queue = vec![(a, b)];
    while let Some((u, v)) = queue.pop() {
        match state.map.get(&u) {
            Some(&w) if w == v => continue,
            Some(_) => return false,
            None => {}
        }
        if state.used.contains(&v) || g.node(u).is_none() || g.node(u) != h.node(v) {
            return false;
        }
        state.map.insert(u, v);
        state.used.insert(v);
        for port in g.ports(u) {
            let pv = PortRef::new(v, port.port);
            match (g.neighbor(port), h.neighbor(pv)) {
                (None, None) => {}
                (Some(x), Some(y)) if x.port == y.port => queue.push((x.node, y.node)),
                _ => return false,
            }
        }
    }
    true
}
