//! Brute-force reference matcher.
//!
//! Enumerates every candidate assignment and keeps those accepted by
//! [`check_morphism`]. It shares no search code with [`crate::matcher`] and is
//! only usable on small subjects.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::exec::Exec;
use crate::matcher::{check_edges, check_first_order, check_injection, check_morphism, image_interface, Morphism};
use crate::portgraph::{NodeId, PortGraph, PortRef};

pub const DEFAULT_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("subject has {nodes} nodes, more than the limit of {limit}")]
    SubjectTooLarge { nodes: usize, limit: usize },
    #[error("pattern and subject use different signatures")]
    SignatureMismatch,
}

/// Node-level projection of a morphism: the first-order map and the
/// higher-order image sets, without port translations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeSolution {
    pub fo: Vec<(NodeId, NodeId)>,
    pub ho: Vec<(NodeId, Vec<NodeId>)>,
}

impl NodeSolution {
    pub fn of(m: &Morphism) -> Self {
        NodeSolution {
            fo: m.fo.iter().map(|(a, b)| (*a, *b)).collect(),
            ho: m.ho.iter().map(|(a, b)| (*a, b.iter().copied().collect())).collect(),
        }
    }
}

pub fn canonical_solution_set<'a>(ms: impl IntoIterator<Item = &'a Morphism>) -> BTreeSet<NodeSolution> {
    ms.into_iter().map(NodeSolution::of).collect()
}

/// Every morphism from `pattern` to `subject`, sorted.
pub fn brute_force_morphisms(
    pattern: &PortGraph,
    subject: &PortGraph,
    limit: usize,
) -> Result<Vec<Morphism>, OracleError> {
    brute_force_morphisms_with(Exec::default(), pattern, subject, limit)
}

pub fn brute_force_morphisms_with(
    exec: Exec,
    pattern: &PortGraph,
    subject: &PortGraph,
    limit: usize,
) -> Result<Vec<Morphism>, OracleError> {
    if subject.node_count() > limit {
        return Err(OracleError::SubjectTooLarge {
            nodes: subject.node_count(),
            limit,
        });
    }
    if !pattern.same_signature(subject) {
        return Err(OracleError::SignatureMismatch);
    }
    let fo: Vec<NodeId> = pattern.fo_nodes().collect();
    let targets: Vec<NodeId> = subject.node_ids().collect();
    let mut maps = Vec::new();
    injective_maps(fo.len(), &targets, &mut Vec::new(), &mut maps);
    let mut out = exec.flat_map(maps, |images| {
        let fo_map: BTreeMap<NodeId, NodeId> = fo.iter().copied().zip(images).collect();
        let partial = Morphism::assemble(pattern, subject, fo_map.clone(), BTreeMap::new(), BTreeMap::new());
        if !check_first_order(&partial, pattern, subject).is_empty()
            || !check_injection(&partial).is_empty()
            || !check_edges(&partial, pattern, subject).is_empty()
        {
            return Vec::new();
        }
        complete_higher_order(pattern, subject, fo_map)
    });
    out.sort();
    out.dedup();
    Ok(out)
}

fn injective_maps(n: usize, targets: &[NodeId], current: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
    if current.len() == n {
        out.push(current.clone());
        return;
    }
    for t in targets {
        if !current.contains(t) {
            current.push(*t);
            injective_maps(n, targets, current, out);
            current.pop();
        }
    }
}

fn complete_higher_order(pattern: &PortGraph, subject: &PortGraph, fo: BTreeMap<NodeId, NodeId>) -> Vec<Morphism> {
    let ho: Vec<NodeId> = pattern.ho_nodes().collect();
    let used: BTreeSet<NodeId> = fo.values().copied().collect();
    let rest: Vec<NodeId> = subject.node_ids().filter(|n| !used.contains(n)).collect();
    let mut out = Vec::new();
    // Digit i of `code` in base |ho|+1 says where rest[i] goes; 0 is nowhere.
    let base = ho.len() + 1;
    let total = base.checked_pow(rest.len() as u32).expect("bounded by the size limit");
    for mut code in 0..total {
        let mut images: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); ho.len()];
        for n in &rest {
            let slot = code % base;
            code /= base;
            if slot > 0 {
                images[slot - 1].insert(*n);
            }
        }
        let mut options: Vec<Vec<Vec<PortRef>>> = Vec::new();
        for (v, image) in ho.iter().zip(&images) {
            let interface = image_interface(subject, image);
            if Some(interface.len()) != pattern.degree(*v) {
                break;
            }
            options.push(orderings(interface));
        }
        if options.len() != ho.len() {
            continue;
        }
        for pick in product(&options) {
            let ho_map = ho.iter().copied().zip(images.iter().cloned()).collect();
            let tr = ho.iter().copied().zip(pick).collect();
            let m = Morphism::assemble(pattern, subject, fo.clone(), ho_map, tr);
            if check_morphism(&m, pattern, subject).is_empty() {
                out.push(m);
            }
        }
    }
    out
}

fn orderings(items: Vec<PortRef>) -> Vec<Vec<PortRef>> {
    let mut out = vec![Vec::new()];
    for item in items {
        out = out
            .into_iter()
            .flat_map(|seq: Vec<PortRef>| {
                (0..=seq.len()).map(move |i| {
                    let mut s = seq.clone();
                    s.insert(i, item);
                    s
                })
            })
            .collect();
    }
    out
}

fn product(options: &[Vec<Vec<PortRef>>]) -> Vec<Vec<Vec<PortRef>>> {
    options.iter().fold(vec![Vec::new()], |acc, choices| {
        acc.into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |c| {
                    let mut p = prefix.clone();
                    p.push(c.clone());
                    p
                })
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::signature::{NodeNameDecl, PSignature};

    fn sig() -> Arc<PSignature> {
        let mut s = PSignature::new();
        s.insert(NodeNameDecl::fo_constant("A", &["a"])).unwrap();
        s.insert(NodeNameDecl::ho_variable("H", &["h"])).unwrap();
        Arc::new(s)
    }

    #[test]
    fn single_ho_node_matches_single_node() {
        let mut p = PortGraph::new(sig());
        let h = p.add_ho("H").unwrap();
        let mut s = PortGraph::new(sig());
        let a = s.add_fo("A").unwrap();
        let ms = brute_force_morphisms(&p, &s, DEFAULT_LIMIT).unwrap();
        let expected = NodeSolution {
            fo: vec![],
            ho: vec![(h, vec![a])],
        };
        assert_eq!(canonical_solution_set(&ms), [expected].into());
    }

    #[test]
    fn size_guard() {
        let p = PortGraph::new(sig());
        let mut s = PortGraph::new(sig());
        for _ in 0..3 {
            s.add_fo("A").unwrap();
        }
        assert_eq!(
            brute_force_morphisms(&p, &s, 2),
            Err(OracleError::SubjectTooLarge { nodes: 3, limit: 2 })
        );
    }

    #[test]
    fn empty_set_projects_to_empty() {
        assert!(canonical_solution_set(&[]).is_empty());
    }

    #[test]
    fn orderings_cover_all_permutations() {
        let ports: Vec<_> = (1..=4).map(|i| PortRef::new(NodeId(i), 1)).collect();
        let all: BTreeSet<_> = orderings(ports).into_iter().collect();
        assert_eq!(all.len(), 24);
    }
}
