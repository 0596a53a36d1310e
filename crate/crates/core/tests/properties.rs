mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use hoport_core::json::{graph_from_str, graph_to_string};
use hoport_core::matcher::{check_morphism, find_morphisms, MatchError, MatchOptions};
use hoport_core::oracle::{brute_force_morphisms_with, canonical_solution_set, NodeSolution};
use hoport_core::rewrite::{enumerate_redexes_with, RewriteError};
use hoport_core::{Exec, NodeClass, NodeId, PortGraph, PortRef};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn instance(seed: u64) -> (PortGraph, PortGraph) {
    let mut rng = common::rng(seed);
    let subject = common::random_subject(&mut rng, 6, true);
    let pattern = common::random_pattern(&mut rng, &subject, 4, 2);
    (pattern, subject)
}

fn renumbered(g: &PortGraph, seed: u64) -> PortGraph {
    let mut rng = common::rng(seed);
    let ids: Vec<NodeId> = g.node_ids().collect();
    let mut fresh: Vec<NodeId> = (0..ids.len() as u32).map(|i| NodeId(100 + 3 * i)).collect();
    fresh.shuffle(&mut rng);
    let rename = |id: NodeId| fresh[ids.iter().position(|x| *x == id).unwrap()];
    let mut out = g.empty_like();
    for (id, node) in g.nodes() {
        out.add_node_with_id(rename(id), &node.label, node.class).unwrap();
    }
    for e in g.edges() {
        let (a, b) = e.endpoints();
        out.add_edge(
            PortRef::new(rename(a.node), a.port),
            PortRef::new(rename(b.node), b.port),
        )
        .unwrap();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn matcher_emits_exactly_the_oracle_morphisms(seed in any::<u64>()) {
        let (pattern, subject) = instance(seed);
        let found = find_morphisms(&pattern, &subject, &MatchOptions::default()).unwrap();
        let oracle = brute_force_morphisms_with(Exec::Sequential, &pattern, &subject, 8).unwrap();
        prop_assert_eq!(&found, &oracle);
        let distinct: BTreeSet<_> = found.iter().collect();
        prop_assert_eq!(distinct.len(), found.len());
    }

    #[test]
    fn emitted_morphisms_are_sound_and_disjoint(seed in any::<u64>()) {
        let (pattern, subject) = instance(seed);
        for m in find_morphisms(&pattern, &subject, &MatchOptions::default()).unwrap() {
            prop_assert!(check_morphism(&m, &pattern, &subject).is_empty());
            let mut seen = BTreeSet::new();
            for n in m.fo.values().chain(m.ho.values().flatten()) {
                prop_assert!(seen.insert(*n));
            }
        }
    }

    #[test]
    fn matching_is_deterministic(seed in any::<u64>()) {
        let (pattern, subject) = instance(seed);
        let opts = MatchOptions::default();
        prop_assert_eq!(
            find_morphisms(&pattern, &subject, &opts).unwrap(),
            find_morphisms(&pattern, &subject, &opts).unwrap()
        );
        prop_assert_eq!(
            brute_force_morphisms_with(Exec::Sequential, &pattern, &subject, 8).unwrap(),
            brute_force_morphisms_with(Exec::Parallel, &pattern, &subject, 8).unwrap()
        );
    }

    #[test]
    fn matching_is_invariant_under_subject_renaming(seed in any::<u64>()) {
        let (pattern, subject) = instance(seed);
        let renamed = renumbered(&subject, seed);
        let count = |g: &PortGraph| find_morphisms(&pattern, g, &MatchOptions::default()).unwrap().len();
        prop_assert_eq!(count(&subject), count(&renamed));
    }

    #[test]
    fn one_bijection_per_image_when_not_enumerating(seed in any::<u64>()) {
        let (pattern, subject) = instance(seed);
        let all = find_morphisms(&pattern, &subject, &MatchOptions::default()).unwrap();
        let opts = MatchOptions { enumerate_ho_port_bijections: false, ..MatchOptions::default() };
        let one = find_morphisms(&pattern, &subject, &opts).unwrap();
        let nodes = |ms: &[hoport_core::Morphism]| ms.iter().map(NodeSolution::of).collect::<Vec<_>>();
        let unique: Vec<_> = canonical_solution_set(&all).into_iter().collect();
        // Each node-level solution appears at most once: a repeated
        // higher-order variable may reject the only translation tried.
        prop_assert!(nodes(&one).iter().all(|s| unique.contains(s)));
        prop_assert_eq!(canonical_solution_set(&one).len(), one.len());
        let capped = MatchOptions { max_solutions: Some(1), ..MatchOptions::default() };
        prop_assert_eq!(find_morphisms(&pattern, &subject, &capped).unwrap().len(), all.len().min(1));
    }

    #[test]
    fn digest_is_invariant_under_renaming(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let g = common::random_subject(&mut rng, 8, true);
        let h = renumbered(&g, seed ^ 0x5eed);
        prop_assert_eq!(g.digest(), h.digest());
        prop_assert!(g.syntactic_equal(&h).is_some());
    }

    #[test]
    fn graph_json_round_trips(seed in any::<u64>()) {
        let (pattern, subject) = instance(seed);
        for g in [pattern, subject] {
            let text = graph_to_string(&g);
            let back = graph_from_str(&text, g.sig().clone()).unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(graph_to_string(&back), text);
        }
    }

    #[test]
    fn rewriting_preserves_context_and_linearity(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let g = common::random_subject(&mut rng, 6, true);
        let rules = vec![common::random_rule(&mut rng, &g)];
        let seq = enumerate_redexes_with(Exec::Sequential, &rules, &g).unwrap();
        let par = enumerate_redexes_with(Exec::Parallel, &rules, &g).unwrap();
        prop_assert_eq!(&seq, &par);
        for redex in seq {
            let matched = redex.morphism.image_nodes();
            match redex.apply(&rules, &g) {
                Ok(out) => {
                    prop_assert!(out.graph.check_invariants().is_empty());
                    for (id, node) in g.nodes().filter(|(id, _)| !matched.contains(id)) {
                        prop_assert_eq!(out.graph.node(id), Some(node));
                    }
                    for p in g.interface().into_iter().filter(|p| !matched.contains(&p.node)) {
                        prop_assert!(out.graph.neighbor(p).is_none());
                    }
                    for e in g.edges() {
                        let (a, b) = e.endpoints();
                        if !matched.contains(&a.node) && !matched.contains(&b.node) {
                            prop_assert!(out.graph.has_edge(e));
                        }
                    }
                    let added: BTreeSet<NodeId> = out.diff.added.iter().copied().collect();
                    prop_assert!(added.iter().all(|id| !g.contains(*id)));
                    prop_assert_eq!(out.graph.node_count(), g.node_count() - matched.len() + added.len());
                }
                Err(RewriteError::LinearityOverflow(_)) => {}
                Err(other) => prop_assert!(false, "unexpected error {}", other),
            }
        }
    }
}

/// A same-node edge hides both ports from the interface of a singleton
/// image, so replacing a variable by a higher-order node of the same arity
/// loses this solution.
#[test]
fn simulation_fails_on_same_node_edges() {
    let sig = common::signature();
    let mut subject = PortGraph::new(sig.clone());
    let b = subject.add_fo("B").unwrap();
    subject.connect(b, 1, b, 2).unwrap();
    let mut pattern = PortGraph::new(sig);
    pattern.add_fo("V").unwrap();
    let simulated = common::simulate_variables(&pattern);
    assert_eq!(simulated.class(NodeId(1)), Some(NodeClass::Ho));
    assert_eq!(
        find_morphisms(&pattern, &subject, &MatchOptions::default())
            .unwrap()
            .len(),
        1
    );
    assert!(find_morphisms(&simulated, &subject, &MatchOptions::default())
        .unwrap()
        .is_empty());
}

/// Adjacent higher-order nodes anchor each other's ports, so every port
/// order is reachable through anchoring alone.
#[test]
fn one_bijection_with_adjacent_higher_order_nodes() {
    let sig = common::signature();
    let mut subject = PortGraph::new(sig.clone());
    let (a, b) = (subject.add_fo("B").unwrap(), subject.add_fo("B").unwrap());
    subject.connect(a, 1, b, 2).unwrap();
    subject.connect(a, 2, b, 1).unwrap();
    let mut pattern = PortGraph::new(sig);
    let (x, y) = (pattern.add_ho("H2").unwrap(), pattern.add_ho("H2").unwrap());
    pattern.connect(x, 1, y, 2).unwrap();
    pattern.connect(x, 2, y, 1).unwrap();
    assert_eq!(
        find_morphisms(&pattern, &subject, &MatchOptions::default())
            .unwrap()
            .len(),
        4
    );
    let opts = MatchOptions {
        enumerate_ho_port_bijections: false,
        ..MatchOptions::default()
    };
    let one = find_morphisms(&pattern, &subject, &opts).unwrap();
    assert_eq!(one.len(), 2);
    assert!(one.iter().all(|m| check_morphism(m, &pattern, &subject).is_empty()));
}

#[test]
fn timeout_is_reported() {
    let sig = common::signature();
    let mut subject = PortGraph::new(sig.clone());
    for _ in 0..40 {
        subject.add_fo("A").unwrap();
    }
    let mut pattern = PortGraph::new(sig);
    pattern.add_ho("H2").unwrap();
    let opts = MatchOptions {
        timeout_ms: Some(0),
        ..MatchOptions::default()
    };
    assert!(matches!(
        find_morphisms(&pattern, &subject, &opts),
        Err(MatchError::Timeout { .. })
    ));
}

#[test]
fn signature_mismatch_is_reported() {
    let a = PortGraph::new(common::signature());
    let b = PortGraph::new(Arc::new(hoport_core::proofnets::proof_signature(1)));
    assert_eq!(
        find_morphisms(&a, &b, &MatchOptions::default()),
        Err(MatchError::SignatureMismatch)
    );
}
