//! Natural-deduction proofs as port-graphs: the proof signature, example
//! proofs, the first-order pattern family, and cut-elimination rules.
//!
//! Node ids are assigned in construction order, so `n1` is always the first
//! node listed in each builder.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::portgraph::{NodeId, PortGraph, PortRef};
use crate::rewrite::{compile_rule, Rule};
use crate::signature::{NodeNameDecl, PSignature, PortName};

pub const AX: &str = "ax";
pub const W: &str = "w";
pub const C: &str = "c";
pub const IMP_I: &str = "imp_i";
pub const IMP_IC: &str = "imp_ic";
pub const IMP_E: &str = "imp_e";
pub const AND_I: &str = "and_i";
pub const AND_EL: &str = "and_el";
pub const AND_ER: &str = "and_er";

/// Name of the scope node with `n` inputs and outputs.
pub fn scope(n: usize) -> String {
    format!("s{n}")
}

/// Constant node names for the proof rules, plus scope nodes
/// `s1..s{max_scope}`.
pub fn proof_signature(max_scope: usize) -> PSignature {
    let mut sig = PSignature::new();
    let constants: [(&str, &[&str]); 9] = [
        (AX, &["in", "p"]),
        (W, &["p"]),
        (C, &["p", "out_l", "out_r"]),
        (IMP_I, &["in_l", "in_r", "s", "p"]),
        (IMP_IC, &["in_l", "in_r", "p"]),
        (IMP_E, &["in_l", "in_r", "p"]),
        (AND_I, &["in_l", "in_r", "p"]),
        (AND_EL, &["in", "p"]),
        (AND_ER, &["in", "p"]),
    ];
    for (name, ports) in constants {
        sig.insert(NodeNameDecl::fo_constant(name, ports))
            .expect("distinct names");
    }
    for n in 1..=max_scope {
        let ports: Vec<String> = (1..=n)
            .map(|i| format!("in_{i}"))
            .chain(["p".to_string()])
            .chain((1..=n).map(|i| format!("out_{i}")))
            .collect();
        let ports: Vec<&str> = ports.iter().map(String::as_str).collect();
        sig.insert(NodeNameDecl::fo_constant(scope(n), &ports))
            .expect("distinct names");
    }
    sig
}

fn graph(sig: &Arc<PSignature>, nodes: &[(&str, bool)], edges: &[(u32, usize, u32, usize)]) -> PortGraph {
    let mut g = PortGraph::new(sig.clone());
    for &(label, ho) in nodes {
        if ho { g.add_ho(label) } else { g.add_fo(label) }.expect("fixture labels are declared");
    }
    for &(a, pa, b, pb) in edges {
        g.connect(NodeId(a), pa, NodeId(b), pb)
            .expect("fixture edges are linear");
    }
    g
}

const fn fo(label: &str) -> (&str, bool) {
    (label, false)
}

const fn ho(label: &str) -> (&str, bool) {
    (label, true)
}

/// The proof of `A => B => A`: `n1` s1, `n2` ax, `n3` w, `n4` imp_i,
/// `n5` imp_ic. The conclusion port `n5.3` is the only free port.
pub fn example_proof_over(sig: &Arc<PSignature>) -> PortGraph {
    graph(
        sig,
        &[fo("s1"), fo(AX), fo(W), fo(IMP_I), fo(IMP_IC)],
        &[
            (1, 1, 5, 2),
            (1, 3, 2, 1),
            (1, 2, 4, 3),
            (2, 2, 4, 1),
            (3, 1, 4, 2),
            (4, 4, 5, 1),
        ],
    )
}

pub fn example_proof() -> PortGraph {
    example_proof_over(&Arc::new(proof_signature(1)))
}

/// The proof signature with the first-order variables of the pattern family:
/// `X` shaped like `s1`, `Y` like `imp_ic`, and a four-port `Z`.
pub fn family_signature() -> PSignature {
    let mut sig = proof_signature(1);
    let v = PortName::variable;
    let c = PortName::constant;
    for decl in [
        NodeNameDecl::fo_variable("X", vec![v("y"), v("x"), c("out_1")]),
        NodeNameDecl::fo_variable("Y", vec![v("y"), v("x"), c("p")]),
        NodeNameDecl::fo_variable("Z", vec![v("y"), v("x"), c("p"), v("z")]),
    ] {
        sig.insert(decl).expect("distinct names");
    }
    sig
}

/// The target of the pattern family: the example proof.
pub fn family_subject() -> PortGraph {
    example_proof_over(&Arc::new(family_signature()))
}

/// The four two-node patterns `L1..L4`, each with `n1` above `n2`.
pub fn family_patterns() -> [PortGraph; 4] {
    let sig = Arc::new(family_signature());
    [
        graph(&sig, &[fo("s1"), fo("Z")], &[(1, 1, 2, 2)]),
        graph(&sig, &[fo("X"), fo("X")], &[(1, 1, 2, 2)]),
        graph(&sig, &[fo("X"), fo("Y")], &[]),
        graph(&sig, &[fo("X"), fo("Y")], &[(1, 1, 2, 2)]),
    ]
}

/// The proof signature with the variables of the beta redex: a three-port
/// proof body `Xh`, its two-port reading `Xh2`, a two-port first-order `X`,
/// and a one-port proof `P` for duplication and erasure.
pub fn beta_signature() -> PSignature {
    let mut sig = proof_signature(1);
    for decl in [
        NodeNameDecl::ho_variable("Xh", &["x1", "x2", "y"]),
        NodeNameDecl::ho_variable("Xh2", &["x1", "y"]),
        NodeNameDecl::fo_variable("X", vec![PortName::variable("x"), PortName::variable("y")]),
        NodeNameDecl::ho_variable("P", &["y"]),
    ] {
        sig.insert(decl).expect("distinct names");
    }
    sig
}

/// A beta redex: the example proof's `A => B` introduction, cut against an
/// elimination whose argument is a second axiom.
///
/// `n1` s1, `n2` ax, `n3` w, `n4` imp_i, `n5` imp_e, `n6` ax. Free ports:
/// `n1.1`, `n5.3`, `n6.1`.
pub fn beta_subject() -> PortGraph {
    graph(
        &Arc::new(beta_signature()),
        &[fo("s1"), fo(AX), fo(W), fo(IMP_I), fo(IMP_E), fo(AX)],
        &[
            (1, 3, 2, 1),
            (1, 2, 4, 3),
            (2, 2, 4, 1),
            (3, 1, 4, 2),
            (4, 4, 5, 1),
            (6, 2, 5, 2),
        ],
    )
}

/// The beta redex pattern: `n1` s1, `n2` Xh, `n3` imp_i, `n4` X, `n5` imp_e.
pub fn beta_pattern() -> PortGraph {
    graph(
        &Arc::new(beta_signature()),
        &[fo("s1"), ho("Xh"), fo(IMP_I), fo("X"), fo(IMP_E)],
        &[
            (1, 3, 2, 1),
            (1, 2, 3, 3),
            (2, 3, 3, 1),
            (2, 2, 3, 2),
            (3, 4, 5, 1),
            (4, 2, 5, 2),
        ],
    )
}

/// The pattern with a two-port body; the second premise of `imp_i` is left
/// open.
pub fn beta_pattern_arity2() -> PortGraph {
    graph(
        &Arc::new(beta_signature()),
        &[fo("s1"), ho("Xh2"), fo(IMP_I), fo("X"), fo(IMP_E)],
        &[(1, 3, 2, 1), (1, 2, 3, 3), (2, 2, 3, 1), (3, 4, 5, 1), (4, 2, 5, 2)],
    )
}

fn port(n: u32, p: usize) -> PortRef {
    PortRef::new(NodeId(n), p)
}

fn interface(entries: &[(PortRef, &[PortRef])]) -> BTreeMap<PortRef, BTreeSet<PortRef>> {
    entries
        .iter()
        .map(|(from, to)| (*from, to.iter().copied().collect()))
        .collect()
}

/// Contracts an implication introduction followed by its elimination: the
/// body is kept, the argument plugs its hypothesis port, and the scope
/// input and the elimination output are carried by the body.
pub fn beta_rule() -> Rule {
    let sig = Arc::new(beta_signature());
    let lhs = beta_pattern();
    let rhs = graph(&sig, &[ho("Xh"), fo("X")], &[(2, 2, 1, 2)]);
    let map = interface(&[
        (port(1, 1), &[port(1, 1)]),
        (port(4, 1), &[port(2, 1)]),
        (port(5, 3), &[port(1, 3)]),
    ]);
    compile_rule(lhs, rhs, map, "beta").expect("beta rule is well formed")
}

/// Duplicates the proof feeding a contraction node.
pub fn duplication_rule() -> Rule {
    let sig = Arc::new(beta_signature());
    let lhs = graph(&sig, &[ho("P"), fo(C)], &[(1, 1, 2, 1)]);
    let rhs = graph(&sig, &[ho("P"), ho("P")], &[]);
    let map = interface(&[(port(2, 2), &[port(1, 1)]), (port(2, 3), &[port(2, 1)])]);
    compile_rule(lhs, rhs, map, "duplicate").expect("duplication rule is well formed")
}

/// Erases the proof feeding a weakening node.
pub fn erasure_rule() -> Rule {
    let sig = Arc::new(beta_signature());
    let lhs = graph(&sig, &[ho("P"), fo(W)], &[(1, 1, 2, 1)]);
    let rhs = PortGraph::new(sig);
    compile_rule(lhs, rhs, BTreeMap::new(), "erase").expect("erasure rule is well formed")
}

/// Deletes a weakening node; the premise it consumed is left open.
pub fn weakening_removal_rule() -> Rule {
    let sig = Arc::new(beta_signature());
    let lhs = graph(&sig, &[fo(W)], &[]);
    let map = interface(&[(port(1, 1), &[])]);
    compile_rule(lhs, PortGraph::new(sig), map, "drop_weakening").expect("weakening removal is well formed")
}

/// A closed proof (`ax` discharged by `imp_ic`) shared by a contraction
/// whose outputs meet in an `and_i`.
///
/// `n1` ax, `n2` imp_ic, `n3` c, `n4` and_i; `n4.3` is free.
pub fn duplication_subject() -> PortGraph {
    graph(
        &Arc::new(beta_signature()),
        &[fo(AX), fo(IMP_IC), fo(C), fo(AND_I)],
        &[(1, 1, 2, 2), (1, 2, 2, 1), (2, 3, 3, 1), (3, 2, 4, 1), (3, 3, 4, 2)],
    )
}

/// A closed proof discarded by a weakening, next to an unrelated axiom.
///
/// `n1` ax, `n2` imp_ic, `n3` w, `n4` ax.
pub fn erasure_subject() -> PortGraph {
    graph(
        &Arc::new(beta_signature()),
        &[fo(AX), fo(IMP_IC), fo(W), fo(AX)],
        &[(1, 1, 2, 2), (1, 2, 2, 1), (2, 3, 3, 1)],
    )
}

/// Every fixture, by file stem, for export.
pub fn all_graphs() -> Vec<(&'static str, PortGraph)> {
    let [l1, l2, l3, l4] = family_patterns();
    vec![
        ("example_proof", example_proof()),
        ("family_subject", family_subject()),
        ("family_l1", l1),
        ("family_l2", l2),
        ("family_l3", l3),
        ("family_l4", l4),
        ("beta_subject", beta_subject()),
        ("beta_pattern", beta_pattern()),
        ("beta_pattern_arity2", beta_pattern_arity2()),
        ("duplication_subject", duplication_subject()),
        ("erasure_subject", erasure_subject()),
    ]
}

pub fn all_rules() -> Vec<Rule> {
    vec![
        beta_rule(),
        duplication_rule(),
        erasure_rule(),
        weakening_removal_rule(),
    ]
}

pub fn all_signatures() -> Vec<(&'static str, PSignature)> {
    vec![
        ("proof_signature", proof_signature(3)),
        ("family_signature", family_signature()),
        ("beta_signature", beta_signature()),
    ]
}
