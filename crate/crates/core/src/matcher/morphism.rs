use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::portgraph::{find_isomorphism, Edge, NodeClass, NodeId, PortGraph, PortRef};
use crate::signature::{NameKind, PortKind, PortName};

/// A higher-order port-graph morphism from a pattern into a subject.
///
/// `tr_ports[v][i]` is the subject port that port `i + 1` of the pattern
/// higher-order node `v` is sent to; it is an interface port of the image of
/// `v`. `sigma_n` and `sigma_p` record the instantiation of first-order
/// variable names and of their variable port names, and `edges` maps each
/// pattern edge to its subject image.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Morphism {
    pub fo: BTreeMap<NodeId, NodeId>,
    pub ho: BTreeMap<NodeId, BTreeSet<NodeId>>,
    pub tr_ports: BTreeMap<NodeId, Vec<PortRef>>,
    pub sigma_n: BTreeMap<String, String>,
    pub sigma_p: BTreeMap<(String, String), PortName>,
    pub edges: BTreeMap<Edge, Edge>,
}

impl Morphism {
    /// Completes a morphism from its node-level data: derives the name
    /// substitutions from the image labels and the edge map from the port
    /// translation. The result is not checked; see [`check_morphism`].
    pub fn assemble(
        pattern: &PortGraph,
        subject: &PortGraph,
        fo: BTreeMap<NodeId, NodeId>,
        ho: BTreeMap<NodeId, BTreeSet<NodeId>>,
        tr_ports: BTreeMap<NodeId, Vec<PortRef>>,
    ) -> Self {
        let sig = pattern.sig();
        let mut sigma_n = BTreeMap::new();
        let mut sigma_p = BTreeMap::new();
        for (v, w) in &fo {
            let (Some(var), Some(target)) = (pattern.label(*v), subject.label(*w)) else {
                continue;
            };
            if sig.kind(var) != Some(NameKind::FoVariable) || sigma_n.contains_key(var) {
                continue;
            }
            sigma_n.insert(var.to_string(), target.to_string());
            let var_ports = sig.interface_of(var).unwrap_or_default();
            let target_ports = sig.interface_of(target).unwrap_or_default();
            for (x, y) in var_ports.iter().zip(target_ports) {
                if x.kind == PortKind::Variable {
                    sigma_p.insert((var.to_string(), x.text.clone()), y.clone());
                }
            }
        }
        let mut m = Morphism {
            fo,
            ho,
            tr_ports,
            sigma_n,
            sigma_p,
            edges: BTreeMap::new(),
        };
        m.edges = pattern
            .edges()
            .filter_map(|e| {
                let (a, b) = e.endpoints();
                Some((e, Edge::new(m.translate(pattern, a)?, m.translate(pattern, b)?)))
            })
            .collect();
        m
    }

    /// Image of a pattern port: `(f(v), p)` for first-order nodes, the
    /// port translation for higher-order ones.
    pub fn translate(&self, pattern: &PortGraph, p: PortRef) -> Option<PortRef> {
        match pattern.class(p.node)? {
            NodeClass::Fo => self.fo.get(&p.node).map(|w| PortRef::new(*w, p.port)),
            NodeClass::Ho => p
                .port
                .checked_sub(1)
                .and_then(|i| self.tr_ports.get(&p.node)?.get(i))
                .copied(),
        }
    }

    /// Every subject node in the image of the pattern.
    pub fn image_nodes(&self) -> BTreeSet<NodeId> {
        self.fo
            .values()
            .copied()
            .chain(self.ho.values().flatten().copied())
            .collect()
    }
}

/// One failed clause of the morphism definition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Violation {
    SignatureMismatch,
    /// A pattern node or edge has no image.
    NotTotal(String),
    /// The morphism mentions a node or edge absent from the pattern.
    NotInDomain(String),
    /// An image node is absent from the subject or of the wrong class.
    BadImage {
        node: NodeId,
        image: NodeId,
    },
    /// Constant node name not preserved.
    ConstantName {
        node: NodeId,
    },
    /// Variable node image disagrees with the name substitution.
    VariableInstantiation {
        node: NodeId,
        var: String,
    },
    /// `sigma_n(var)` has the wrong arity or breaks a constant port name.
    BadSubstitution {
        var: String,
    },
    /// `sigma_p` disagrees with the interface of `sigma_n(var)`.
    BadPortSubstitution {
        var: String,
    },
    /// `tr_ports` of a higher-order node is not a bijection onto the
    /// interface of its image.
    PortTranslation {
        node: NodeId,
    },
    /// Two occurrences of a higher-order variable have images that are not
    /// syntactically equal in a way compatible with their port translations.
    SharedImage {
        var: String,
        node: NodeId,
    },
    /// Two images share a subject node.
    Injection {
        node: NodeId,
    },
    EdgeNotPreserved {
        edge: Edge,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SignatureMismatch => write!(f, "pattern and subject signatures differ"),
            Violation::NotTotal(what) => write!(f, "{what} has no image"),
            Violation::NotInDomain(what) => write!(f, "{what} is not in the pattern"),
            Violation::BadImage { node, image } => write!(f, "{node} is mapped to invalid node {image}"),
            Violation::ConstantName { node } => write!(f, "{node}: constant name not preserved"),
            Violation::VariableInstantiation { node, var } => {
                write!(f, "{node}: image label differs from the instantiation of {var}")
            }
            Violation::BadSubstitution { var } => write!(f, "instantiation of {var} breaks arity or constant ports"),
            Violation::BadPortSubstitution { var } => write!(f, "port instantiation of {var} is inconsistent"),
            Violation::PortTranslation { node } => {
                write!(f, "{node}: ports are not in bijection with the image interface")
            }
            Violation::SharedImage { var, node } => {
                write!(
                    f,
                    "{node}: image is not syntactically equal to the other images of {var}"
                )
            }
            Violation::Injection { node } => write!(f, "subject node {node} is used by two images"),
            Violation::EdgeNotPreserved { edge } => write!(f, "edge {edge} is not preserved"),
        }
    }
}

/// Checks every clause of the morphism definition; the result is empty iff
/// `m` is a morphism from `pattern` to `subject`.
pub fn check_morphism(m: &Morphism, pattern: &PortGraph, subject: &PortGraph) -> Vec<Violation> {
    if !pattern.same_signature(subject) {
        return vec![Violation::SignatureMismatch];
    }
    let mut out = check_totality(m, pattern);
    out.extend(check_first_order(m, pattern, subject));
    out.extend(check_higher_order(m, pattern, subject));
    out.extend(check_injection(m));
    out.extend(check_edges(m, pattern, subject));
    out
}

pub fn check_totality(m: &Morphism, pattern: &PortGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    for v in pattern.fo_nodes() {
        if !m.fo.contains_key(&v) {
            out.push(Violation::NotTotal(v.to_string()));
        }
    }
    for v in pattern.ho_nodes() {
        if !m.ho.contains_key(&v) || !m.tr_ports.contains_key(&v) {
            out.push(Violation::NotTotal(v.to_string()));
        }
    }
    for e in pattern.edges() {
        if !m.edges.contains_key(&e) {
            out.push(Violation::NotTotal(e.to_string()));
        }
    }
    let fo_ok = |v: &NodeId| pattern.class(*v) == Some(NodeClass::Fo);
    let ho_ok = |v: &NodeId| pattern.class(*v) == Some(NodeClass::Ho);
    out.extend(
        m.fo.keys()
            .filter(|v| !fo_ok(v))
            .map(|v| Violation::NotInDomain(v.to_string())),
    );
    out.extend(
        m.ho.keys()
            .chain(m.tr_ports.keys())
            .filter(|v| !ho_ok(v))
            .map(|v| Violation::NotInDomain(v.to_string())),
    );
    out.extend(
        m.edges
            .keys()
            .filter(|e| !pattern.has_edge(**e))
            .map(|e| Violation::NotInDomain(e.to_string())),
    );
    out
}

/// Instantiation of first-order variables: constant names are preserved,
/// variable names are replaced consistently by `sigma_n`, which keeps arity
/// and constant port names.
pub fn check_first_order(m: &Morphism, pattern: &PortGraph, subject: &PortGraph) -> Vec<Violation> {
    let sig = pattern.sig();
    let mut out = Vec::new();
    for (&v, &w) in &m.fo {
        let (Some(pl), Some(node)) = (pattern.label(v), subject.node(w)) else {
            out.push(Violation::BadImage { node: v, image: w });
            continue;
        };
        if node.class != NodeClass::Fo {
            out.push(Violation::BadImage { node: v, image: w });
            continue;
        }
        match sig.kind(pl) {
            Some(NameKind::FoConstant) if node.label != pl => out.push(Violation::ConstantName { node: v }),
            Some(NameKind::FoVariable) if m.sigma_n.get(pl) != Some(&node.label) => {
                out.push(Violation::VariableInstantiation {
                    node: v,
                    var: pl.to_string(),
                })
            }
            _ => {}
        }
    }
    for (var, target) in &m.sigma_n {
        let (Some(x), Some(t)) = (sig.get(var), sig.get(target)) else {
            out.push(Violation::BadSubstitution { var: var.clone() });
            continue;
        };
        let preserved = x.kind == NameKind::FoVariable
            && t.kind.is_first_order()
            && x.arity == t.arity
            && x.interface
                .iter()
                .zip(&t.interface)
                .all(|(a, b)| a.kind == PortKind::Variable || a == b);
        if !preserved {
            out.push(Violation::BadSubstitution { var: var.clone() });
            continue;
        }
        let expected: BTreeMap<_, _> = x
            .interface
            .iter()
            .zip(&t.interface)
            .filter(|(a, _)| a.kind == PortKind::Variable)
            .map(|(a, b)| ((var.clone(), a.text.clone()), b.clone()))
            .collect();
        let recorded: BTreeMap<_, _> = m
            .sigma_p
            .iter()
            .filter(|((v, _), _)| v == var)
            .map(|(k, p)| (k.clone(), p.clone()))
            .collect();
        if expected != recorded {
            out.push(Violation::BadPortSubstitution { var: var.clone() });
        }
    }
    for (var, _) in m.sigma_p.keys() {
        if !m.sigma_n.contains_key(var) {
            out.push(Violation::BadPortSubstitution { var: var.clone() });
        }
    }
    out
}

/// Interface of the full sub-graph of `subject` induced by `nodes`.
pub fn image_interface(subject: &PortGraph, nodes: &BTreeSet<NodeId>) -> Vec<PortRef> {
    nodes
        .iter()
        .flat_map(|&n| subject.ports(n))
        .filter(|p| subject.neighbor(*p).is_none_or(|q| !nodes.contains(&q.node)))
        .collect()
}

/// Instantiation of higher-order variables: each image is a full sub-graph
/// whose interface is in bijection with the node's ports, and all images of
/// one variable are syntactically equal compatibly with those bijections.
pub fn check_higher_order(m: &Morphism, pattern: &PortGraph, subject: &PortGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut by_var: BTreeMap<&str, Vec<NodeId>> = BTreeMap::new();
    for (&v, image) in &m.ho {
        let Some(label) = pattern.label(v) else { continue };
        if let Some(&bad) = image.iter().find(|n| !subject.contains(**n)) {
            out.push(Violation::BadImage { node: v, image: bad });
            continue;
        }
        let ports = m.tr_ports.get(&v).map(Vec::as_slice).unwrap_or_default();
        let interface: BTreeSet<_> = image_interface(subject, image).into_iter().collect();
        let targets: BTreeSet<_> = ports.iter().copied().collect();
        if Some(ports.len()) != pattern.degree(v) || targets.len() != ports.len() || targets != interface {
            out.push(Violation::PortTranslation { node: v });
            continue;
        }
        by_var.entry(label).or_default().push(v);
    }
    for (var, nodes) in by_var {
        let Some((&first, rest)) = nodes.split_first() else {
            continue;
        };
        let reference = subject
            .induced_full_subgraph(&m.ho[&first])
            .expect("image nodes checked above");
        for &v in rest {
            let other = subject
                .induced_full_subgraph(&m.ho[&v])
                .expect("image nodes checked above");
            let fixed: Vec<_> = m.tr_ports[&first]
                .iter()
                .copied()
                .zip(m.tr_ports[&v].iter().copied())
                .collect();
            if find_isomorphism(&reference, &other, &fixed).is_none() {
                out.push(Violation::SharedImage {
                    var: var.to_string(),
                    node: v,
                });
            }
        }
    }
    out
}

/// All images are pairwise disjoint.
pub fn check_injection(m: &Morphism) -> Vec<Violation> {
    let mut seen = BTreeSet::new();
    let mut out = BTreeSet::new();
    for n in m.fo.values().chain(m.ho.values().flatten()) {
        if !seen.insert(*n) {
            out.insert(Violation::Injection { node: *n });
        }
    }
    out.into_iter().collect()
}

/// Edge preservation. Edges whose endpoints cannot be translated yet are
/// skipped; totality is checked separately.
pub fn check_edges(m: &Morphism, pattern: &PortGraph, subject: &PortGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    for e in pattern.edges() {
        let (a, b) = e.endpoints();
        let (Some(x), Some(y)) = (m.translate(pattern, a), m.translate(pattern, b)) else {
            continue;
        };
        let image = Edge::new(x, y);
        let recorded_elsewhere = m.edges.get(&e).is_some_and(|img| *img != image);
        if x == y || !subject.has_edge(image) || recorded_elsewhere {
            out.push(Violation::EdgeNotPreserved { edge: e });
        }
    }
    out
}
