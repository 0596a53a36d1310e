//! Rewrite rules, their application, and normalisation.

mod apply;
mod normalize;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::matcher::{MatchError, Violation};
use crate::portgraph::{NodeId, PortGraph, PortRef};
use crate::signature::NameKind;

pub use apply::{
    apply, enumerate_redexes, enumerate_redexes_with, instantiate_rhs, Applied, Fragment, Redex, RewriteDiff,
};
pub use normalize::{normalize, normalize_with, Derivation, NormalForm, NormalizeError, ReplayError, Step, Strategy};

/// A rule `lhs => rhs`. `interface_map` sends every interface port of the
/// left-hand side to a set of interface ports of the right-hand side; an
/// empty set deletes the port.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub lhs: PortGraph,
    pub rhs: PortGraph,
    pub interface_map: BTreeMap<PortRef, BTreeSet<PortRef>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("left- and right-hand sides use different signatures")]
    SignatureMismatch,
    #[error("interface port {0} of the left-hand side has no image")]
    IncompleteInterfaceMap(PortRef),
    #[error("{0} is not an interface port of the left-hand side")]
    NotInInterface(PortRef),
    #[error("{0} is not an interface port of the right-hand side")]
    TargetNotFree(PortRef),
    #[error("variable `{0}` occurs on the right but not on the left")]
    FreeRhsVariable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("morphism no longer matches: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    StaleMorphism(Vec<Violation>),
    #[error("reconnection would attach a second edge to port {0}")]
    LinearityOverflow(PortRef),
    #[error("variable `{0}` has no instantiation")]
    UnboundVariable(String),
    #[error("rule index {0} is out of range")]
    UnknownRule(usize),
    #[error(transparent)]
    Match(#[from] MatchError),
}

/// Validates and builds a rule.
pub fn compile_rule(
    lhs: PortGraph,
    rhs: PortGraph,
    interface_map: BTreeMap<PortRef, BTreeSet<PortRef>>,
    name: impl Into<String>,
) -> Result<Rule, RuleError> {
    if !lhs.same_signature(&rhs) {
        return Err(RuleError::SignatureMismatch);
    }
    let lhs_interface: BTreeSet<PortRef> = lhs.interface().into_iter().collect();
    let rhs_interface: BTreeSet<PortRef> = rhs.interface().into_iter().collect();
    if let Some(p) = lhs_interface.iter().find(|p| !interface_map.contains_key(p)) {
        return Err(RuleError::IncompleteInterfaceMap(*p));
    }
    for (from, to) in &interface_map {
        if !lhs_interface.contains(from) {
            return Err(RuleError::NotInInterface(*from));
        }
        if let Some(t) = to.iter().find(|t| !rhs_interface.contains(t)) {
            return Err(RuleError::TargetNotFree(*t));
        }
    }
    let sig = lhs.sig();
    let lhs_labels: BTreeSet<&str> = lhs.nodes().map(|(_, n)| n.label.as_str()).collect();
    for (_, node) in rhs.nodes() {
        let variable = sig.kind(&node.label).is_some_and(NameKind::is_variable);
        if variable && !lhs_labels.contains(node.label.as_str()) {
            return Err(RuleError::FreeRhsVariable(node.label.clone()));
        }
    }
    Ok(Rule {
        name: name.into(),
        lhs,
        rhs,
        interface_map,
    })
}

impl Rule {
    /// The first left-hand node carrying `label`, in id order.
    pub(crate) fn lhs_occurrence(&self, label: &str) -> Option<NodeId> {
        self.lhs.nodes().find(|(_, n)| n.label == label).map(|(id, _)| id)
    }
}
