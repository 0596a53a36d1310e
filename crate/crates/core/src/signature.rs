//! P-signatures: the typing environment for port-graphs.
//!
//! A signature declares every node name that may label a node, together with
//! its class (constant first-order, variable first-order or higher-order
//! variable), its arity and the ordered list of its port names. Position `i`
//! (1-based) of the interface is the name of physical port `i`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Whether a port name is a constant or a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortKind {
    Constant,
    Variable,
}

/// A port name. The kind is part of the identity, so the constant `a` and the
/// variable `a` are different names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PortName {
    #[serde(rename = "name")]
    pub text: String,
    pub kind: PortKind,
}

impl PortName {
    pub fn constant(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            kind: PortKind::Constant,
        }
    }

    pub fn variable(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            kind: PortKind::Variable,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.kind == PortKind::Constant
    }
}

impl fmt::Display for PortName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PortKind::Constant => write!(f, "{}", self.text),
            PortKind::Variable => write!(f, "?{}", self.text),
        }
    }
}

/// The three disjoint classes of node names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NameKind {
    FoConstant,
    FoVariable,
    HoVariable,
}

impl NameKind {
    pub fn is_first_order(self) -> bool {
        !matches!(self, NameKind::HoVariable)
    }

    pub fn is_variable(self) -> bool {
        !matches!(self, NameKind::FoConstant)
    }
}

impl fmt::Display for NameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NameKind::FoConstant => "fo_constant",
            NameKind::FoVariable => "fo_variable",
            NameKind::HoVariable => "ho_variable",
        })
    }
}

/// Declaration of one node name.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeNameDecl {
    pub name: String,
    pub kind: NameKind,
    pub arity: usize,
    pub interface: Vec<PortName>,
}

impl NodeNameDecl {
    /// A constant first-order name whose ports are all constants.
    pub fn fo_constant(name: impl Into<String>, ports: &[&str]) -> Self {
        Self::new(
            name,
            NameKind::FoConstant,
            ports.iter().map(|p| PortName::constant(*p)).collect(),
        )
    }

    /// A variable first-order name; ports may mix constants and variables.
    pub fn fo_variable(name: impl Into<String>, ports: Vec<PortName>) -> Self {
        Self::new(name, NameKind::FoVariable, ports)
    }

    /// A higher-order variable name whose ports are all variables.
    pub fn ho_variable(name: impl Into<String>, ports: &[&str]) -> Self {
        Self::new(
            name,
            NameKind::HoVariable,
            ports.iter().map(|p| PortName::variable(*p)).collect(),
        )
    }

    /// Builds a declaration whose arity is the interface length.
    pub fn new(name: impl Into<String>, kind: NameKind, interface: Vec<PortName>) -> Self {
        Self {
            name: name.into(),
            kind,
            arity: interface.len(),
            interface,
        }
    }

    fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.name.is_empty() {
            out.push(Diagnostic::EmptyIdentifier {
                name: self.name.clone(),
            });
        }
        if self.interface.len() != self.arity {
            out.push(Diagnostic::ArityMismatch {
                name: self.name.clone(),
                arity: self.arity,
                ports: self.interface.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for port in &self.interface {
            if port.text.is_empty() {
                out.push(Diagnostic::EmptyIdentifier {
                    name: self.name.clone(),
                });
            }
            if !seen.insert(port) {
                out.push(Diagnostic::NonInjectiveInterface {
                    name: self.name.clone(),
                    port: port.to_string(),
                });
            }
            let allowed = match self.kind {
                NameKind::FoConstant => port.kind == PortKind::Constant,
                NameKind::HoVariable => port.kind == PortKind::Variable,
                NameKind::FoVariable => true,
            };
            if !allowed {
                out.push(Diagnostic::KindInterfaceMismatch {
                    name: self.name.clone(),
                    kind: self.kind,
                    port: port.to_string(),
                });
            }
        }
        out
    }
}

/// One violated clause of the signature definition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Error)]
pub enum Diagnostic {
    #[error("`{name}`: identifier must be non-empty")]
    EmptyIdentifier { name: String },
    #[error("`{name}`: declared arity {arity} but {ports} port names")]
    ArityMismatch { name: String, arity: usize, ports: usize },
    #[error("`{name}`: port name {port} occurs more than once")]
    NonInjectiveInterface { name: String, port: String },
    #[error("`{name}`: port {port} is not allowed in a {kind} interface")]
    KindInterfaceMismatch { name: String, kind: NameKind, port: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("node name `{0}` is already declared")]
    DuplicateName(String),
    #[error("unknown node name `{0}`")]
    UnknownName(String),
    #[error("`{name}`: port {port} is not allowed in a {kind} interface")]
    KindInterfaceMismatch { name: String, kind: NameKind, port: String },
    #[error("`{name}`: declared arity {arity} but {ports} port names")]
    ArityMismatch { name: String, arity: usize, ports: usize },
    #[error("invalid declaration: {0}")]
    Invalid(Diagnostic),
}

impl From<Diagnostic> for SignatureError {
    fn from(d: Diagnostic) -> Self {
        match d {
            Diagnostic::ArityMismatch { name, arity, ports } => SignatureError::ArityMismatch { name, arity, ports },
            Diagnostic::KindInterfaceMismatch { name, kind, port } => {
                SignatureError::KindInterfaceMismatch { name, kind, port }
            }
            other => SignatureError::Invalid(other),
        }
    }
}

/// A p-signature. Immutable once built; `declare` returns an extended copy.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PSignature {
    decls: BTreeMap<String, NodeNameDecl>,
}

impl PSignature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns a copy of `self` extended with `decl`.
    pub fn declare(&self, decl: NodeNameDecl) -> Result<Self, SignatureError> {
        let mut next = self.clone();
        next.insert(decl)?;
        Ok(next)
    }

    /// In-place variant of [`PSignature::declare`], for building signatures.
    pub fn insert(&mut self, decl: NodeNameDecl) -> Result<(), SignatureError> {
        if self.decls.contains_key(&decl.name) {
            return Err(SignatureError::DuplicateName(decl.name));
        }
        if let Some(first) = decl.diagnostics().into_iter().next() {
            return Err(first.into());
        }
        self.decls.insert(decl.name.clone(), decl);
        Ok(())
    }

    /// Builds a signature without checking the declarations, so that
    /// malformed input can be reported through [`PSignature::validate`].
    /// Later duplicates replace earlier ones.
    pub fn from_decls_unchecked(decls: impl IntoIterator<Item = NodeNameDecl>) -> Self {
        Self {
            decls: decls.into_iter().map(|d| (d.name.clone(), d)).collect(),
        }
    }

    /// Returns one diagnostic per violated clause; empty iff well-formed.
    pub fn validate(&self) -> Vec<Diagnostic> {
        self.decls.values().flat_map(|d| d.diagnostics()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&NodeNameDecl> {
        self.decls.get(name)
    }

    pub fn lookup(&self, name: &str) -> Result<&NodeNameDecl, SignatureError> {
        self.get(name)
            .ok_or_else(|| SignatureError::UnknownName(name.to_string()))
    }

    pub fn interface_of(&self, name: &str) -> Result<&[PortName], SignatureError> {
        self.lookup(name).map(|d| d.interface.as_slice())
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.get(name).map(|d| d.arity)
    }

    pub fn kind(&self, name: &str) -> Option<NameKind> {
        self.get(name).map(|d| d.kind)
    }

    /// Name of physical port `port` (1-based) of nodes labelled `name`.
    pub fn port_name(&self, name: &str, port: usize) -> Option<&PortName> {
        let decl = self.get(name)?;
        port.checked_sub(1).and_then(|i| decl.interface.get(i))
    }

    pub fn decls(&self) -> impl Iterator<Item = &NodeNameDecl> {
        self.decls.values()
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    /// True if every declaration of `self` appears unchanged in `other`.
    pub fn is_subsignature_of(&self, other: &PSignature) -> bool {
        self.decls.values().all(|d| other.get(&d.name) == Some(d))
    }
}
