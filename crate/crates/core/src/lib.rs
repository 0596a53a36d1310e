//! Higher-order port-graph rewriting.
//!
//! The crate provides typed port-graphs whose nodes are either first-order
//! (constant or variable names) or higher-order variables standing for whole
//! sub-graphs, a matcher that enumerates every morphism from a pattern into a
//! subject, a brute-force reference matcher used to validate it, and rule
//! application with duplication and erasure of matched sub-graphs.

pub mod dot;
pub mod exec;
pub mod json;
pub mod matcher;
pub mod oracle;
pub mod portgraph;
pub mod proofnets;
pub mod rewrite;
pub mod signature;

pub use exec::Exec;
pub use matcher::{check_morphism, find_morphisms, matches, MatchError, MatchOptions, Morphism, Violation};
pub use portgraph::{Edge, EqualityWitness, GraphDigest, GraphError, NodeClass, NodeId, PortGraph, PortRef};
pub use rewrite::{
    apply, compile_rule, enumerate_redexes, normalize, Derivation, Redex, RewriteError, Rule, RuleError, Strategy,
};
pub use signature::{NameKind, NodeNameDecl, PSignature, PortKind, PortName, SignatureError};
