use std::path::PathBuf;

use hoport_core::json::JsonError;
use hoport_core::matcher::MatchError;
use hoport_core::oracle::OracleError;
use hoport_core::rewrite::{NormalForm, NormalizeError, RewriteError};
use hoport_core::{GraphError, RuleError, SignatureError};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Load { path: PathBuf, source: JsonError },
    #[error("signature is invalid: {0}")]
    BadSignature(String),
    #[error("graph is invalid: {0}")]
    BadGraph(String),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error("redex {index} requested but only {count} found")]
    NoSuchRedex { index: usize, count: usize },
    #[error("no normal form within {steps} steps")]
    StepLimit { steps: usize, partial: Box<NormalForm> },
    #[error(transparent)]
    Server(#[from] hoport_server::ServeError),
}

impl From<NormalizeError> for CliError {
    fn from(e: NormalizeError) -> Self {
        match e {
            NormalizeError::StepLimitReached { steps, partial } => CliError::StepLimit { steps, partial },
            NormalizeError::Rewrite(e) => CliError::Rewrite(e),
        }
    }
}

fn graph_code(e: &GraphError) -> &'static str {
    match e {
        GraphError::UnknownLabel(_) => "UnknownLabel",
        GraphError::ClassMismatch { .. } => "ClassMismatch",
        GraphError::UnknownNode(_) => "UnknownNode",
        GraphError::DuplicateNode(_) => "DuplicateNode",
        GraphError::PortOutOfRange(_) => "PortOutOfRange",
        GraphError::PortOccupied(_) => "PortOccupied",
        GraphError::SelfPort(_) => "SelfPort",
        GraphError::SignatureMismatch => "SignatureMismatch",
    }
}

fn rule_code(e: &RuleError) -> &'static str {
    match e {
        RuleError::SignatureMismatch => "SignatureMismatch",
        RuleError::IncompleteInterfaceMap(_) => "IncompleteInterfaceMap",
        RuleError::NotInInterface(_) => "NotInInterface",
        RuleError::TargetNotFree(_) => "TargetNotFree",
        RuleError::FreeRhsVariable(_) => "FreeRhsVariable",
    }
}

fn signature_code(e: &SignatureError) -> &'static str {
    match e {
        SignatureError::DuplicateName(_) => "DuplicateName",
        SignatureError::UnknownName(_) => "UnknownName",
        SignatureError::KindInterfaceMismatch { .. } => "KindInterfaceMismatch",
        SignatureError::ArityMismatch { .. } => "ArityMismatch",
        SignatureError::Invalid(_) => "InvalidDeclaration",
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Io { .. } => "Io",
            CliError::Load { source, .. } => match source {
                JsonError::Syntax(_) => "Syntax",
                JsonError::Signature(e) => signature_code(e),
                JsonError::Graph(e) => graph_code(e),
                JsonError::Rule(e) => rule_code(e),
            },
            CliError::BadSignature(_) => "InvalidSignature",
            CliError::BadGraph(_) => "InvalidGraph",
            CliError::Match(MatchError::Timeout { .. }) => "Timeout",
            CliError::Match(MatchError::SignatureMismatch) => "SignatureMismatch",
            CliError::Oracle(OracleError::SubjectTooLarge { .. }) => "SubjectTooLarge",
            CliError::Oracle(OracleError::SignatureMismatch) => "SignatureMismatch",
            CliError::Rewrite(RewriteError::LinearityOverflow(_)) => "LinearityOverflow",
            CliError::Rewrite(_) => "Rewrite",
            CliError::NoSuchRedex { .. } => "NoSuchRedex",
            CliError::StepLimit { .. } => "StepLimitReached",
            CliError::Server(_) => "Server",
        }
    }

    /// The machine-readable report printed on stdout.
    pub fn to_json(&self) -> Value {
        let mut out = json!({ "error": self.code(), "detail": self.to_string() });
        if let CliError::StepLimit { steps, partial } = self {
            out["steps"] = json!(steps);
            out["partial"] = crate::normal_form_json(partial);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hoport_core::{NodeId, PortRef};

    #[test]
    fn codes_and_exit_statuses() {
        let e = CliError::Load {
            path: "g.json".into(),
            source: JsonError::Graph(GraphError::PortOccupied(PortRef::new(NodeId(1), 1))),
        };
        assert_eq!(e.code(), "PortOccupied");
        assert_eq!(e.exit_code(), 1);
        assert_eq!(e.to_json()["detail"], "g.json: port n1.1 is already connected");
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
    }
}
