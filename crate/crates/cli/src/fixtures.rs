use std::path::Path;

use hoport_core::json::{graph_to_string, rule_to_string, signature_to_string};
use hoport_core::proofnets::*;

use crate::error::CliError;

/// Every fixture file as `(relative path, contents)`. Each directory holds
/// the `signature.json` its graphs and rules are read with.
pub fn files() -> Vec<(String, String)> {
    let mut out = vec![
        (
            "proof/signature.json".to_string(),
            signature_to_string(&proof_signature(1)),
        ),
        (
            "proof/example_proof.json".to_string(),
            graph_to_string(&example_proof()),
        ),
        (
            "family/signature.json".to_string(),
            signature_to_string(&family_signature()),
        ),
        ("family/G.json".to_string(), graph_to_string(&family_subject())),
        (
            "beta/signature.json".to_string(),
            signature_to_string(&beta_signature()),
        ),
        ("beta/G.json".to_string(), graph_to_string(&beta_subject())),
        ("beta/L.json".to_string(), graph_to_string(&beta_pattern())),
        (
            "beta/L_arity2.json".to_string(),
            graph_to_string(&beta_pattern_arity2()),
        ),
        (
            "beta/duplication_subject.json".to_string(),
            graph_to_string(&duplication_subject()),
        ),
        (
            "beta/erasure_subject.json".to_string(),
            graph_to_string(&erasure_subject()),
        ),
        ("beta/rules/beta.json".to_string(), rule_to_string(&beta_rule())),
    ];
    for (i, l) in family_patterns().iter().enumerate() {
        out.push((format!("family/L{}.json", i + 1), graph_to_string(l)));
    }
    for rule in [duplication_rule(), erasure_rule(), weakening_removal_rule()] {
        out.push((format!("beta/structural/{}.json", rule.name), rule_to_string(&rule)));
    }
    out.sort();
    out
}

pub fn write(dir: &Path) -> Result<Vec<String>, CliError> {
    let mut written = Vec::new();
    for (rel, text) in files() {
        let path = dir.join(&rel);
        let io = |source| CliError::Io {
            path: path.clone(),
            source,
        };
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io)?;
        }
        std::fs::write(&path, text).map_err(io)?;
        written.push(rel);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_directory_has_a_signature() {
        let files = files();
        for (rel, _) in &files {
            let top = rel.split('/').next().unwrap();
            assert!(
                files.iter().any(|(r, _)| *r == format!("{top}/signature.json")),
                "{rel}"
            );
        }
    }
}
