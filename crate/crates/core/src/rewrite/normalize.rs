use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{apply, enumerate_redexes_with, RewriteError, Rule};
use crate::exec::Exec;
use crate::matcher::Morphism;
use crate::portgraph::{GraphDigest, PortGraph};

/// One rewrite step: the rule used, the match, and the digest of the result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub rule: String,
    pub morphism: Morphism,
    pub digest: GraphDigest,
}

/// A sequence of rewrite steps from a graph with digest `initial`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub initial: GraphDigest,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("initial graph has digest {found}, derivation starts from {expected}")]
    InitialMismatch { expected: GraphDigest, found: GraphDigest },
    #[error("step {step}: no rule named `{rule}`")]
    UnknownRule { step: usize, rule: String },
    #[error("step {step}: {source}")]
    Rewrite { step: usize, source: RewriteError },
    #[error("step {step}: result has digest {found}, expected {expected}")]
    DigestMismatch {
        step: usize,
        expected: GraphDigest,
        found: GraphDigest,
    },
}

impl Derivation {
    pub fn new(initial: &PortGraph) -> Self {
        Derivation {
            initial: initial.digest(),
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Re-applies every step to `g`, checking each digest, and returns the
    /// final graph.
    pub fn replay(&self, rules: &[Rule], g: &PortGraph) -> Result<PortGraph, ReplayError> {
        let found = g.digest();
        if found != self.initial {
            return Err(ReplayError::InitialMismatch {
                expected: self.initial.clone(),
                found,
            });
        }
        let mut current = g.clone();
        for (i, step) in self.steps.iter().enumerate() {
            let rule = rules
                .iter()
                .find(|r| r.name == step.rule)
                .ok_or_else(|| ReplayError::UnknownRule {
                    step: i,
                    rule: step.rule.clone(),
                })?;
            let m = Morphism::assemble(
                &rule.lhs,
                &current,
                step.morphism.fo.clone(),
                step.morphism.ho.clone(),
                step.morphism.tr_ports.clone(),
            );
            current = apply(rule, &m, &current)
                .map_err(|source| ReplayError::Rewrite { step: i, source })?
                .graph;
            let found = current.digest();
            if found != step.digest {
                return Err(ReplayError::DigestMismatch {
                    step: i,
                    expected: step.digest.clone(),
                    found,
                });
            }
        }
        Ok(current)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Always rewrite the first redex.
    #[default]
    LeftmostFirst,
    /// Follow every redex, breadth first, deduplicating by digest.
    ExhaustiveBfs,
}

/// An irreducible graph and how it was reached.
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub graph: PortGraph,
    pub derivation: Derivation,
}

#[derive(Debug, Clone, Error)]
pub enum NormalizeError {
    /// Rewriting did not terminate within the step budget. `partial` is the
    /// last graph reached.
    #[error("no normal form within {steps} steps")]
    StepLimitReached { steps: usize, partial: Box<NormalForm> },
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

pub fn normalize(
    rules: &[Rule],
    g: &PortGraph,
    strategy: Strategy,
    max_steps: usize,
) -> Result<Vec<NormalForm>, NormalizeError> {
    normalize_with(Exec::default(), rules, g, strategy, max_steps)
}

/// Rewrites `g` until no rule applies. Leftmost-first returns one normal
/// form; exhaustive search returns every distinct one, in discovery order.
pub fn normalize_with(
    exec: Exec,
    rules: &[Rule],
    g: &PortGraph,
    strategy: Strategy,
    max_steps: usize,
) -> Result<Vec<NormalForm>, NormalizeError> {
    let start = NormalForm {
        graph: g.clone(),
        derivation: Derivation::new(g),
    };
    match strategy {
        Strategy::LeftmostFirst => leftmost(rules, start, max_steps).map(|nf| vec![nf]),
        Strategy::ExhaustiveBfs => breadth_first(exec, rules, start, max_steps),
    }
}

fn leftmost(rules: &[Rule], mut state: NormalForm, max_steps: usize) -> Result<NormalForm, NormalizeError> {
    loop {
        let redexes = enumerate_redexes_with(Exec::Sequential, rules, &state.graph).map_err(RewriteError::from)?;
        let Some(redex) = redexes.into_iter().next() else {
            return Ok(state);
        };
        if state.derivation.len() >= max_steps {
            return Err(NormalizeError::StepLimitReached {
                steps: max_steps,
                partial: Box::new(state),
            });
        }
        state = step(rules, &state, redex.rule, redex.morphism)?;
    }
}

fn step(rules: &[Rule], state: &NormalForm, rule: usize, morphism: Morphism) -> Result<NormalForm, RewriteError> {
    let rule = &rules[rule];
    let applied = apply(rule, &morphism, &state.graph)?;
    let mut derivation = state.derivation.clone();
    derivation.steps.push(Step {
        rule: rule.name.clone(),
        morphism,
        digest: applied.graph.digest(),
    });
    Ok(NormalForm {
        graph: applied.graph,
        derivation,
    })
}

fn breadth_first(
    exec: Exec,
    rules: &[Rule],
    start: NormalForm,
    max_steps: usize,
) -> Result<Vec<NormalForm>, NormalizeError> {
    let mut seen: BTreeSet<GraphDigest> = [start.derivation.initial.clone()].into();
    let mut frontier = vec![start];
    let mut normal = Vec::new();
    let mut normal_digests = BTreeSet::new();
    for depth in 0..=max_steps {
        if frontier.is_empty() {
            break;
        }
        // `None` marks an irreducible state.
        let expanded = exec.map(
            frontier,
            |state| -> Result<(NormalForm, Option<Vec<NormalForm>>), RewriteError> {
                let redexes = enumerate_redexes_with(Exec::Sequential, rules, &state.graph)?;
                if redexes.is_empty() {
                    return Ok((state, None));
                }
                if depth == max_steps {
                    return Ok((state, Some(Vec::new())));
                }
                let children = redexes
                    .into_iter()
                    .map(|r| step(rules, &state, r.rule, r.morphism))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((state, Some(children)))
            },
        );
        let mut next = Vec::new();
        for result in expanded {
            match result? {
                (state, None) => {
                    if normal_digests.insert(state.graph.digest()) {
                        normal.push(state);
                    }
                }
                (state, Some(_)) if depth == max_steps => {
                    return Err(NormalizeError::StepLimitReached {
                        steps: max_steps,
                        partial: Box::new(state),
                    });
                }
                (_, Some(children)) => {
                    for child in children {
                        let digest = child.derivation.steps.last().expect("one step taken").digest.clone();
                        if seen.insert(digest) {
                            next.push(child);
                        }
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(normal)
}
