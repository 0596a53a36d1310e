use std::collections::BTreeMap;
use std::sync::Arc;

use hoport_core::json::{GraphDoc, JsonError, RuleDoc, SignatureDoc};
use hoport_core::matcher::Morphism;
use hoport_core::rewrite::{enumerate_redexes, Derivation, Redex, Step};
use hoport_core::{apply, Edge, GraphDigest, GraphError, NodeId, PSignature, PortGraph, PortRef, Rule};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;

/// Request body of `POST /sessions`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub signature: SignatureDoc,
    pub graph: GraphDoc,
    #[serde(default)]
    pub rules: Vec<RuleDoc>,
}

/// Request body of `POST /sessions/{id}/apply`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplyRequest {
    pub index: usize,
    pub digest: GraphDigest,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub component: usize,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphView {
    pub digest: GraphDigest,
    pub graph: GraphDoc,
    /// Port names per node, in port order.
    pub ports: BTreeMap<NodeId, Vec<String>>,
    pub interface: Vec<PortRef>,
    pub layout: BTreeMap<NodeId, Layout>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Highlight {
    pub fo: Vec<NodeId>,
    pub ho: BTreeMap<NodeId, Vec<NodeId>>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedexSummary {
    pub index: usize,
    pub rule: String,
    pub matched: Vec<NodeId>,
    pub highlight: Highlight,
    pub morphism: Morphism,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedexList {
    pub digest: GraphDigest,
    pub redexes: Vec<RedexSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diff {
    pub removed: Vec<NodeId>,
    pub added: Vec<NodeId>,
    pub rewired: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub step: usize,
    pub rule: String,
    pub diff: Diff,
    #[serde(flatten)]
    pub view: GraphView,
}

/// Everything needed to rebuild a session.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionDoc {
    pub signature: SignatureDoc,
    pub initial: GraphDoc,
    pub rules: Vec<RuleDoc>,
    pub derivation: Derivation,
}

pub struct Session {
    sig: Arc<PSignature>,
    rules: Vec<Rule>,
    initial: PortGraph,
    current: PortGraph,
    history: Vec<(Step, PortGraph)>,
}

fn load_error(e: JsonError) -> ApiError {
    match e {
        JsonError::Graph(
            GraphError::UnknownLabel(_) | GraphError::ClassMismatch { .. } | GraphError::SignatureMismatch,
        ) => ApiError::SignatureMismatch(e.to_string()),
        e => ApiError::Invalid(e.to_string()),
    }
}

impl Session {
    pub fn create(req: &CreateSession) -> Result<Self, ApiError> {
        let sig = Arc::new(req.signature.build().map_err(load_error)?);
        let problems = sig.validate();
        if !problems.is_empty() {
            let text: Vec<String> = problems.iter().map(ToString::to_string).collect();
            return Err(ApiError::Invalid(text.join("; ")));
        }
        let graph = req.graph.build(sig.clone()).map_err(load_error)?;
        let rules = req
            .rules
            .iter()
            .map(|r| r.build(sig.clone()).map_err(load_error))
            .collect::<Result<Vec<_>, _>>()?;
        let mut names: Vec<&str> = rules.iter().map(|r| r.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(ApiError::Invalid(format!("duplicate rule name `{}`", w[0])));
        }
        Ok(Session {
            sig,
            rules,
            initial: graph.clone(),
            current: graph,
            history: Vec::new(),
        })
    }

    /// Rebuilds a session by replaying its derivation step by step.
    pub fn restore(doc: &SessionDoc) -> Result<Self, ApiError> {
        let mut session = Session::create(&CreateSession {
            signature: doc.signature.clone(),
            graph: doc.initial.clone(),
            rules: doc.rules.clone(),
        })?;
        if session.initial.digest() != doc.derivation.initial {
            return Err(ApiError::Invalid(
                "snapshot derivation does not start at its initial graph".into(),
            ));
        }
        for step in &doc.derivation.steps {
            let rule = session
                .rules
                .iter()
                .find(|r| r.name == step.rule)
                .ok_or_else(|| ApiError::Invalid(format!("unknown rule `{}` in snapshot", step.rule)))?;
            let m = Morphism::assemble(
                &rule.lhs,
                &session.current,
                step.morphism.fo.clone(),
                step.morphism.ho.clone(),
                step.morphism.tr_ports.clone(),
            );
            let next = apply(rule, &m, &session.current).map_err(ApiError::Rewrite)?.graph;
            if next.digest() != step.digest {
                return Err(ApiError::Invalid("snapshot step digest mismatch".into()));
            }
            let prior = std::mem::replace(&mut session.current, next);
            session.history.push((step.clone(), prior));
        }
        Ok(session)
    }

    pub fn to_doc(&self) -> SessionDoc {
        SessionDoc {
            signature: SignatureDoc::of(&self.sig),
            initial: GraphDoc::of(&self.initial),
            rules: self.rules.iter().map(RuleDoc::of).collect(),
            derivation: self.derivation(),
        }
    }

    pub fn current(&self) -> &PortGraph {
        &self.current
    }

    pub fn digest(&self) -> GraphDigest {
        self.current.digest()
    }

    pub fn graph(&self) -> GraphView {
        view(&self.current)
    }

    fn redexes(&self) -> Result<Vec<Redex>, ApiError> {
        Ok(enumerate_redexes(&self.rules, &self.current)?)
    }

    pub fn list_redexes(&self) -> Result<RedexList, ApiError> {
        let redexes = self
            .redexes()?
            .into_iter()
            .enumerate()
            .map(|(index, r)| summarize(index, &self.rules[r.rule], r.morphism))
            .collect();
        Ok(RedexList {
            digest: self.digest(),
            redexes,
        })
    }

    pub fn apply(&mut self, req: &ApplyRequest) -> Result<StepResult, ApiError> {
        let digest = self.digest();
        if req.digest != digest {
            return Err(ApiError::Stale {
                expected: digest,
                found: req.digest.clone(),
            });
        }
        let mut redexes = self.redexes()?;
        if req.index >= redexes.len() {
            return Err(ApiError::BadIndex {
                index: req.index,
                len: redexes.len(),
            });
        }
        let redex = redexes.swap_remove(req.index);
        let out = redex.apply(&self.rules, &self.current).map_err(ApiError::Rewrite)?;
        let rule = self.rules[redex.rule].name.clone();
        let step = Step {
            rule: rule.clone(),
            morphism: redex.morphism,
            digest: out.graph.digest(),
        };
        let prior = std::mem::replace(&mut self.current, out.graph);
        self.history.push((step, prior));
        Ok(StepResult {
            step: self.history.len(),
            rule,
            diff: Diff {
                removed: out.diff.removed,
                added: out.diff.added,
                rewired: out.diff.rewired,
            },
            view: self.graph(),
        })
    }

    pub fn undo(&mut self) -> Result<GraphView, ApiError> {
        let (_, prior) = self.history.pop().ok_or(ApiError::EmptyHistory)?;
        self.current = prior;
        Ok(self.graph())
    }

    pub fn derivation(&self) -> Derivation {
        Derivation {
            initial: self.initial.digest(),
            steps: self.history.iter().map(|(s, _)| s.clone()).collect(),
        }
    }

    /// Replays the history from the initial graph and compares digests.
    pub fn check_replay(&self) -> bool {
        self.derivation()
            .replay(&self.rules, &self.initial)
            .is_ok_and(|g| g.digest() == self.digest())
    }
}

fn summarize(index: usize, rule: &Rule, morphism: Morphism) -> RedexSummary {
    let matched = morphism.image_nodes().into_iter().collect();
    RedexSummary {
        index,
        rule: rule.name.clone(),
        matched,
        highlight: Highlight {
            fo: morphism.fo.values().copied().collect(),
            ho: morphism
                .ho
                .iter()
                .map(|(k, v)| (*k, v.iter().copied().collect()))
                .collect(),
            edges: morphism.edges.values().copied().collect(),
        },
        morphism,
    }
}

pub fn view(g: &PortGraph) -> GraphView {
    let ports = g
        .node_ids()
        .map(|id| {
            let names = g
                .ports(id)
                .map(|p| g.port_name(p).map(|n| n.to_string()).unwrap_or_default())
                .collect();
            (id, names)
        })
        .collect();
    GraphView {
        digest: g.digest(),
        graph: GraphDoc::of(g),
        ports,
        interface: g.interface(),
        layout: layout(g),
    }
}

/// Connected components in order of their smallest node, each ranked by
/// breadth-first distance from that node.
fn layout(g: &PortGraph) -> BTreeMap<NodeId, Layout> {
    let mut out: BTreeMap<NodeId, Layout> = BTreeMap::new();
    let mut component = 0;
    for root in g.node_ids() {
        if out.contains_key(&root) {
            continue;
        }
        out.insert(root, Layout { component, rank: 0 });
        let mut queue = std::collections::VecDeque::from([(root, 0)]);
        while let Some((u, rank)) = queue.pop_front() {
            for p in g.ports(u) {
                let Some(q) = g.neighbor(p) else { continue };
                if let std::collections::btree_map::Entry::Vacant(slot) = out.entry(q.node) {
                    slot.insert(Layout {
                        component,
                        rank: rank + 1,
                    });
                    queue.push_back((q.node, rank + 1));
                }
            }
        }
        component += 1;
    }
    out
}
