use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use super::morphism::Morphism;
use crate::portgraph::{NodeClass, NodeId, PortGraph, PortRef};
use crate::signature::{NameKind, PSignature, PortKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchOptions {
    /// Stop after this many solutions.
    pub max_solutions: Option<usize>,
    /// Emit one morphism per bijection of unanchored higher-order ports;
    /// when false, only the first morphism found for each node-level image.
    pub enumerate_ho_port_bijections: bool,
    pub timeout_ms: Option<u64>,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions {
            max_solutions: None,
            enumerate_ho_port_bijections: true,
            timeout_ms: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("pattern and subject use different signatures")]
    SignatureMismatch,
    #[error("matching timed out after {found} solutions")]
    Timeout { found: usize },
}

/// State of a subject node during the search. `Hidden(k)` means the node
/// belongs to the image of the `k`-th higher-order pattern node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Availability {
    Free,
    UsedFo,
    Hidden(usize),
}

type Port = (usize, usize);

#[derive(Debug)]
struct SubjectIndex {
    ids: Vec<NodeId>,
    pos: BTreeMap<NodeId, usize>,
    labels: Vec<String>,
    classes: Vec<NodeClass>,
    // Neighbour of port `i + 1` of each node, as (node index, port).
    links: Vec<Vec<Option<Port>>>,
}

impl SubjectIndex {
    fn new(g: &PortGraph) -> Self {
        let ids: Vec<NodeId> = g.node_ids().collect();
        let pos: BTreeMap<_, _> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let links = ids
            .iter()
            .map(|&id| {
                g.ports(id)
                    .map(|p| g.neighbor(p).map(|q| (pos[&q.node], q.port)))
                    .collect()
            })
            .collect();
        SubjectIndex {
            labels: ids
                .iter()
                .map(|id| g.label(*id).unwrap_or_default().to_string())
                .collect(),
            classes: ids.iter().map(|id| g.class(*id).unwrap_or(NodeClass::Fo)).collect(),
            ids,
            pos,
            links,
        }
    }

    fn link(&self, (node, port): Port) -> Option<Port> {
        self.links[node][port - 1]
    }

    fn port_ref(&self, (node, port): Port) -> PortRef {
        PortRef::new(self.ids[node], port)
    }
}

#[derive(Debug)]
struct PatternIndex {
    fo: Vec<NodeId>,
    ho: Vec<NodeId>,
    fo_labels: Vec<String>,
    ho_labels: Vec<String>,
    ho_arity: Vec<usize>,
    ho_pos: BTreeMap<NodeId, usize>,
    // Edges by endpoint class; ports are (slot, port).
    fo_fo: Vec<(Port, Port)>,
    fo_ho: Vec<(Port, Port)>,
    ho_ho: Vec<(Port, Port)>,
}

impl PatternIndex {
    fn new(g: &PortGraph) -> Self {
        let sig = g.sig();
        let fo: Vec<NodeId> = g.fo_nodes().collect();
        let ho: Vec<NodeId> = g.ho_nodes().collect();
        let fo_pos: BTreeMap<_, _> = fo.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let ho_pos: BTreeMap<_, _> = ho.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let mut fo_fo = Vec::new();
        let mut fo_ho = Vec::new();
        let mut ho_ho = Vec::new();
        for e in g.edges() {
            let (a, b) = e.endpoints();
            match (fo_pos.get(&a.node), fo_pos.get(&b.node)) {
                (Some(&x), Some(&y)) => fo_fo.push(((x, a.port), (y, b.port))),
                (Some(&x), None) => fo_ho.push(((x, a.port), (ho_pos[&b.node], b.port))),
                (None, Some(&y)) => fo_ho.push(((y, b.port), (ho_pos[&a.node], a.port))),
                (None, None) => ho_ho.push(((ho_pos[&a.node], a.port), (ho_pos[&b.node], b.port))),
            }
        }
        let fo_labels: Vec<String> = fo
            .iter()
            .map(|id| g.label(*id).unwrap_or_default().to_string())
            .collect();
        let constants = |&(a, b): &(Port, Port)| {
            [a, b]
                .iter()
                .filter(|(s, _)| sig.kind(&fo_labels[*s]) == Some(NameKind::FoConstant))
                .count()
        };
        fo_fo.sort_by_key(|e| std::cmp::Reverse(constants(e)));
        let ho_labels: Vec<String> = ho
            .iter()
            .map(|id| g.label(*id).unwrap_or_default().to_string())
            .collect();
        PatternIndex {
            ho_arity: ho_labels.iter().map(|l| sig.arity(l).unwrap_or(0)).collect(),
            fo,
            ho,
            fo_labels,
            ho_labels,
            ho_pos,
            fo_fo,
            fo_ho,
            ho_ho,
        }
    }
}

/// Partial matching state: images built so far, the availability of every
/// subject node, and the name substitution.
#[derive(Debug, Clone)]
pub struct MatchContext {
    subject: Arc<SubjectIndex>,
    pattern: Arc<PatternIndex>,
    fo_image: Vec<Option<usize>>,
    ho_image: Vec<BTreeSet<usize>>,
    anchors: Vec<Vec<Option<Port>>>,
    state: Vec<Availability>,
    sigma: BTreeMap<String, String>,
    free_ports: Vec<usize>,
}

impl MatchContext {
    pub fn new(pattern: &PortGraph, subject: &PortGraph) -> Self {
        let subject = Arc::new(SubjectIndex::new(subject));
        let pattern = Arc::new(PatternIndex::new(pattern));
        MatchContext {
            fo_image: vec![None; pattern.fo.len()],
            ho_image: vec![BTreeSet::new(); pattern.ho.len()],
            anchors: pattern.ho_arity.iter().map(|&a| vec![None; a]).collect(),
            state: vec![Availability::Free; subject.ids.len()],
            sigma: BTreeMap::new(),
            free_ports: vec![0; pattern.ho.len()],
            subject,
            pattern,
        }
    }

    pub fn availability(&self, node: NodeId) -> Option<Availability> {
        self.subject.pos.get(&node).map(|&i| self.state[i])
    }

    /// Subject nodes currently in the image of the higher-order node `ho`.
    pub fn image(&self, ho: NodeId) -> BTreeSet<NodeId> {
        self.pattern
            .ho_pos
            .get(&ho)
            .map(|&k| self.ho_image[k].iter().map(|&i| self.subject.ids[i]).collect())
            .unwrap_or_default()
    }

    /// Adds a free subject node to the image of `ho`; false if either node
    /// is unknown or the subject node is not free.
    pub fn add_to_image(&mut self, ho: NodeId, node: NodeId) -> bool {
        match (self.pattern.ho_pos.get(&ho), self.subject.pos.get(&node)) {
            (Some(&k), Some(&u)) if self.state[u] == Availability::Free => {
                self.include(k, u);
                true
            }
            _ => false,
        }
    }

    /// Number of free ports of the full sub-graph induced by the image of
    /// `ho`, maintained as nodes are added.
    pub fn count_free_ports_incremental(&self, ho: NodeId) -> usize {
        self.pattern.ho_pos.get(&ho).map_or(0, |&k| self.free_ports[k])
    }

    fn include(&mut self, k: usize, u: usize) {
        let mut count = self.free_ports[k] as isize;
        for link in &self.subject.links[u] {
            match link {
                Some((w, _)) if *w == u => {}
                Some((w, _)) if self.ho_image[k].contains(w) => count -= 1,
                _ => count += 1,
            }
        }
        self.free_ports[k] = count as usize;
        self.ho_image[k].insert(u);
        self.state[u] = Availability::Hidden(k);
    }

    fn open_for(&self, k: usize, u: usize) -> bool {
        matches!(self.state[u], Availability::Free) || self.state[u] == Availability::Hidden(k)
    }
}

/// Whether first-order node name `target` is an instance of `pattern_name`
/// under `sigma`, without binding.
fn compatible(sig: &PSignature, sigma: &BTreeMap<String, String>, pattern_name: &str, target: &str) -> bool {
    let Some(decl) = sig.get(pattern_name) else {
        return false;
    };
    match decl.kind {
        NameKind::FoConstant => pattern_name == target,
        NameKind::FoVariable => match sigma.get(pattern_name) {
            Some(bound) => bound == target,
            None => sig.get(target).is_some_and(|t| {
                t.kind.is_first_order()
                    && t.arity == decl.arity
                    && decl
                        .interface
                        .iter()
                        .zip(&t.interface)
                        .all(|(a, b)| a.kind == PortKind::Variable || a == b)
            }),
        },
        NameKind::HoVariable => false,
    }
}

type NodeImage = (BTreeMap<NodeId, NodeId>, BTreeMap<NodeId, BTreeSet<NodeId>>);

struct Search<'a, F> {
    pattern: &'a PortGraph,
    subject: &'a PortGraph,
    opts: &'a MatchOptions,
    visit: F,
    deadline: Option<Instant>,
    ticks: u64,
    timed_out: bool,
    // Node-level images already emitted, when only one bijection is wanted.
    emitted: BTreeSet<NodeImage>,
}

impl<F: FnMut(Morphism) -> ControlFlow<()>> Search<'_, F> {
    fn tick(&mut self) -> ControlFlow<()> {
        self.ticks += 1;
        if self.ticks.is_multiple_of(256) && self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.timed_out = true;
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    }

    fn map_fo(&self, ctx: &mut MatchContext, v: usize, x: usize) -> bool {
        match ctx.fo_image[v] {
            Some(y) => return y == x,
            None if ctx.state[x] != Availability::Free => return false,
            None => {}
        }
        let s = &ctx.subject;
        let name = &ctx.pattern.fo_labels[v];
        if s.classes[x] != NodeClass::Fo || !compatible(self.pattern.sig(), &ctx.sigma, name, &s.labels[x]) {
            return false;
        }
        if self.pattern.sig().kind(name) == Some(NameKind::FoVariable) {
            ctx.sigma.insert(name.clone(), s.labels[x].clone());
        }
        ctx.fo_image[v] = Some(x);
        ctx.state[x] = Availability::UsedFo;
        true
    }

    /// Stage 1: first-order edges, extending from mapped endpoints where
    /// possible.
    fn fo_fo(&mut self, ctx: MatchContext, done: Vec<bool>) -> ControlFlow<()> {
        self.tick()?;
        let edges = &ctx.pattern.fo_fo;
        let pending = || (0..edges.len()).filter(|&i| !done[i]);
        let mapped = |(v, _): Port| ctx.fo_image[v].is_some();
        let next = pending()
            .find(|&i| mapped(edges[i].0) || mapped(edges[i].1))
            .or_else(|| pending().next());
        let Some(i) = next else {
            return self.fo_rest(ctx);
        };
        let mut done = done;
        done[i] = true;
        let (a, b) = edges[i];
        let (a, b) = if mapped(a) || !mapped(b) { (a, b) } else { (b, a) };
        if let Some(x) = ctx.fo_image[a.0] {
            let mut ctx = ctx;
            let link = ctx.subject.links[x][a.1 - 1];
            match link {
                Some((w, port)) if port == b.1 && self.map_fo(&mut ctx, b.0, w) => self.fo_fo(ctx, done),
                _ => ControlFlow::Continue(()),
            }
        } else {
            for x in 0..ctx.subject.ids.len() {
                let Some((w, port)) = ctx.subject.links[x].get(a.1 - 1).copied().flatten() else {
                    continue;
                };
                if port != b.1 {
                    continue;
                }
                let mut next = ctx.clone();
                if self.map_fo(&mut next, a.0, x) && self.map_fo(&mut next, b.0, w) {
                    self.fo_fo(next, done.clone())?;
                }
            }
            ControlFlow::Continue(())
        }
    }

    /// Stage 2: first-order nodes without first-order neighbours.
    fn fo_rest(&mut self, ctx: MatchContext) -> ControlFlow<()> {
        self.tick()?;
        let Some(v) = ctx.fo_image.iter().position(Option::is_none) else {
            return self.fo_ho(ctx);
        };
        for x in 0..ctx.subject.ids.len() {
            let mut next = ctx.clone();
            if self.map_fo(&mut next, v, x) {
                self.fo_rest(next)?;
            }
        }
        ControlFlow::Continue(())
    }

    /// Fixes port `q` of higher-order slot `k` to subject port `s`, adding
    /// the node of `s` to the image.
    fn anchor(ctx: &mut MatchContext, k: usize, q: usize, s: Port) -> bool {
        if let Some(a) = ctx.anchors[k][q - 1] {
            return a == s;
        }
        if ctx.anchors[k].contains(&Some(s)) || !ctx.open_for(k, s.0) {
            return false;
        }
        if ctx.state[s.0] == Availability::Free {
            ctx.include(k, s.0);
        }
        ctx.anchors[k][q - 1] = Some(s);
        true
    }

    /// Stage 3: edges between first- and higher-order nodes anchor ports.
    fn fo_ho(&mut self, mut ctx: MatchContext) -> ControlFlow<()> {
        let pattern = Arc::clone(&ctx.pattern);
        for &((v, p), (k, q)) in &pattern.fo_ho {
            let x = ctx.fo_image[v].expect("first-order nodes are mapped");
            match ctx.subject.link((x, p)) {
                Some(s) if Self::anchor(&mut ctx, k, q, s) => {}
                _ => return ControlFlow::Continue(()),
            }
        }
        let done = vec![false; pattern.ho_ho.len()];
        self.ho_ho(ctx, done)
    }

    /// Stage 4: edges between higher-order nodes, propagated from anchored
    /// ends or seeded by enumerating subject edges.
    fn ho_ho(&mut self, mut ctx: MatchContext, mut done: Vec<bool>) -> ControlFlow<()> {
        self.tick()?;
        let pattern = Arc::clone(&ctx.pattern);
        let edges = &pattern.ho_ho;
        loop {
            let anchored = |(k, q): Port, ctx: &MatchContext| ctx.anchors[k][q - 1];
            let next = (0..edges.len())
                .filter(|&i| !done[i])
                .find(|&i| anchored(edges[i].0, &ctx).is_some() || anchored(edges[i].1, &ctx).is_some());
            let Some(i) = next else { break };
            done[i] = true;
            let (a, b) = edges[i];
            if a.0 == b.0 {
                return ControlFlow::Continue(());
            }
            let (a, b) = if anchored(a, &ctx).is_some() { (a, b) } else { (b, a) };
            let sa = anchored(a, &ctx).expect("chosen for its anchor");
            match ctx.subject.link(sa) {
                Some(sb) if Self::anchor(&mut ctx, b.0, b.1, sb) => {}
                _ => return ControlFlow::Continue(()),
            }
        }
        let Some(i) = done.iter().position(|d| !d) else {
            let n = ctx.state.len();
            return self.extend(ctx, 0, vec![false; n]);
        };
        done[i] = true;
        let (a, b) = edges[i];
        if a.0 == b.0 {
            return ControlFlow::Continue(());
        }
        for x in 0..ctx.subject.ids.len() {
            if !ctx.open_for(a.0, x) {
                continue;
            }
            for (port, link) in ctx.subject.links[x].iter().enumerate() {
                let Some(sb) = *link else { continue };
                let mut next = ctx.clone();
                if Self::anchor(&mut next, a.0, a.1, (x, port + 1)) && Self::anchor(&mut next, b.0, b.1, sb) {
                    self.ho_ho(next, done.clone())?;
                }
            }
        }
        ControlFlow::Continue(())
    }

    /// Stage 5: grow the image of slot `k` by including or excluding one
    /// available node at a time, frontier nodes first.
    fn extend(&mut self, ctx: MatchContext, k: usize, mut excluded: Vec<bool>) -> ControlFlow<()> {
        self.tick()?;
        if k == ctx.ho_image.len() {
            return self.finish(ctx);
        }
        let arity = ctx.pattern.ho_arity[k];
        let available = |ctx: &MatchContext, u: usize| ctx.state[u] == Availability::Free && !excluded[u];
        // Ports that stay in the interface whatever is added later.
        let committed = ctx.ho_image[k]
            .iter()
            .flat_map(|&u| ctx.subject.links[u].iter())
            .filter(|link| match link {
                None => true,
                Some((w, _)) => !ctx.ho_image[k].contains(w) && !available(&ctx, *w),
            })
            .count();
        if committed > arity {
            return ControlFlow::Continue(());
        }
        let frontier = ctx.ho_image[k]
            .iter()
            .flat_map(|&u| ctx.subject.links[u].iter().flatten())
            .map(|&(w, _)| w)
            .filter(|&w| available(&ctx, w))
            .min();
        let candidate = frontier.or_else(|| (0..ctx.state.len()).find(|&u| available(&ctx, u)));
        let Some(u) = candidate else {
            if ctx.free_ports[k] != arity {
                return ControlFlow::Continue(());
            }
            let n = ctx.state.len();
            return self.extend(ctx, k + 1, vec![false; n]);
        };
        let mut with = ctx.clone();
        with.include(k, u);
        self.extend(with, k, excluded.clone())?;
        excluded[u] = true;
        self.extend(ctx, k, excluded)
    }

    /// Stage 6: complete the port translations and check repeated
    /// higher-order variables.
    fn finish(&mut self, ctx: MatchContext) -> ControlFlow<()> {
        let s = Arc::clone(&ctx.subject);
        let mut choices: Vec<Vec<Vec<Port>>> = Vec::new();
        for k in 0..ctx.ho_image.len() {
            let image = &ctx.ho_image[k];
            let anchors = &ctx.anchors[k];
            let interface: Vec<Port> = image
                .iter()
                .flat_map(|&u| (1..=s.links[u].len()).map(move |p| (u, p)))
                .filter(|&port| s.link(port).is_none_or(|(w, _)| !image.contains(&w)))
                .collect();
            if interface.len() != anchors.len() {
                return ControlFlow::Continue(());
            }
            let rest: Vec<Port> = interface.into_iter().filter(|p| !anchors.contains(&Some(*p))).collect();
            let orders = if self.opts.enumerate_ho_port_bijections {
                permutations(&rest)
            } else {
                vec![rest]
            };
            choices.push(
                orders
                    .into_iter()
                    .map(|order| {
                        let mut it = order.into_iter();
                        anchors
                            .iter()
                            .map(|a| a.unwrap_or_else(|| it.next().expect("sizes agree")))
                            .collect()
                    })
                    .collect(),
            );
        }
        let mut picked = Vec::with_capacity(choices.len());
        self.emit_product(&ctx, &choices, &mut picked)
    }

    fn emit_product(
        &mut self,
        ctx: &MatchContext,
        choices: &[Vec<Vec<Port>>],
        picked: &mut Vec<usize>,
    ) -> ControlFlow<()> {
        let k = picked.len();
        if k == choices.len() {
            let s = &ctx.subject;
            let fo = ctx
                .pattern
                .fo
                .iter()
                .zip(&ctx.fo_image)
                .map(|(v, x)| (*v, s.ids[x.expect("complete")]))
                .collect();
            let ho = ctx
                .pattern
                .ho
                .iter()
                .zip(&ctx.ho_image)
                .map(|(v, img)| (*v, img.iter().map(|&i| s.ids[i]).collect()))
                .collect();
            let tr_ports = ctx
                .pattern
                .ho
                .iter()
                .zip(picked.iter())
                .enumerate()
                .map(|(k, (v, &c))| (*v, choices[k][c].iter().map(|&p| s.port_ref(p)).collect()))
                .collect();
            let m = Morphism::assemble(self.pattern, self.subject, fo, ho, tr_ports);
            if !shared_images_agree(&m, &ctx.pattern, self.subject) {
                return ControlFlow::Continue(());
            }
            if !self.opts.enumerate_ho_port_bijections && !self.emitted.insert((m.fo.clone(), m.ho.clone())) {
                return ControlFlow::Continue(());
            }
            return (self.visit)(m);
        }
        for c in 0..choices[k].len() {
            picked.push(c);
            let flow = self.emit_product(ctx, choices, picked);
            picked.pop();
            flow?;
        }
        ControlFlow::Continue(())
    }
}

fn shared_images_agree(m: &Morphism, pattern: &PatternIndex, subject: &PortGraph) -> bool {
    let mut first: BTreeMap<&str, NodeId> = BTreeMap::new();
    for (v, label) in pattern.ho.iter().zip(&pattern.ho_labels) {
        let Some(&r) = first.get(label.as_str()) else {
            first.insert(label, *v);
            continue;
        };
        let (Ok(a), Ok(b)) = (
            subject.induced_full_subgraph(&m.ho[&r]),
            subject.induced_full_subgraph(&m.ho[v]),
        ) else {
            return false;
        };
        let fixed: Vec<_> = m.tr_ports[&r]
            .iter()
            .copied()
            .zip(m.tr_ports[v].iter().copied())
            .collect();
        if crate::portgraph::find_isomorphism(&a, &b, &fixed).is_none() {
            return false;
        }
    }
    true
}

/// All orderings of `items`, in lexicographic order of positions.
fn permutations<T: Copy>(items: &[T]) -> Vec<Vec<T>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Runs the staged search, handing each morphism to `visit` in search
/// order until it breaks.
pub fn search_morphisms(
    pattern: &PortGraph,
    subject: &PortGraph,
    opts: &MatchOptions,
    visit: impl FnMut(Morphism) -> ControlFlow<()>,
) -> Result<(), MatchError> {
    if !pattern.same_signature(subject) {
        return Err(MatchError::SignatureMismatch);
    }
    let mut search = Search {
        pattern,
        subject,
        opts,
        visit,
        deadline: opts.timeout_ms.map(|ms| Instant::now() + Duration::from_millis(ms)),
        ticks: 0,
        timed_out: false,
        emitted: BTreeSet::new(),
    };
    let ctx = MatchContext::new(pattern, subject);
    let done = vec![false; ctx.pattern.fo_fo.len()];
    let _ = search.fo_fo(ctx, done);
    if search.timed_out {
        return Err(MatchError::Timeout { found: 0 });
    }
    Ok(())
}

/// Every morphism from `pattern` to `subject`, sorted by node maps.
pub fn find_morphisms(
    pattern: &PortGraph,
    subject: &PortGraph,
    opts: &MatchOptions,
) -> Result<Vec<Morphism>, MatchError> {
    let mut found = Vec::new();
    let limit = opts.max_solutions.unwrap_or(usize::MAX);
    let result = search_morphisms(pattern, subject, opts, |m| {
        if found.len() >= limit {
            return ControlFlow::Break(());
        }
        found.push(m);
        if found.len() >= limit {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    if let Err(MatchError::Timeout { .. }) = result {
        return Err(MatchError::Timeout { found: found.len() });
    }
    result?;
    found.sort();
    Ok(found)
}

/// Whether `pattern` matches somewhere in `subject`.
pub fn matches(pattern: &PortGraph, subject: &PortGraph) -> Result<bool, MatchError> {
    let mut any = false;
    search_morphisms(pattern, subject, &MatchOptions::default(), |_| {
        any = true;
        ControlFlow::Break(())
    })?;
    Ok(any)
}
