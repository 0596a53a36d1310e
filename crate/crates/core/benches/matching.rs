use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hoport_core::matcher::{find_morphisms, MatchOptions};
use hoport_core::oracle::brute_force_morphisms_with;
use hoport_core::proofnets::{all_rules, beta_pattern, beta_rule, beta_subject};
use hoport_core::rewrite::{enumerate_redexes_with, normalize_with, Strategy};
use hoport_core::{Exec, NodeId, PortGraph, PortRef};

const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

/// `k` disjoint copies of the beta redex.
fn copies(k: u32) -> PortGraph {
    let g = beta_subject();
    let width = g.node_count() as u32;
    let mut out = g.empty_like();
    for c in 0..k {
        let shift = |id: NodeId| NodeId(id.0 + c * width);
        for (id, node) in g.nodes() {
            out.add_node_with_id(shift(id), &node.label, node.class).unwrap();
        }
        for e in g.edges() {
            let (a, b) = e.endpoints();
            out.add_edge(PortRef::new(shift(a.node), a.port), PortRef::new(shift(b.node), b.port))
                .unwrap();
        }
    }
    out
}

fn oracle(c: &mut Criterion) {
    let (pattern, subject) = (beta_pattern(), beta_subject());
    let mut group = c.benchmark_group("oracle_beta");
    for (name, exec) in STRATEGIES {
        group.bench_function(name, |b| {
            b.iter(|| brute_force_morphisms_with(exec, black_box(&pattern), black_box(&subject), 8).unwrap())
        });
    }
    group.finish();
}

fn matcher(c: &mut Criterion) {
    let pattern = beta_pattern();
    let mut group = c.benchmark_group("matcher_beta");
    for k in [1, 4, 16] {
        let subject = copies(k);
        group.bench_with_input(BenchmarkId::from_parameter(k), &subject, |b, s| {
            b.iter(|| find_morphisms(&pattern, s, &MatchOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn redexes(c: &mut Criterion) {
    let rules: Vec<_> = (0..4).flat_map(|_| all_rules()).collect();
    let subject = copies(16);
    let mut group = c.benchmark_group("enumerate_redexes");
    for (name, exec) in STRATEGIES {
        group.bench_function(name, |b| {
            b.iter(|| enumerate_redexes_with(exec, black_box(&rules), black_box(&subject)).unwrap())
        });
    }
    group.finish();
}

fn exhaustive(c: &mut Criterion) {
    let rules = [beta_rule()];
    let subject = copies(5);
    let mut group = c.benchmark_group("exhaustive_bfs");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        group.bench_function(name, |b| {
            b.iter(|| normalize_with(exec, &rules, black_box(&subject), Strategy::ExhaustiveBfs, 10).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, oracle, matcher, redexes, exhaustive);
criterion_main!(benches);
