use criterion::{criterion_group, criterion_main, Criterion};
use vcausal_core::geometry::{
    fm_project_with, hi_hrep, lp_optimize, ns_hrep, vertex_enumeration, Direction, FmOptions, MarginalMap,
};
use vcausal_core::inequalities::{evaluate, functional_s};
use vcausal_core::optimizer::{bell_operator, optimal_state};
use vcausal_core::quantum::{shipped_point, behavior_from_quantum};
use vcausal_core::Scenario;

fn quantum(c: &mut Criterion) {
    let (psi, parties) = shipped_point().unwrap();
    let s = functional_s();
    c.bench_function("behavior_and_s", |b| {
        b.iter(|| evaluate(&s, &behavior_from_quantum(&psi, &parties).unwrap()).unwrap())
    });
    let op = bell_operator(&s, &parties).unwrap();
    c.bench_function("optimal_state", |b| b.iter(|| optimal_state(&op)));
}

fn geometry(c: &mut Criterion) {
    let mut g = c.benchmark_group("geometry");
    g.sample_size(10);
    let s = Scenario::tripartite_2_333_2();
    let hi = hi_hrep(&s, 1).unwrap();
    let objective = functional_s().joint_vector();
    g.bench_function("lp_min_s_hidden_influence", |b| {
        b.iter(|| lp_optimize(&objective, &hi, Direction::Min).unwrap())
    });
    let small = Scenario::uniform(3, 2, 2).unwrap();
    let map = MarginalMap::new(&small, 1).unwrap();
    let ns = ns_hrep(&small);
    g.bench_function("fm_project_ns_222", |b| {
        b.iter(|| map.project_hrep(&ns, FmOptions::default()).unwrap())
    });
    let (proj, _) = map.project_hrep(&ns, FmOptions::default()).unwrap();
    g.bench_function("vertices_projected_ns_222", |b| b.iter(|| vertex_enumeration(&proj).unwrap()));
    let bipartite = Scenario::uniform(2, 2, 2).unwrap();
    let h = ns_hrep(&bipartite);
    let keep: Vec<usize> = (0..8).collect();
    g.bench_function("fm_project_ns_22", |b| {
        b.iter(|| fm_project_with(&h, &keep, FmOptions::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, quantum, geometry);
criterion_main!(benches);
