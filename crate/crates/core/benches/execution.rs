use std::hint::black_box;

use bivsurv::betaproc2d::BivariateMass;
use bivsurv::exact::ratio;
use bivsurv::exec::Execution;
use bivsurv::pruittlab::{run_replications, PruittConfig};
use bivsurv::simharness::{run_study_with, ScenarioConfig};
use bivsurv::survdata::{Time, TimeGrid};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn scenario() -> ScenarioConfig {
    let t = |x: i64| Time::from_int(x);
    let mut atoms = Vec::new();
    for i in 1..=3 {
        for j in 1..=3 {
            atoms.push(((t(i), t(j)), ratio(1, 9)));
        }
    }
    ScenarioConfig {
        grid: TimeGrid::default(),
        p0: BivariateMass::from_points(&atoms).unwrap(),
        g: BivariateMass::from_points(&[
            ((t(2), t(4)), ratio(1, 4)),
            ((t(4), t(2)), ratio(1, 4)),
            ((t(4), t(4)), ratio(1, 2)),
        ])
        .unwrap(),
        sample_sizes: vec![200, 2000],
        replications: 16,
        seed: 11,
        include_dabrowska: true,
    }
}

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn study(c: &mut Criterion) {
    let cfg = scenario();
    let mut group = c.benchmark_group("study");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| run_study_with(black_box(&cfg), mode).unwrap())
        });
    }
    group.finish();
}

fn pruitt(c: &mut Criterion) {
    let cfg = PruittConfig {
        n: 20_000,
        m_conc: 1.0,
        seed: 3,
    };
    let mut group = c.benchmark_group("pruitt_replications");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| run_replications(black_box(&cfg), 8, mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, study, pruitt);
criterion_main!(benches);
