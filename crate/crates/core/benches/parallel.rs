//! Parallel-vs-sequential comparison for the data-parallel hot loops:
//! sparse matvec (the Krylov workhorse), Krylov stepping, and shot
//! sampling. The `*_seq` twins always run on one thread, so the same
//! binary measures both sides.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ising_ring::evolve::DenseState;
use ising_ring::hamiltonian::build_full;
use ising_ring::lattice::{ModelParams, SpinConfig};
use ising_ring::observables::{sample_shots, sample_shots_seq};
use ising_ring::C64;

fn matvec(c: &mut Criterion) {
    let mut group = c.benchmark_group("matvec");
    for n in [12usize, 16] {
        let params = ModelParams::new(n, 1.0, 0.05, -1.0).unwrap();
        let h = build_full(&params).unwrap();
        let x: Vec<C64> = (0..h.dim())
            .map(|i| C64::new((i % 13) as f64, (i % 7) as f64))
            .collect();
        let mut y = vec![C64::new(0.0, 0.0); h.dim()];
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, _| {
            b.iter(|| h.apply(black_box(&x), black_box(&mut y)))
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, _| {
            b.iter(|| h.apply_seq(black_box(&x), black_box(&mut y)))
        });
    }
    group.finish();
}

fn krylov_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("krylov_expv");
    group.sample_size(10);
    let n = 14;
    let params = ModelParams::new(n, 1.0, 0.02, -1.0).unwrap();
    let h = build_full(&params).unwrap();
    let psi = DenseState::from_config(&SpinConfig::all_up(n).unwrap());
    group.bench_function("unit_time_step", |b| {
        b.iter(|| {
            ising_ring::evolve::krylov_expv(
                &h,
                black_box(psi.amp()),
                1.0,
                &ising_ring::evolve::KrylovOptions::default(),
            )
        })
    });
    group.finish();
}

fn shots(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_shots");
    let n = 12;
    let params = ModelParams::new(n, 1.0, 0.3, -1.0).unwrap();
    let h = build_full(&params).unwrap();
    let psi = DenseState::from_config(&SpinConfig::all_up(n).unwrap());
    let psi = ising_ring::evolve::propagate(&psi, &h, 3.0).unwrap();
    let count = 20_000;
    group.bench_function("parallel", |b| {
        b.iter(|| sample_shots(black_box(&psi), count, 7, 0).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| sample_shots_seq(black_box(&psi), count, 7, 0).unwrap())
    });
    group.finish();
}

criterion_group!(benches, matvec, krylov_step, shots);
criterion_main!(benches);
