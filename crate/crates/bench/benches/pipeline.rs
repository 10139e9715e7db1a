//! Criterion benches for the hot paths: approximation build, sector
//! evaluation, operator assembly, and the dense eigensolve.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64 as C64;

use resonette_core::approximation::{build_approximation, ApproxOptions};
use resonette_core::distortion::{DistortionMap, DistortionProfile};
use resonette_core::linalg::eig;
use resonette_core::operator::{assemble_distorted, GridSpec, Scheme};
use resonette_core::potential::Potential;

fn bench_build_approximation(c: &mut Criterion) {
    let v = Potential::gaussian_barrier(0.8, 1.0);
    let mut g = c.benchmark_group("build_approximation");
    for mu in [0.2, 0.1, 0.05] {
        g.bench_with_input(BenchmarkId::from_parameter(mu), &mu, |b, &mu| {
            b.iter(|| build_approximation(&v, mu, 1.0, &ApproxOptions::default()).unwrap())
        });
    }
    g.finish();
}

fn bench_eval_sector(c: &mut Criterion) {
    let v = Potential::gaussian_barrier(0.8, 1.0);
    let ap = build_approximation(&v, 0.1, 1.0, &ApproxOptions::default()).unwrap();
    c.bench_function("eval_sector_1k", |b| {
        b.iter(|| {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..1000 {
                let r = C64::new(0.01 + 0.01 * i as f64, -0.0005 * i as f64 * 0.01);
                acc += ap.eval_sector(r, 1.0).unwrap();
            }
            acc
        })
    });
}

fn bench_assemble(c: &mut Criterion) {
    let v = Potential::gaussian_barrier(0.8, 1.0);
    let ap = build_approximation(&v, 0.1, 1.0, &ApproxOptions::default()).unwrap();
    let profile = DistortionProfile::from_h(0.1, 1.1, 1.0).unwrap();
    let map = DistortionMap::new(profile, 0.1).unwrap();
    let mut g = c.benchmark_group("assemble_distorted");
    g.sample_size(10);
    for n in [300usize, 600] {
        let grid = GridSpec::new(-12.0, 12.0, n, Scheme::Order4).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &grid, |b, grid| {
            b.iter(|| assemble_distorted(&ap, &map, 0.1, grid).unwrap())
        });
    }
    g.finish();
}

fn bench_eig(c: &mut Criterion) {
    let v = Potential::gaussian_barrier(0.8, 1.0);
    let ap = build_approximation(&v, 0.1, 1.0, &ApproxOptions::default()).unwrap();
    let profile = DistortionProfile::from_h(0.1, 1.1, 1.0).unwrap();
    let map = DistortionMap::new(profile, 0.1).unwrap();
    let grid = GridSpec::new(-12.0, 12.0, 400, Scheme::Order4).unwrap();
    let op = assemble_distorted(&ap, &map, 0.1, &grid).unwrap();
    let mut g = c.benchmark_group("eig");
    g.sample_size(10);
    g.bench_function("n400", |b| b.iter(|| eig(&op.matrix).unwrap()));
    g.finish();
}

criterion_group!(
    benches,
    bench_build_approximation,
    bench_eval_sector,
    bench_assemble,
    bench_eig
);
criterion_main!(benches);
