use std::hint::black_box;

use atlas_core::linalg::{random_orthogonal, spectral_radius};
use atlas_core::schur::{build_r, recover_params};
use atlas_core::sysid::{orthogonal_canonicalize, solve_stein};
use atlas_core::young::{enumerate_all, Chart};
use atlas_core::{RealMatrix, SchurParams};
use criterion::{BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A chart from random pivots of `B` and seeded parameters for it. The
/// full atlas is not enumerated, so large sizes are cheap.
pub fn fixture(m: usize, n: usize, seed: u64) -> (Chart, SchurParams) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.random_range(1..=m.min(n));
    let mut pool: Vec<usize> = (2..=n).collect();
    let mut values = vec![1];
    for _ in 1..count {
        values.push(pool.swap_remove(rng.random_range(0..pool.len())));
    }
    let mut q = vec![0; m];
    let mut slots: Vec<usize> = (0..m).collect();
    for v in values {
        q[slots.swap_remove(rng.random_range(0..slots.len()))] = v;
    }
    let chart = Chart::from_b_pivots(&q, n).expect("valid pivots of B");
    let params = SchurParams::random(&mut rng, m, n);
    (chart, params)
}

/// A stable `n × n` matrix with spectral radius 0.9.
pub fn stable_matrix(n: usize, seed: u64) -> RealMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = RealMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &raw * (0.9 / spectral_radius(&raw))
}

fn enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate_all");
    for (m, n) in [(3, 4), (4, 5), (4, 6)] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{m}x{n}")), &(m, n), |b, &(m, n)| {
            b.iter(|| enumerate_all(black_box(m), black_box(n)))
        });
    }
    group.finish();
}

fn realization(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_r");
    for (m, n) in [(3, 4), (4, 12), (8, 32)] {
        let (chart, params) = fixture(m, n, 1);
        group.bench_function(format!("{m}x{n}"), |b| b.iter(|| build_r(black_box(&params), chart.u_idx())));
    }
    group.finish();

    let (chart, params) = fixture(3, 4, 2);
    let r = build_r(&params, chart.u_idx()).unwrap();
    c.bench_function("recover_params/3x4", |b| {
        b.iter(|| recover_params(black_box(&r), chart.u_idx(), 1e-9))
    });
}

fn canonicalization(c: &mut Criterion) {
    let mut group = c.benchmark_group("orthogonal_canonicalize");
    for (m, n) in [(3, 4), (4, 12)] {
        let (chart, params) = fixture(m, n, 3);
        let r = build_r(&params, chart.u_idx()).unwrap();
        let w = random_orthogonal(&mut ChaCha8Rng::seed_from_u64(4), n);
        let a = &w * r.a() * w.transpose();
        let b = &w * r.b();
        group.bench_function(format!("{m}x{n}"), |bench| {
            bench.iter(|| orthogonal_canonicalize(black_box(&b), black_box(&a), &chart, 1e-8))
        });
    }
    group.finish();
}

fn stein(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_stein");
    group.sample_size(20);
    // direct solve up to 32, fixed-point iteration above
    for n in [4, 16, 32, 48] {
        let a = stable_matrix(n, n as u64);
        let m = RealMatrix::identity(n, n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| solve_stein(black_box(&a), black_box(&m)))
        });
    }
    group.finish();
}

pub fn benchmarks(c: &mut Criterion) {
    enumeration(c);
    realization(c);
    canonicalization(c);
    stein(c);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        let (chart, params) = fixture(8, 32, 1);
        assert!(build_r(&params, chart.u_idx()).is_ok());
        assert!(spectral_radius(&stable_matrix(48, 48)) < 0.91);
        assert!(solve_stein(&stable_matrix(48, 48), &RealMatrix::identity(48, 48)).is_ok());
    }
}
