use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mixprep::cholesky::{ensemble_from_density, incomplete_cholesky, pivoted_cholesky};
use mixprep_bench::{banded_density, rng};

fn bench_pivoted(c: &mut Criterion) {
    let mut group = c.benchmark_group("pivoted_cholesky");
    for n in [4usize, 5, 6, 7] {
        let rho = banded_density(&mut rng(11 + n as u64), n, 4);
        group.bench_with_input(BenchmarkId::from_parameter(1usize << n), &rho, |b, rho| {
            b.iter(|| pivoted_cholesky(&rho.matrix, 1e-10).unwrap());
        });
    }
    group.finish();
}

fn bench_incomplete(c: &mut Criterion) {
    let mut group = c.benchmark_group("incomplete_cholesky");
    let rho = banded_density(&mut rng(23), 7, 4);
    for tol in [1e-4, 1e-3, 1e-2] {
        group.bench_with_input(BenchmarkId::from_parameter(tol), &tol, |b, &tol| {
            b.iter(|| incomplete_cholesky(&rho.matrix, tol).unwrap());
        });
    }
    group.finish();
}

fn bench_density_to_ensemble(c: &mut Criterion) {
    let mut group = c.benchmark_group("ensemble_from_density");
    for n in [4usize, 5, 6] {
        let rho = banded_density(&mut rng(31 + n as u64), n, 3);
        group.bench_with_input(BenchmarkId::from_parameter(1usize << n), &rho, |b, rho| {
            b.iter(|| ensemble_from_density(rho, 1e-3).unwrap());
        });
    }
    group.finish();
}

criterion_group!(benches, bench_pivoted, bench_incomplete, bench_density_to_ensemble);
criterion_main!(benches);
