use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mixprep::circuit::lower_all;
use mixprep::mixedsynth::{merge_purification_ucr, synth_mixture, synth_purification};
use mixprep::puresynth::synth_pure;
use mixprep_bench::{random_ensemble, random_state, rng};

fn bench_pure(c: &mut Criterion) {
    let mut group = c.benchmark_group("synth_pure_lowered");
    for n in [4usize, 6, 8, 10] {
        let psi = random_state(&mut rng(41 + n as u64), n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &psi, |b, psi| {
            b.iter(|| lower_all(&synth_pure(psi).unwrap()).unwrap());
        });
    }
    group.finish();
}

fn bench_mixture(c: &mut Criterion) {
    let mut group = c.benchmark_group("synth_mixture");
    for (n, l) in [(3usize, 2usize), (3, 4), (4, 4)] {
        let e = random_ensemble(&mut rng(53), n, l);
        let id = format!("n{n}_l{l}");
        group.bench_with_input(BenchmarkId::from_parameter(id), &e, |b, e| {
            b.iter(|| synth_mixture(e).unwrap());
        });
    }
    group.finish();
}

fn bench_purification(c: &mut Criterion) {
    let mut group = c.benchmark_group("synth_purification_merged");
    for (n, l) in [(3usize, 2usize), (3, 4), (4, 4)] {
        let e = random_ensemble(&mut rng(67), n, l);
        let id = format!("n{n}_l{l}");
        group.bench_with_input(BenchmarkId::from_parameter(id), &e, |b, e| {
            b.iter(|| {
                let (circuit, _) = synth_purification(e).unwrap();
                merge_purification_ucr(&circuit).unwrap()
            });
        });
    }
    group.finish();
}

criterion_group!(benches, bench_pure, bench_mixture, bench_purification);
criterion_main!(benches);
