//! End-to-end timings for the hot paths: mixed-norm folds, witness
//! amplification, sign-pattern enumeration, and the two-point optimizer.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use umdlab_core::constants::{compute_c, OptimizerConfig};
use umdlab_core::martingale::{umd_ratio, DyadicMartingale};
use umdlab_core::mixed_norm::{build_e_n, Exponent, Weighting};
use umdlab_core::witness::{base_witness_e1, evaluate, evaluate_amplified, lower_bound_run};

fn e(v: f64) -> Exponent {
    Exponent::new(v).unwrap()
}

fn bench_norm_fold(c: &mut Criterion) {
    let mut group = c.benchmark_group("norm_fold");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [1usize, 2, 3] {
        let chain = build_e_n(e(2.0), e(4.0), n, Weighting::Counting);
        let x: Vec<f64> = (0..chain.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| chain.norm(black_box(&x)).unwrap())
        });
    }
    group.finish();
}

fn bench_witness_evaluation(c: &mut Criterion) {
    let we = base_witness_e1(e(2.0), e(4.0), [1.2, 0.3], [0.4, 1.1])
        .unwrap()
        .normalized()
        .unwrap();
    let mut group = c.benchmark_group("witness");
    group.bench_function("base_evaluate", |b| {
        b.iter(|| evaluate(black_box(&we)).unwrap())
    });
    // one amplification stage, 32 atoms, streamed without materialization
    group.bench_function("amplified_stream", |b| {
        b.iter(|| evaluate_amplified(black_box(&we), black_box(&we)).unwrap())
    });
    group.finish();
}

fn bench_sign_enumeration(c: &mut Criterion) {
    let chain = build_e_n(e(2.0), e(4.0), 1, Weighting::Counting);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut group = c.benchmark_group("umd_ratio");
    for depth in [4usize, 8] {
        let scalars = (1usize << depth) * chain.dim();
        let terminal: Vec<f64> = (0..scalars).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m = DyadicMartingale::from_terminal(chain.clone(), depth, &terminal).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(depth), &depth, |b, _| {
            b.iter(|| umd_ratio(black_box(&m), e(2.5)).unwrap())
        });
    }
    group.finish();
}

fn bench_constant_pipeline(c: &mut Criterion) {
    let cfg = OptimizerConfig::default();
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(20);
    group.bench_function("compute_c_2_4", |b| {
        b.iter(|| compute_c(e(2.0), e(4.0), black_box(&cfg)).unwrap())
    });
    group.bench_function("lower_bound_n2", |b| {
        b.iter(|| lower_bound_run(e(2.0), e(4.0), 2, black_box(&cfg)).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_norm_fold,
    bench_witness_evaluation,
    bench_sign_enumeration,
    bench_constant_pipeline
);
criterion_main!(benches);
