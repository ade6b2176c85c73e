//! Timings for the hot paths: single rate evaluations, one gradient,
//! a full optimization run, and a small Monte-Carlo point.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use irs_cf_bench::scenario;
use irs_cf_core::{
    ao_optimize, computation_rate_direct, effective_channel, evaluate_point, optimal_beta,
    phase_gradient, rate_at_optimal_beta, AOConfig, EvalConfig, MethodId,
};

fn rate_evaluations(c: &mut Criterion) {
    let s = scenario(4, 16, 10.0, 7);
    let h_eff = effective_channel(&s.chan, &s.phases).unwrap();
    c.bench_function("rate/rank_one_k4", |b| {
        b.iter(|| computation_rate_direct(black_box(&s.a), black_box(&h_eff), s.snr).unwrap())
    });
    c.bench_function("rate/with_surface_k4_m16", |b| {
        b.iter(|| {
            rate_at_optimal_beta(black_box(&s.chan), black_box(&s.phases), &s.a, s.snr).unwrap()
        })
    });
}

fn gradient(c: &mut Criterion) {
    let s = scenario(4, 16, 10.0, 7);
    let h_eff = effective_channel(&s.chan, &s.phases).unwrap();
    let beta = optimal_beta(&h_eff, &s.a, s.snr).unwrap();
    c.bench_function("gradient/k4_m16", |b| {
        b.iter(|| phase_gradient(black_box(&s.chan), black_box(&s.phases), beta, &s.a))
    });
}

fn optimization(c: &mut Criterion) {
    let s = scenario(2, 8, 3.162, 7);
    let cfg = AOConfig::default();
    c.bench_function("optimize/k2_m8_default", |b| {
        b.iter(|| ao_optimize(black_box(&s.chan), &s.a, s.snr, &s.phases, &cfg).unwrap())
    });
}

fn monte_carlo(c: &mut Criterion) {
    let s = scenario(2, 8, 3.162, 7);
    let cfg = EvalConfig {
        num_chnl_realz: 10,
        num_init_point: 2,
        n_random_phase: 2,
        methods: [MethodId::AoAvg, MethodId::RndPhzMax].into_iter().collect(),
        ..EvalConfig::desk_scale(7)
    };
    c.bench_function("monte_carlo/point_10x2", |b| {
        b.iter(|| evaluate_point(black_box(&s.params), black_box(&cfg)).unwrap())
    });
}

criterion_group!(benches, rate_evaluations, gradient, optimization, monte_carlo);
criterion_main!(benches);
