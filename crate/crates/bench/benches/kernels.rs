use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hotmesh_core::thermal::TransientStepper;
use hotmesh_core::{
    build_network, generate_warm_band, place, plan, run_summary, steady_state, AnnealConfig, GridSpec,
    MigrationCostParams, MigrationFunction, ScenarioConfig, ThermalParams,
};

fn thermal(c: &mut Criterion) {
    let mut group = c.benchmark_group("thermal");
    for n in [4, 8] {
        let g = GridSpec::square(n).unwrap();
        let net = build_network(&g, &ThermalParams::default()).unwrap();
        let (profile, m) = generate_warm_band(&g, 0.5, 2.0, 1).unwrap();
        let p = m.power_vector(&profile);
        group.bench_with_input(BenchmarkId::new("steady_state", n), &p, |b, p| {
            b.iter(|| steady_state(&net, black_box(p)).unwrap())
        });
        let stepper = TransientStepper::new(&net, 1e-6).unwrap();
        let state = steady_state(&net, &p).unwrap();
        group.bench_with_input(BenchmarkId::new("transient_step", n), &p, |b, p| {
            b.iter(|| stepper.step(black_box(&state), p).unwrap())
        });
    }
    group.finish();
}

fn planning(c: &mut Criterion) {
    let params = MigrationCostParams::default();
    let g = GridSpec::square(8).unwrap();
    let mut group = c.benchmark_group("plan_8x8");
    for f in MigrationFunction::STANDARD {
        group.bench_function(f.to_string(), |b| b.iter(|| plan(black_box(f), &g, &params).unwrap()));
    }
    group.finish();
}

fn placement(c: &mut Criterion) {
    let g = GridSpec::square(4).unwrap();
    let net = build_network(&g, &ThermalParams::default()).unwrap();
    let (profile, _) = generate_warm_band(&g, 0.5, 2.0, 1).unwrap();
    let cfg = AnnealConfig { iterations: 5000, ..AnnealConfig::default() };
    c.bench_function("anneal_4x4_5k", |b| b.iter(|| place(&profile, &g, &net, black_box(&cfg)).unwrap()));
}

fn simulation(c: &mut Criterion) {
    let mut cfg = ScenarioConfig::warm_band_4x4().with_function(MigrationFunction::TranslateXY(1, 1));
    cfg.sim.duration = 5e-3;
    cfg.sim.warmup = 2.5e-3;
    let mut group = c.benchmark_group("simulation");
    group.sample_size(10);
    group.bench_function("warm_band_5ms", |b| b.iter(|| run_summary(black_box(&cfg)).unwrap()));
    group.finish();
}

criterion_group!(benches, thermal, planning, placement, simulation);
criterion_main!(benches);
