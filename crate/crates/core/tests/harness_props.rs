use hotmesh_core::placement::evaluate;
use hotmesh_core::report::{summary_csv, trace_csv};
use hotmesh_core::{
    build_network, run, run_summary, steady_state, sweep, InitialMapping, Mapping, MigrationFunction, ScenarioConfig,
    StallScope, SweepCell, DEFAULT_PERIODS,
};
use MigrationFunction::*;

fn shortened(mut cfg: ScenarioConfig, duration: f64) -> ScenarioConfig {
    cfg.sim.duration = duration;
    cfg.sim.warmup = duration / 2.0;
    cfg
}

#[test]
fn static_run_holds_initial_steady_state() {
    let cfg = shortened(ScenarioConfig::center_hotspot_5x5(), 5e-3);
    let s = run_summary(&cfg).unwrap();
    let net = build_network(&cfg.grid, &cfg.thermal).unwrap();
    let InitialMapping::Given(m) = &cfg.initial_mapping else { unreachable!() };
    let steady = steady_state(&net, &m.power_vector(&cfg.profile)).unwrap();
    assert!((s.peak_overall - steady.peak()).abs() < 1e-4);
    assert!((s.peak_static_baseline - steady.peak()).abs() < 1e-4);
}

#[test]
fn energy_deposition_never_cools() {
    for base in [ScenarioConfig::warm_band_4x4(), ScenarioConfig::center_hotspot_5x5()] {
        for f in [Rotation, MirrorXY, TranslateXY(1, 1)] {
            let mut cfg = shortened(base.clone(), 10e-3).with_function(f);
            cfg.sim.deposit_energy = true;
            let with = run_summary(&cfg).unwrap();
            cfg.sim.deposit_energy = false;
            let without = run_summary(&cfg).unwrap();
            assert!(with.time_avg_mean_temp >= without.time_avg_mean_temp, "{f}");
            assert_eq!(with.total_migration_energy, without.total_migration_energy);
        }
    }
}

#[test]
fn xy_shift_flattens_the_warm_band() {
    let s = run_summary(&ScenarioConfig::warm_band_4x4().with_function(TranslateXY(1, 1))).unwrap();
    let baseline = run_summary(&ScenarioConfig::warm_band_4x4()).unwrap();
    assert!(s.max_spatial_spread < baseline.max_spatial_spread);
    assert!(s.peak_reduction > 0.0);
    assert!((s.throughput_penalty - 0.016).abs() < 1e-12);
}

#[test]
fn warm_band_moves_one_row_per_event() {
    let cfg = shortened(ScenarioConfig::warm_band_4x4().with_function(TranslateXY(1, 1)), 200e-6);
    let out = run(&cfg).unwrap();
    assert_eq!(out.summary.migration_count, 1);
    for x in 0..4 {
        let w = Mapping::identity(&cfg.grid).workload_at(hotmesh_core::Coord::new(x, 1));
        assert_eq!(out.final_mapping.coord_of(w), hotmesh_core::Coord::new((x + 1) % 4, 2));
    }
}

#[test]
fn stall_scope_only_matters_for_fixed_points() {
    // No 4x4 function below has a fixed point, so the scope is irrelevant.
    let mut cfg = shortened(ScenarioConfig::warm_band_4x4().with_function(Rotation), 5e-3);
    let moving = run_summary(&cfg).unwrap();
    cfg.sim.stall_scope = StallScope::All;
    assert_eq!(run_summary(&cfg).unwrap(), moving);

    // On 5x5 the stationary center keeps its full power unless everything stalls.
    let mut cfg = shortened(ScenarioConfig::center_hotspot_5x5().with_function(Rotation), 10e-3);
    let moving = run_summary(&cfg).unwrap();
    cfg.sim.stall_scope = StallScope::All;
    let all = run_summary(&cfg).unwrap();
    assert!(all.peak_overall < moving.peak_overall);
}

#[test]
fn energy_accounting() {
    let cfg = shortened(ScenarioConfig::center_hotspot_5x5().with_function(MirrorXY), 3e-3).with_period(437.2e-6);
    let s = run_summary(&cfg).unwrap();
    let per_event = hotmesh_core::plan(MirrorXY, &cfg.grid, &cfg.cost).unwrap().energy;
    assert_eq!(s.migration_count, 6);
    assert!((s.total_migration_energy - 6.0 * per_event).abs() <= 1e-15 * s.total_migration_energy);
}

#[test]
fn sweep_penalties_follow_period() {
    let base = shortened(ScenarioConfig::warm_band_4x4(), 2e-3);
    let cells = sweep(&base, &[TranslateXY(1, 1)], &DEFAULT_PERIODS).unwrap();
    let pct: Vec<f64> = cells.iter().map(|c| c.result.as_ref().unwrap().throughput_penalty * 100.0).collect();
    assert!((pct[0] - 1.6).abs() < 1e-9);
    assert!(pct[1] < 0.4 && pct[2] < 0.2);
    assert!(pct[0] > pct[1] && pct[1] > pct[2]);
}

#[test]
fn single_cell_sweep_equals_run() {
    let base = shortened(ScenarioConfig::warm_band_4x4(), 3e-3);
    let cells = sweep(&base, &[MirrorXY], &[109e-6]).unwrap();
    assert_eq!(cells.len(), 1);
    let direct = run(&base.clone().with_function(MirrorXY)).unwrap().summary;
    assert_eq!(cells[0].result.as_ref().unwrap(), &direct);
}

#[test]
fn sweep_table_is_function_major() {
    let base = shortened(ScenarioConfig::warm_band_4x4(), 2e-3);
    let fs = [Rotation, TranslateX(1)];
    let cells = sweep(&base, &fs, &DEFAULT_PERIODS).unwrap();
    assert_eq!(cells.len(), 6);
    let order: Vec<_> = cells.iter().map(|c| (c.function, c.period)).collect();
    assert_eq!(order[0], (Rotation, DEFAULT_PERIODS[0]));
    assert_eq!(order[3], (TranslateX(1), DEFAULT_PERIODS[0]));
    assert_eq!(summary_csv(&cells).lines().count(), 7);
}

#[test]
fn runs_are_byte_reproducible() {
    let cfg = shortened(ScenarioConfig::warm_band_4x4().with_function(Rotation), 2e-3);
    let a = run(&cfg).unwrap();
    let b = run(&cfg).unwrap();
    assert_eq!(trace_csv(&a.trace), trace_csv(&b.trace));
    let ca: Vec<SweepCell> = vec![a.summary.into()];
    let cb: Vec<SweepCell> = vec![b.summary.into()];
    assert_eq!(summary_csv(&ca), summary_csv(&cb));
}

#[test]
fn auto_placement_starts_no_hotter_than_identity() {
    let mut cfg = shortened(ScenarioConfig::warm_band_4x4(), 2e-3);
    cfg.initial_mapping = InitialMapping::Auto;
    cfg.anneal.iterations = 3000;
    let s = run_summary(&cfg).unwrap();
    let net = build_network(&cfg.grid, &cfg.thermal).unwrap();
    let identity_peak = evaluate(&Mapping::identity(&cfg.grid), &cfg.profile, &net).unwrap();
    assert!(s.peak_static_baseline <= identity_peak + 1e-4);
}
