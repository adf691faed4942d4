//! Closed-loop simulation: transient thermal stepping with periodic
//! migration events, plus parameter sweeps.
//!
//! Every run is paired with a static baseline that keeps the initial
//! mapping for the whole run. Both start from the steady state of the
//! initial mapping, and statistics cover only `[warmup, duration]`.
//!
//! At each migration event the harness
//! 1. plans the transfers for the configured function,
//! 2. injects the transfer energy as a one-step heat pulse spread evenly
//!    over the sending PEs,
//! 3. drops the stalled PEs to idle power for the event's downtime (by
//!    default only PEs whose workload moves; fixed points keep running), and
//! 4. moves workloads and recomputes the power vector.

use rayon::prelude::*;

use crate::error::Result;
use crate::grid::{Mapping, PowerProfile};
use crate::migration::{self, MigrationPlan};
use crate::placement::place;
use crate::scenario::{InitialMapping, ScenarioConfig, SimParams, StallScope};
use crate::thermal::{build_network, steady_state, ThermalNetwork, ThermalState, TransientStepper};
use crate::transforms::{CumulativeTransform, MigrationFunction};

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub scenario: String,
    pub function: MigrationFunction,
    /// s
    pub period: f64,
    /// Hottest block over the statistics window, °C.
    pub peak_overall: f64,
    /// Same, for the run without migration.
    pub peak_static_baseline: f64,
    /// `peak_static_baseline - peak_overall`; negative when migration hurts.
    pub peak_reduction: f64,
    /// Time average of the mean block temperature, °C.
    pub time_avg_mean_temp: f64,
    /// Largest hottest-minus-coolest block difference, °C.
    pub max_spatial_spread: f64,
    /// Fraction of compute time lost to migration stalls.
    pub throughput_penalty: f64,
    pub migration_count: usize,
    /// J
    pub total_migration_energy: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    /// Migrated run, one state per step starting at t = 0.
    pub trace: Vec<ThermalState>,
    /// Mapping at the end of the run.
    pub final_mapping: Mapping,
    /// Product of all applied migrations; maps logical to physical PEs.
    pub address_transform: CumulativeTransform,
}

/// Statistics from one simulated trajectory.
#[derive(Debug, Clone)]
struct Trajectory {
    peak: f64,
    mean_temp: f64,
    max_spread: f64,
    migrations: usize,
    energy: f64,
    trace: Vec<ThermalState>,
    mapping: Mapping,
    transform: CumulativeTransform,
}

struct Simulator<'a> {
    cfg: &'a ScenarioConfig,
    net: &'a ThermalNetwork,
    profile: &'a PowerProfile,
}

impl Simulator<'_> {
    fn simulate(&self, start: &Mapping, plan: Option<&MigrationPlan>, record: bool) -> Result<Trajectory> {
        let SimParams { duration, warmup, dt, deposit_energy, stall_scope } = self.cfg.sim;
        let grid = &self.cfg.grid;
        let n = grid.cell_count();
        let stepper = TransientStepper::new(self.net, dt)?;
        let steps = (duration / dt).round().max(1.0) as usize;
        let eps = 1e-9 * dt;
        let idle = self.profile.idle_power();
        let halts: Vec<bool> = match (plan, stall_scope) {
            (Some(plan), StallScope::Moving) => {
                plan.permutation.as_slice().iter().enumerate().map(|(i, &j)| i != j).collect()
            }
            _ => vec![true; n],
        };

        let mut mapping = start.clone();
        let mut transform = CumulativeTransform::identity(grid);
        let mut active = mapping.power_vector(self.profile);
        let mut state = steady_state(self.net, &active)?;

        let mut trace = Vec::new();
        if record {
            trace.push(state.clone());
        }

        let mut stats = WindowStats::default();
        if warmup <= 0.0 {
            stats.observe(&state);
        }

        let mut next_event = 1usize;
        let (mut stall_start, mut stall_end) = (0.0, 0.0);
        let (mut migrations, mut energy) = (0usize, 0.0);
        let mut power = vec![0.0; n];
        for i in 0..steps {
            let t0 = i as f64 * dt;
            let t1 = (i + 1) as f64 * dt;
            let mut pulse: Option<Vec<f64>> = None;

            if let Some(plan) = plan {
                while t0 + eps >= next_event as f64 * self.cfg.period {
                    next_event += 1;
                    if deposit_energy && plan.energy > 0.0 {
                        let sources = plan.sources();
                        let share = plan.energy / (sources.len() as f64 * dt);
                        let extra = pulse.get_or_insert_with(|| vec![0.0; n]);
                        for src in sources {
                            extra[grid.index(src)] += share;
                        }
                    }
                    if stall_end <= t0 {
                        stall_start = t0;
                    }
                    stall_end = stall_end.max(t0) + plan.downtime;
                    mapping = migration::execute(&mapping, plan)?;
                    transform = transform.compose_permutation(&plan.permutation)?;
                    active = mapping.power_vector(self.profile);
                    migrations += 1;
                    energy += plan.energy;
                }
            }

            let stalled = (t1.min(stall_end) - t0.max(stall_start)).max(0.0) / dt;
            for ((p, a), &halted) in power.iter_mut().zip(&active).zip(&halts) {
                *p = if halted { (1.0 - stalled) * a + stalled * idle } else { *a };
            }
            if let Some(extra) = &pulse {
                for (p, e) in power.iter_mut().zip(extra) {
                    *p += e;
                }
            }

            state = stepper.step(&state, &power)?;
            state.time = t1;
            if t1 + eps >= warmup {
                stats.observe(&state);
            }
            if record {
                trace.push(state.clone());
            }
        }

        Ok(Trajectory {
            peak: stats.peak,
            mean_temp: stats.mean_sum / stats.samples as f64,
            max_spread: stats.max_spread,
            migrations,
            energy,
            trace,
            mapping,
            transform,
        })
    }
}

struct WindowStats {
    peak: f64,
    max_spread: f64,
    mean_sum: f64,
    samples: usize,
}

impl Default for WindowStats {
    fn default() -> Self {
        WindowStats { peak: f64::NEG_INFINITY, max_spread: 0.0, mean_sum: 0.0, samples: 0 }
    }
}

impl WindowStats {
    fn observe(&mut self, state: &ThermalState) {
        self.peak = self.peak.max(state.peak());
        self.max_spread = self.max_spread.max(state.spatial_spread());
        self.mean_sum += state.mean_block();
        self.samples += 1;
    }
}

/// Resolves `InitialMapping::Auto` by annealing.
pub fn initial_mapping(cfg: &ScenarioConfig, net: &ThermalNetwork) -> Result<Mapping> {
    match &cfg.initial_mapping {
        InitialMapping::Given(m) => Ok(m.clone()),
        InitialMapping::Auto => Ok(place(&cfg.profile, &cfg.grid, net, &cfg.anneal_config())?.mapping),
    }
}

fn simulate_scenario(cfg: &ScenarioConfig, record: bool) -> Result<(RunSummary, Trajectory)> {
    cfg.validate()?;
    let net = build_network(&cfg.grid, &cfg.thermal)?;
    let start = initial_mapping(cfg, &net)?;
    let sim = Simulator { cfg, net: &net, profile: &cfg.profile };

    let plan = if cfg.migration_enabled() {
        let plan = migration::plan(cfg.migration_fn, &cfg.grid, &cfg.cost)?;
        (!plan.is_empty()).then_some(plan)
    } else {
        None
    };

    let migrated = sim.simulate(&start, plan.as_ref(), record)?;
    let baseline = sim.simulate(&start, None, false)?;

    let throughput_penalty = match &plan {
        Some(p) if migrated.migrations > 0 => migration::throughput_penalty(p.downtime, cfg.period),
        _ => 0.0,
    };
    let summary = RunSummary {
        scenario: cfg.name.clone(),
        function: cfg.migration_fn,
        period: cfg.period,
        peak_overall: migrated.peak,
        peak_static_baseline: baseline.peak,
        peak_reduction: baseline.peak - migrated.peak,
        time_avg_mean_temp: migrated.mean_temp,
        max_spatial_spread: migrated.max_spread,
        throughput_penalty,
        migration_count: migrated.migrations,
        total_migration_energy: migrated.energy,
    };
    Ok((summary, migrated))
}

/// Runs one scenario with its static baseline and returns the summary and
/// the full temperature trace of the migrated run.
pub fn run(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let (summary, t) = simulate_scenario(cfg, true)?;
    Ok(RunOutput { summary, trace: t.trace, final_mapping: t.mapping, address_transform: t.transform })
}

/// Like [`run`] without keeping the trace.
pub fn run_summary(cfg: &ScenarioConfig) -> Result<RunSummary> {
    Ok(simulate_scenario(cfg, false)?.0)
}

/// One cell of a sweep.
#[derive(Debug)]
pub struct SweepCell {
    pub scenario: String,
    pub function: MigrationFunction,
    /// s
    pub period: f64,
    pub result: Result<RunSummary>,
}

/// Runs the cross product `functions × periods` on `base`, function-major.
///
/// Cells run in parallel; results come back in input order and a failing
/// cell does not stop the others.
pub fn sweep(base: &ScenarioConfig, functions: &[MigrationFunction], periods: &[f64]) -> Result<Vec<SweepCell>> {
    if functions.is_empty() || periods.is_empty() {
        return Err(crate::Error::Config("sweep needs at least one function and one period".into()));
    }
    // Anneal once rather than per cell.
    let mut base = base.clone();
    if base.initial_mapping == InitialMapping::Auto {
        base.validate()?;
        let net = build_network(&base.grid, &base.thermal)?;
        base.initial_mapping = InitialMapping::Given(initial_mapping(&base, &net)?);
    }
    let cells: Vec<(MigrationFunction, f64)> =
        functions.iter().flat_map(|&f| periods.iter().map(move |&p| (f, p))).collect();
    Ok(cells
        .into_par_iter()
        .map(|(function, period)| {
            let cfg = base.clone().with_function(function).with_period(period);
            SweepCell { scenario: base.name.clone(), function, period, result: run_summary(&cfg) }
        })
        .collect())
}
