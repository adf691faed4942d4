//! Thermal hotspot simulation for mesh networks-on-chip with periodic
//! runtime migration of workloads.
//!
//! The crate models a mesh of processing elements (PEs) as a compact RC
//! thermal network, moves the whole workload plane with rigid migration
//! functions (rotation, mirroring, translation), schedules the resulting
//! state transfers into congestion-free phases, and measures what the
//! migration does to peak temperature and throughput.

pub mod error;
pub mod grid;
pub mod harness;
pub mod migration;
pub mod placement;
pub mod report;
pub mod scenario;
pub mod thermal;
pub mod transforms;

pub use error::{Error, Result};
pub use grid::{generate_center_hotspot, generate_warm_band, Coord, GridSpec, Mapping, PowerProfile, WorkloadId};
pub use harness::{run, run_summary, sweep, RunOutput, RunSummary, SweepCell};
pub use migration::{plan, DowntimeMode, MigrationCostParams, MigrationPlan, Transfer};
pub use placement::{place, AnnealConfig, Placement};
pub use scenario::{InitialMapping, ScenarioConfig, SimParams, StallScope};
pub use thermal::{build_network, steady_state, step_transient, ThermalNetwork, ThermalParams, ThermalState};
pub use transforms::{CumulativeTransform, MigrationFunction, Permutation};

/// Migration periods compared by default, s.
pub const DEFAULT_PERIODS: [f64; 3] = [109e-6, 437.2e-6, 874.4e-6];
