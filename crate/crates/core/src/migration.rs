//! Turning a migration function into an executable event.
//!
//! Every PE whose workload moves sends its configuration and state blob to
//! the destination PE along the XY (X first, then Y) route. Transfers are
//! packed into phases such that no directed mesh link carries two transfers
//! in the same phase, which makes each phase congestion-free and the total
//! migration time deterministic.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{Coord, GridSpec, Mapping};
use crate::transforms::{MigrationFunction, Permutation};

/// Outgoing port of a mesh router.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// +x
    East,
    /// -x
    West,
    /// +y
    North,
    /// -y
    South,
}

/// A directed link, identified by its upstream router and output port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Link {
    pub from: Coord,
    pub dir: Direction,
}

/// Dimension-ordered route from `src` to `dst`.
pub fn xy_route(src: Coord, dst: Coord) -> Vec<Link> {
    let mut route = Vec::with_capacity(src.manhattan(dst));
    let mut at = src;
    while at.x != dst.x {
        let dir = if dst.x > at.x { Direction::East } else { Direction::West };
        route.push(Link { from: at, dir });
        at.x = if dst.x > at.x { at.x + 1 } else { at.x - 1 };
    }
    while at.y != dst.y {
        let dir = if dst.y > at.y { Direction::North } else { Direction::South };
        route.push(Link { from: at, dir });
        at.y = if dst.y > at.y { at.y + 1 } else { at.y - 1 };
    }
    route
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transfer {
    pub src: Coord,
    pub dst: Coord,
    pub route: Vec<Link>,
}

impl Transfer {
    pub fn new(src: Coord, dst: Coord) -> Self {
        Transfer { src, dst, route: xy_route(src, dst) }
    }

    pub fn hops(&self) -> usize {
        self.route.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DowntimeMode {
    /// A single calibrated stall per event.
    #[default]
    Fixed,
    /// Stall derived from phase count, blob size and per-hop bit time.
    Detailed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MigrationCostParams {
    /// Configuration plus state carried by each moving PE, bits.
    pub state_bits: f64,
    /// Energy per bit per hop, J.
    pub e_bit_hop: f64,
    /// Stall per migration event in fixed mode, s.
    pub downtime_fixed: f64,
    /// Serialization time per bit per hop in detailed mode, s.
    pub t_bit_hop: f64,
    pub mode: DowntimeMode,
}

/// Stall that yields a 1.6 % penalty at a 109 µs period.
pub const CALIBRATED_DOWNTIME_S: f64 = 1.744e-6;

impl Default for MigrationCostParams {
    fn default() -> Self {
        MigrationCostParams {
            state_bits: 16_384.0,
            e_bit_hop: 2.0e-12,
            downtime_fixed: CALIBRATED_DOWNTIME_S,
            // 32-bit links at 500 MHz
            t_bit_hop: 1.0 / 16.0e9,
            mode: DowntimeMode::Fixed,
        }
    }
}

impl MigrationCostParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("state_bits", self.state_bits),
            ("e_bit_hop", self.e_bit_hop),
            ("downtime_fixed", self.downtime_fixed),
            ("t_bit_hop", self.t_bit_hop),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!("migration parameter {name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Schedule and cost of one migration event.
#[derive(Debug, Clone, PartialEq)]
pub struct MigrationPlan {
    pub function: MigrationFunction,
    pub permutation: Permutation,
    pub phases: Vec<Vec<Transfer>>,
    pub total_hops: usize,
    /// J
    pub energy: f64,
    /// s
    pub downtime: f64,
}

impl MigrationPlan {
    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn transfers(&self) -> impl Iterator<Item = &Transfer> {
        self.phases.iter().flatten()
    }

    /// PEs that send a blob, in schedule order.
    pub fn sources(&self) -> Vec<Coord> {
        self.transfers().map(|t| t.src).collect()
    }

    pub fn max_hops(&self) -> usize {
        self.transfers().map(Transfer::hops).max().unwrap_or(0)
    }

    /// One `phase,src_x,src_y,dst_x,dst_y,hops` line per transfer, after a
    /// header line.
    pub fn to_text(&self) -> String {
        let mut out = String::from("phase,src_x,src_y,dst_x,dst_y,hops\n");
        for (p, phase) in self.phases.iter().enumerate() {
            for t in phase {
                let _ = writeln!(out, "{p},{},{},{},{},{}", t.src.x, t.src.y, t.dst.x, t.dst.y, t.hops());
            }
        }
        out
    }
}

/// Builds the phase schedule for applying `f` once on `grid`.
///
/// Transfers are visited in row-major source order and each lands in the
/// earliest phase whose directed links it does not touch.
pub fn plan(f: MigrationFunction, grid: &GridSpec, params: &MigrationCostParams) -> Result<MigrationPlan> {
    params.validate()?;
    let permutation = f.as_permutation(grid)?;

    let mut phases: Vec<Vec<Transfer>> = Vec::new();
    let mut busy: Vec<HashSet<Link>> = Vec::new();
    let mut total_hops = 0;
    for src in grid.cells() {
        let dst = permutation.apply(src);
        if dst == src {
            continue;
        }
        let t = Transfer::new(src, dst);
        total_hops += t.hops();
        let slot = busy.iter().position(|used| t.route.iter().all(|l| !used.contains(l)));
        let slot = slot.unwrap_or_else(|| {
            busy.push(HashSet::new());
            phases.push(Vec::new());
            phases.len() - 1
        });
        busy[slot].extend(t.route.iter().copied());
        phases[slot].push(t);
    }

    let mut plan = MigrationPlan { function: f, permutation, phases, total_hops, energy: 0.0, downtime: 0.0 };
    plan.energy = migration_energy(&plan, params);
    plan.downtime = migration_downtime(&plan, params);
    Ok(plan)
}

/// Network energy of moving every blob, J.
pub fn migration_energy(plan: &MigrationPlan, params: &MigrationCostParams) -> f64 {
    plan.total_hops as f64 * params.state_bits * params.e_bit_hop
}

/// Compute stall caused by one event, s. An empty plan costs nothing.
pub fn migration_downtime(plan: &MigrationPlan, params: &MigrationCostParams) -> f64 {
    if plan.is_empty() {
        return 0.0;
    }
    match params.mode {
        DowntimeMode::Fixed => params.downtime_fixed,
        DowntimeMode::Detailed => {
            plan.phases.len() as f64 * params.state_bits * params.t_bit_hop * plan.max_hops() as f64
        }
    }
}

/// Fraction of compute time lost to a stall of `downtime` every `period`.
pub fn throughput_penalty(downtime: f64, period: f64) -> f64 {
    downtime / period
}

/// Moves every workload to the destination of its current PE.
pub fn execute(mapping: &Mapping, plan: &MigrationPlan) -> Result<Mapping> {
    if mapping.dims() != plan.permutation.dims() {
        let (mx, my) = mapping.dims();
        let (px, py) = plan.permutation.dims();
        return Err(Error::config(format!("plan built for a {px}x{py} mesh, mapping is {mx}x{my}")));
    }
    Ok(mapping.permuted(plan.permutation.as_slice()))
}
