//! Compact RC thermal model of the die.
//!
//! One node per PE block, 4-neighbour lateral conductances between adjacent
//! blocks, a vertical conductance from each block into a single lumped
//! heat-sink node, and the sink tied to a fixed ambient. With
//! `θ = T - T_ambient` the model is
//!
//! ```text
//! C dθ/dt = P - G θ
//! ```
//!
//! where `G` is symmetric positive definite as long as the sink couples to
//! ambient. Both the steady-state matrix `G` and the backward-Euler matrix
//! `C/dt + G` are factored once with a dense Cholesky decomposition; meshes
//! here are at most a few dozen blocks.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

pub const DEFAULT_AMBIENT_C: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams {
    /// Silicon conductivity, W/(m·K).
    pub k_si: f64,
    /// Volumetric heat capacity of silicon, J/(m³·K).
    pub c_v: f64,
    /// Block to sink resistance per PE, K/W.
    pub r_vertical: f64,
    /// Lumped sink to ambient resistance, K/W. `f64::INFINITY` isolates
    /// the die, which leaves the steady state undefined.
    pub r_sink: f64,
    /// Sink heat capacity, J/K.
    pub c_sink: f64,
    /// Ambient temperature, °C.
    pub ambient: f64,
}

impl Default for ThermalParams {
    fn default() -> Self {
        ThermalParams {
            k_si: 150.0,
            c_v: 1.75e6,
            r_vertical: 2.0,
            r_sink: 0.5,
            c_sink: 10.0,
            ambient: DEFAULT_AMBIENT_C,
        }
    }
}

impl ThermalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("k_si", self.k_si),
            ("c_v", self.c_v),
            ("r_vertical", self.r_vertical),
            ("r_sink", self.r_sink),
            ("c_sink", self.c_sink),
        ];
        for (name, v) in positive {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::config(format!("thermal parameter {name} must be > 0, got {v}")));
            }
        }
        if !self.ambient.is_finite() {
            return Err(Error::config("ambient temperature must be finite"));
        }
        Ok(())
    }
}

/// Assembled conductance/capacitance network for one mesh.
#[derive(Clone)]
pub struct ThermalNetwork {
    blocks: usize,
    conductance: DMatrix<f64>,
    capacitance: DVector<f64>,
    ambient_coupling: DVector<f64>,
    ambient: f64,
    lateral_links: usize,
    steady: Option<Cholesky<f64, Dyn>>,
}

impl std::fmt::Debug for ThermalNetwork {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ThermalNetwork")
            .field("blocks", &self.blocks)
            .field("lateral_links", &self.lateral_links)
            .field("ambient", &self.ambient)
            .finish_non_exhaustive()
    }
}

/// Assembles the RC network for `grid`.
pub fn build_network(grid: &GridSpec, params: &ThermalParams) -> Result<ThermalNetwork> {
    params.validate()?;
    let n = grid.cell_count();
    let sink = n;
    let thickness_m = grid.die_thickness_mm() * 1e-3;
    let area_m2 = grid.cell_area_mm2() * 1e-6;

    // Square cells: k·(t·side)/side.
    let g_lat = params.k_si * thickness_m;
    let g_vert = 1.0 / params.r_vertical;
    let g_amb = 1.0 / params.r_sink;

    let mut g = DMatrix::zeros(n + 1, n + 1);
    let mut link = |a: usize, b: usize, conductance: f64| {
        g[(a, a)] += conductance;
        g[(b, b)] += conductance;
        g[(a, b)] -= conductance;
        g[(b, a)] -= conductance;
    };
    let mut lateral_links = 0;
    for c in grid.cells() {
        let i = grid.index(c);
        if c.x + 1 < grid.nx() {
            link(i, i + 1, g_lat);
            lateral_links += 1;
        }
        if c.y + 1 < grid.ny() {
            link(i, i + grid.nx(), g_lat);
            lateral_links += 1;
        }
        link(i, sink, g_vert);
    }
    g[(sink, sink)] += g_amb;

    let mut ambient_coupling = DVector::zeros(n + 1);
    ambient_coupling[sink] = g_amb;

    let mut capacitance = DVector::from_element(n + 1, params.c_v * area_m2 * thickness_m);
    capacitance[sink] = params.c_sink;

    let steady = if ambient_coupling.iter().any(|&a| a > 0.0) { Cholesky::new(g.clone()) } else { None };

    Ok(ThermalNetwork {
        blocks: n,
        conductance: g,
        capacitance,
        ambient_coupling,
        ambient: params.ambient,
        lateral_links,
        steady,
    })
}

impl ThermalNetwork {
    pub fn block_count(&self) -> usize {
        self.blocks
    }

    /// Blocks plus the sink.
    pub fn node_count(&self) -> usize {
        self.blocks + 1
    }

    pub fn lateral_links(&self) -> usize {
        self.lateral_links
    }

    pub fn ambient(&self) -> f64 {
        self.ambient
    }

    pub fn conductance(&self) -> &DMatrix<f64> {
        &self.conductance
    }

    pub fn capacitance(&self) -> &DVector<f64> {
        &self.capacitance
    }

    pub fn ambient_coupling(&self) -> &DVector<f64> {
        &self.ambient_coupling
    }

    /// Uniform state at ambient.
    pub fn ambient_state(&self) -> ThermalState {
        ThermalState { temps: vec![self.ambient; self.node_count()], time: 0.0 }
    }

    /// Heat leaving the die into ambient, W.
    pub fn heat_to_ambient(&self, state: &ThermalState) -> f64 {
        self.ambient_coupling.iter().zip(&state.temps).map(|(g, t)| g * (t - self.ambient)).sum()
    }

    fn power_rhs(&self, power: &[f64]) -> Result<DVector<f64>> {
        if power.len() != self.blocks {
            return Err(Error::config(format!(
                "power vector has {} entries, network has {} blocks",
                power.len(),
                self.blocks
            )));
        }
        if let Some(p) = power.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::config(format!("block power must be >= 0 W, got {p}")));
        }
        let mut rhs = DVector::zeros(self.blocks + 1);
        rhs.rows_mut(0, self.blocks).copy_from_slice(power);
        Ok(rhs)
    }
}

/// Node temperatures (blocks row-major, then the sink) at `time` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalState {
    pub temps: Vec<f64>,
    pub time: f64,
}

impl ThermalState {
    pub fn blocks(&self) -> &[f64] {
        &self.temps[..self.temps.len() - 1]
    }

    pub fn sink(&self) -> f64 {
        self.temps[self.temps.len() - 1]
    }

    /// Hottest block, °C. The sink is excluded.
    pub fn peak(&self) -> f64 {
        self.blocks().iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Hottest minus coolest block, °C.
    pub fn spatial_spread(&self) -> f64 {
        let min = self.blocks().iter().copied().fold(f64::INFINITY, f64::min);
        self.peak() - min
    }

    pub fn mean_block(&self) -> f64 {
        let b = self.blocks();
        b.iter().sum::<f64>() / b.len() as f64
    }

    /// Row-major index of the hottest block.
    pub fn argmax_block(&self) -> usize {
        let b = self.blocks();
        (0..b.len()).fold(0, |best, i| if b[i] > b[best] { i } else { best })
    }
}

/// Solves `G (T - T_amb) = P` for the block powers `power`.
pub fn steady_state(net: &ThermalNetwork, power: &[f64]) -> Result<ThermalState> {
    let rhs = net.power_rhs(power)?;
    let chol = net
        .steady
        .as_ref()
        .ok_or_else(|| Error::Model("conductance matrix is singular: nothing couples the die to ambient".into()))?;
    let theta = chol.solve(&rhs);
    Ok(ThermalState { temps: theta.iter().map(|t| t + net.ambient).collect(), time: 0.0 })
}

/// One backward-Euler step of length `dt` seconds.
///
/// Factors the step matrix on every call; loops should hold a
/// [`TransientStepper`] instead.
pub fn step_transient(net: &ThermalNetwork, state: &ThermalState, power: &[f64], dt: f64) -> Result<ThermalState> {
    TransientStepper::new(net, dt)?.step(state, power)
}

/// Backward-Euler integrator with the step matrix `C/dt + G` pre-factored.
pub struct TransientStepper<'a> {
    net: &'a ThermalNetwork,
    dt: f64,
    c_over_dt: DVector<f64>,
    factor: Cholesky<f64, Dyn>,
}

impl<'a> TransientStepper<'a> {
    pub fn new(net: &'a ThermalNetwork, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::config(format!("time step must be > 0 s, got {dt}")));
        }
        let c_over_dt = net.capacitance.map(|c| c / dt);
        let mut a = net.conductance.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += c_over_dt[i];
        }
        let factor =
            Cholesky::new(a).ok_or_else(|| Error::Model("transient step matrix is not positive definite".into()))?;
        Ok(TransientStepper { net, dt, c_over_dt, factor })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, state: &ThermalState, power: &[f64]) -> Result<ThermalState> {
        if state.temps.len() != self.net.node_count() {
            return Err(Error::config(format!(
                "state has {} nodes, network has {}",
                state.temps.len(),
                self.net.node_count()
            )));
        }
        let mut rhs = self.net.power_rhs(power)?;
        let amb = self.net.ambient;
        for (i, r) in rhs.iter_mut().enumerate() {
            *r += self.c_over_dt[i] * (state.temps[i] - amb);
        }
        self.factor.solve_mut(&mut rhs);
        Ok(ThermalState { temps: rhs.iter().map(|t| t + amb).collect(), time: state.time + self.dt })
    }
}
