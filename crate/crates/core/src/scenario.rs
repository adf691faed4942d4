//! Scenario configuration and its on-disk TOML form.
//!
//! A scenario file holds one scenario in five sections. Physical quantities
//! carry their unit in the key name:
//!
//! ```toml
//! name = "warm-band-4x4"          # optional, defaults to the file stem
//!
//! [grid]
//! nx = 4
//! ny = 4
//! cell_area_mm2 = 4.36
//! die_thickness_mm = 0.5
//!
//! [profile]
//! kind = "warm_band"              # warm_band | center_hotspot | explicit
//! base_power_w = 0.5
//! band_power_w = 2.0              # warm_band
//! band_row = 1                    # warm_band
//! # hot_power_w = 3.0             # center_hotspot
//! # power_w = [1.0, 0.5, ...]     # explicit, indexed by workload id
//! # idle_power_w = 0.04           # filler power, default 5 % of mean active
//! mapping = "identity"            # identity | auto | path to workload_id,x,y CSV
//!
//! [migration]
//! function = "translate_xy"       # identity rotation mirror_x mirror_y mirror_xy
//!                                 # translate_x translate_y translate_xy
//! dx = 1
//! dy = 1
//! period_us = 109.0
//! state_bits = 16384
//! e_bit_hop_pj = 2.0
//! downtime_mode = "fixed"         # fixed | detailed
//! downtime_us = 1.744
//! t_bit_hop_ps = 62.5
//! deposit_energy = true
//! stall_scope = "moving"          # moving | all
//!
//! [thermal]
//! k_si_w_per_m_k = 150.0
//! c_v_j_per_m3_k = 1.75e6
//! r_vertical_k_per_w = 2.0
//! r_sink_k_per_w = 0.5
//! c_sink_j_per_k = 10.0
//! ambient_c = 40.0
//!
//! [sim]
//! duration_us = 50000.0
//! warmup_us = 25000.0
//! dt_us = 1.0
//! seed = 1
//! anneal_iterations = 20000
//! anneal_t_start = 1.0
//! anneal_t_end = 0.001
//! ```
//!
//! Every key except `[grid] nx`/`ny` and the profile powers has a default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::{
    generate_center_hotspot, generate_warm_band, GridSpec, Mapping, PowerProfile, DEFAULT_CELL_AREA_MM2,
    DEFAULT_DIE_THICKNESS_MM,
};
use crate::migration::{DowntimeMode, MigrationCostParams, CALIBRATED_DOWNTIME_S};
use crate::placement::AnnealConfig;
use crate::thermal::ThermalParams;
use crate::transforms::MigrationFunction;

/// Where the run's starting mapping comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialMapping {
    Given(Mapping),
    /// Thermally-aware placement by annealing.
    Auto,
}

/// Which PEs halt during a migration stall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StallScope {
    /// Only PEs whose workload moves; fixed points keep computing.
    #[default]
    Moving,
    /// Every PE on the chip.
    All,
}

/// Time stepping and statistics window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    /// s
    pub duration: f64,
    /// Statistics ignore `[0, warmup)`, s.
    pub warmup: f64,
    /// s
    pub dt: f64,
    /// Inject migration energy as heat at each event.
    pub deposit_energy: bool,
    pub stall_scope: StallScope,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams { duration: 50e-3, warmup: 25e-3, dt: 1e-6, deposit_energy: true, stall_scope: StallScope::Moving }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub grid: GridSpec,
    pub profile: PowerProfile,
    pub initial_mapping: InitialMapping,
    pub migration_fn: MigrationFunction,
    /// Migration period, s.
    pub period: f64,
    pub sim: SimParams,
    pub thermal: ThermalParams,
    pub cost: MigrationCostParams,
    pub anneal: AnnealConfig,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Scenario with default physics, a 109 µs period and the given
    /// profile on its identity mapping.
    pub fn new(name: impl Into<String>, grid: GridSpec, profile: PowerProfile, mapping: Mapping) -> Self {
        ScenarioConfig {
            name: name.into(),
            grid,
            profile,
            initial_mapping: InitialMapping::Given(mapping),
            migration_fn: MigrationFunction::Identity,
            period: 109e-6,
            sim: SimParams::default(),
            thermal: ThermalParams::default(),
            cost: MigrationCostParams::default(),
            anneal: AnnealConfig::default(),
            seed: 1,
        }
    }

    /// 4x4 mesh, row 1 at 2.0 W and the rest at 0.5 W.
    pub fn warm_band_4x4() -> Self {
        let grid = GridSpec::square(4).expect("valid mesh");
        let (profile, mapping) = generate_warm_band(&grid, 0.5, 2.0, 1).expect("valid band");
        Self::new("warm-band-4x4", grid, profile, mapping)
    }

    /// 5x5 mesh, center PE at 3.0 W and the rest at 0.5 W.
    pub fn center_hotspot_5x5() -> Self {
        let grid = GridSpec::square(5).expect("valid mesh");
        let (profile, mapping) = generate_center_hotspot(&grid, 0.5, 3.0).expect("valid hotspot");
        Self::new("center-hotspot-5x5", grid, profile, mapping)
    }

    pub fn with_function(mut self, f: MigrationFunction) -> Self {
        self.migration_fn = f;
        self
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.period = period;
        self
    }

    pub fn migration_enabled(&self) -> bool {
        !self.migration_fn.is_identity()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(Error::config(format!("migration period must be > 0, got {} s", self.period)));
        }
        let sim = &self.sim;
        if !(sim.dt.is_finite() && sim.dt > 0.0) {
            return Err(Error::config(format!("time step must be > 0, got {} s", sim.dt)));
        }
        if !(sim.duration.is_finite() && sim.duration >= sim.dt) {
            return Err(Error::config(format!("duration must cover at least one step, got {} s", sim.duration)));
        }
        if !(sim.warmup >= 0.0 && sim.warmup < sim.duration) {
            return Err(Error::config(format!(
                "warm-up ({} s) must lie in [0, duration = {} s)",
                sim.warmup, sim.duration
            )));
        }
        if self.migration_enabled() && sim.duration < self.period {
            return Err(Error::config(format!(
                "duration ({} s) is shorter than the migration period ({} s)",
                sim.duration, self.period
            )));
        }
        self.thermal.validate()?;
        self.cost.validate()?;
        self.migration_fn.validate(&self.grid)?;
        self.profile.check_fits(&self.grid)?;
        if let InitialMapping::Given(m) = &self.initial_mapping {
            if !m.fits(&self.grid) {
                return Err(Error::config("initial mapping does not match the mesh"));
            }
        } else {
            self.anneal_config().validate()?;
        }
        Ok(())
    }

    /// Annealing settings with the scenario seed applied.
    pub fn anneal_config(&self) -> AnnealConfig {
        AnnealConfig { seed: self.seed, ..self.anneal }
    }

    /// Reads and validates a scenario file. Relative mapping paths resolve
    /// against the file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ScenarioFile = toml::from_str(&text)
            .map_err(|e| Error::Parse { path: path.to_owned(), message: toml_message(&text, &e) })?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        let base = path.parent().unwrap_or(Path::new("."));
        file.resolve(stem, base)
    }

    pub fn from_toml_str(text: &str, default_name: &str, base_dir: &Path) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text)
            .map_err(|e| Error::Parse { path: PathBuf::from(default_name), message: toml_message(text, &e) })?;
        file.resolve(default_name, base_dir)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: Option<String>,
    grid: GridSection,
    profile: ProfileSection,
    #[serde(default)]
    migration: MigrationSection,
    #[serde(default)]
    thermal: ThermalSection,
    #[serde(default)]
    sim: SimSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    nx: usize,
    ny: usize,
    #[serde(default = "default_cell_area")]
    cell_area_mm2: f64,
    #[serde(default = "default_thickness")]
    die_thickness_mm: f64,
}

fn default_cell_area() -> f64 {
    DEFAULT_CELL_AREA_MM2
}

fn default_thickness() -> f64 {
    DEFAULT_DIE_THICKNESS_MM
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ProfileKind {
    WarmBand,
    CenterHotspot,
    Explicit,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileSection {
    kind: ProfileKind,
    base_power_w: Option<f64>,
    band_power_w: Option<f64>,
    band_row: Option<usize>,
    hot_power_w: Option<f64>,
    power_w: Option<Vec<f64>>,
    idle_power_w: Option<f64>,
    #[serde(default = "default_mapping")]
    mapping: String,
}

fn default_mapping() -> String {
    "identity".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct MigrationSection {
    function: String,
    dx: i64,
    dy: i64,
    period_us: f64,
    state_bits: f64,
    e_bit_hop_pj: f64,
    downtime_mode: String,
    downtime_us: f64,
    t_bit_hop_ps: f64,
    deposit_energy: bool,
    stall_scope: String,
}

impl Default for MigrationSection {
    fn default() -> Self {
        let cost = MigrationCostParams::default();
        MigrationSection {
            function: "identity".into(),
            dx: 1,
            dy: 1,
            period_us: 109.0,
            state_bits: cost.state_bits,
            e_bit_hop_pj: cost.e_bit_hop * 1e12,
            downtime_mode: "fixed".into(),
            downtime_us: CALIBRATED_DOWNTIME_S * 1e6,
            t_bit_hop_ps: cost.t_bit_hop * 1e12,
            deposit_energy: true,
            stall_scope: "moving".into(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ThermalSection {
    k_si_w_per_m_k: f64,
    c_v_j_per_m3_k: f64,
    r_vertical_k_per_w: f64,
    r_sink_k_per_w: f64,
    c_sink_j_per_k: f64,
    ambient_c: f64,
}

impl Default for ThermalSection {
    fn default() -> Self {
        let p = ThermalParams::default();
        ThermalSection {
            k_si_w_per_m_k: p.k_si,
            c_v_j_per_m3_k: p.c_v,
            r_vertical_k_per_w: p.r_vertical,
            r_sink_k_per_w: p.r_sink,
            c_sink_j_per_k: p.c_sink,
            ambient_c: p.ambient,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SimSection {
    duration_us: f64,
    warmup_us: f64,
    dt_us: f64,
    seed: u64,
    anneal_iterations: usize,
    anneal_t_start: f64,
    anneal_t_end: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        let sim = SimParams::default();
        let anneal = AnnealConfig::default();
        SimSection {
            duration_us: sim.duration * 1e6,
            warmup_us: sim.warmup * 1e6,
            dt_us: sim.dt * 1e6,
            seed: 1,
            anneal_iterations: anneal.iterations,
            anneal_t_start: anneal.t_start,
            anneal_t_end: anneal.t_end,
        }
    }
}

fn required(value: Option<f64>, key: &str) -> Result<f64> {
    value.ok_or_else(|| Error::config(format!("[profile] is missing {key}")))
}

impl ScenarioFile {
    fn resolve(self, default_name: &str, base_dir: &Path) -> Result<ScenarioConfig> {
        let g = &self.grid;
        let grid = GridSpec::with_thickness(g.nx, g.ny, g.cell_area_mm2, g.die_thickness_mm)?;

        let p = &self.profile;
        let mut profile = match p.kind {
            ProfileKind::WarmBand => {
                let row = p.band_row.ok_or_else(|| Error::config("[profile] is missing band_row"))?;
                generate_warm_band(
                    &grid,
                    required(p.base_power_w, "base_power_w")?,
                    required(p.band_power_w, "band_power_w")?,
                    row,
                )?
                .0
            }
            ProfileKind::CenterHotspot => {
                generate_center_hotspot(
                    &grid,
                    required(p.base_power_w, "base_power_w")?,
                    required(p.hot_power_w, "hot_power_w")?,
                )?
                .0
            }
            ProfileKind::Explicit => {
                let powers = p.power_w.as_ref().ok_or_else(|| Error::config("[profile] is missing power_w"))?;
                if powers.len() > grid.cell_count() {
                    return Err(Error::config(format!(
                        "power_w lists {} workloads, mesh has {} cells",
                        powers.len(),
                        grid.cell_count()
                    )));
                }
                PowerProfile::with_default_idle(powers.iter().copied().enumerate().collect::<BTreeMap<_, _>>())?
            }
        };
        if let Some(idle) = p.idle_power_w {
            profile = PowerProfile::new(profile.workload_power().clone(), idle)?;
        }

        let initial_mapping = match p.mapping.as_str() {
            "identity" => InitialMapping::Given(Mapping::identity(&grid)),
            "auto" => InitialMapping::Auto,
            file => {
                let path = base_dir.join(file);
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                let mapping = Mapping::from_csv(&grid, &text)
                    .map_err(|e| Error::Parse { path: path.clone(), message: e.to_string() })?;
                InitialMapping::Given(mapping)
            }
        };

        let m = &self.migration;
        let migration_fn = MigrationFunction::from_tag(&m.function, m.dx, m.dy)?;
        let mode = match m.downtime_mode.as_str() {
            "fixed" => DowntimeMode::Fixed,
            "detailed" => DowntimeMode::Detailed,
            other => return Err(Error::config(format!("unknown downtime_mode {other:?}"))),
        };
        let stall_scope = match m.stall_scope.as_str() {
            "moving" => StallScope::Moving,
            "all" => StallScope::All,
            other => return Err(Error::config(format!("unknown stall_scope {other:?}"))),
        };
        let cost = MigrationCostParams {
            state_bits: m.state_bits,
            e_bit_hop: m.e_bit_hop_pj * 1e-12,
            downtime_fixed: m.downtime_us * 1e-6,
            t_bit_hop: m.t_bit_hop_ps * 1e-12,
            mode,
        };

        let t = &self.thermal;
        let thermal = ThermalParams {
            k_si: t.k_si_w_per_m_k,
            c_v: t.c_v_j_per_m3_k,
            r_vertical: t.r_vertical_k_per_w,
            r_sink: t.r_sink_k_per_w,
            c_sink: t.c_sink_j_per_k,
            ambient: t.ambient_c,
        };

        let s = &self.sim;
        let cfg = ScenarioConfig {
            name: self.name.clone().unwrap_or_else(|| default_name.to_owned()),
            grid,
            profile,
            initial_mapping,
            migration_fn,
            period: m.period_us * 1e-6,
            sim: SimParams {
                duration: s.duration_us * 1e-6,
                warmup: s.warmup_us * 1e-6,
                dt: s.dt_us * 1e-6,
                deposit_energy: m.deposit_energy,
                stall_scope,
            },
            thermal,
            cost,
            anneal: AnnealConfig {
                iterations: s.anneal_iterations,
                t_start: s.anneal_t_start,
                t_end: s.anneal_t_end,
                seed: s.seed,
            },
            seed: s.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Single-line form of a TOML error: `line L, column C: message`.
fn toml_message(text: &str, e: &toml::de::Error) -> String {
    let message = e.message().trim().replace('\n', " ");
    match e.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            format!("line {line}, column {column}: {message}")
        }
        None => message,
    }
}
