//! Physical and logical model of the chip: mesh geometry, coordinates, the
//! workload-to-PE mapping and per-workload power.
//!
//! Every PE hosts exactly one workload. PEs without real work carry a filler
//! workload that dissipates the profile's idle power, so a [`Mapping`] is
//! always a total bijection between workload ids `0..nx*ny` and mesh cells.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Default PE area in mm².
pub const DEFAULT_CELL_AREA_MM2: f64 = 4.36;
/// Default die thickness in mm.
pub const DEFAULT_DIE_THICKNESS_MM: f64 = 0.5;
/// Filler workloads dissipate this fraction of the mean active power unless
/// the profile says otherwise.
pub const DEFAULT_IDLE_FRACTION: f64 = 0.05;

pub type WorkloadId = usize;

/// Mesh dimensions and the physical geometry of one PE block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    nx: usize,
    ny: usize,
    cell_area_mm2: f64,
    die_thickness_mm: f64,
}

impl GridSpec {
    /// Builds a mesh of `nx` columns by `ny` rows of square PEs of
    /// `cell_area_mm2` each, with the default die thickness.
    pub fn new(nx: usize, ny: usize, cell_area_mm2: f64) -> Result<Self> {
        Self::with_thickness(nx, ny, cell_area_mm2, DEFAULT_DIE_THICKNESS_MM)
    }

    pub fn with_thickness(nx: usize, ny: usize, cell_area_mm2: f64, die_thickness_mm: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::config(format!("mesh dimensions must be >= 1, got {nx}x{ny}")));
        }
        if !(cell_area_mm2.is_finite() && cell_area_mm2 > 0.0) {
            return Err(Error::config(format!("cell area must be > 0 mm², got {cell_area_mm2}")));
        }
        if !(die_thickness_mm.is_finite() && die_thickness_mm > 0.0) {
            return Err(Error::config(format!("die thickness must be > 0 mm, got {die_thickness_mm}")));
        }
        Ok(GridSpec { nx, ny, cell_area_mm2, die_thickness_mm })
    }

    /// Square mesh with the default PE area.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n, DEFAULT_CELL_AREA_MM2)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn cell_area_mm2(&self) -> f64 {
        self.cell_area_mm2
    }

    pub fn die_thickness_mm(&self) -> f64 {
        self.die_thickness_mm
    }

    /// Side length of a square PE in mm.
    pub fn cell_side_mm(&self) -> f64 {
        self.cell_area_mm2.sqrt()
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_square(&self) -> bool {
        self.nx == self.ny
    }

    pub fn same_shape(&self, other: &GridSpec) -> bool {
        self.nx == other.nx && self.ny == other.ny
    }

    pub fn contains(&self, c: Coord) -> bool {
        c.x < self.nx && c.y < self.ny
    }

    pub fn check(&self, c: Coord) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::OutOfBounds { x: c.x, y: c.y, nx: self.nx, ny: self.ny })
        }
    }

    /// Row-major cell index.
    pub fn index(&self, c: Coord) -> usize {
        debug_assert!(self.contains(c));
        c.y * self.nx + c.x
    }

    pub fn coord(&self, index: usize) -> Coord {
        debug_assert!(index < self.cell_count());
        Coord::new(index % self.nx, index / self.nx)
    }

    /// All cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.cell_count()).map(move |i| self.coord(i))
    }

    /// The unique center cell, if both dimensions are odd.
    pub fn center(&self) -> Option<Coord> {
        (self.nx % 2 == 1 && self.ny % 2 == 1).then(|| Coord::new((self.nx - 1) / 2, (self.ny - 1) / 2))
    }
}

/// Column/row position of a PE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub x: usize,
    pub y: usize,
}

impl Coord {
    pub const fn new(x: usize, y: usize) -> Self {
        Coord { x, y }
    }

    pub fn manhattan(self, other: Coord) -> usize {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Bijection from workload ids to PE coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mapping {
    nx: usize,
    ny: usize,
    // workload id -> cell index
    location: Vec<usize>,
    // cell index -> workload id
    occupant: Vec<WorkloadId>,
}

impl Mapping {
    /// Workload `i` sits on row-major cell `i`.
    pub fn identity(grid: &GridSpec) -> Self {
        let n = grid.cell_count();
        Mapping { nx: grid.nx, ny: grid.ny, location: (0..n).collect(), occupant: (0..n).collect() }
    }

    /// Builds a mapping from `assignment[workload] = coord`, rejecting
    /// anything that is not a bijection onto the mesh.
    pub fn from_assignment(grid: &GridSpec, assignment: &[Coord]) -> Result<Self> {
        let n = grid.cell_count();
        if assignment.len() != n {
            return Err(Error::config(format!(
                "mapping lists {} workloads but the mesh has {n} cells",
                assignment.len()
            )));
        }
        let mut occupant = vec![usize::MAX; n];
        let mut location = Vec::with_capacity(n);
        for (w, &c) in assignment.iter().enumerate() {
            grid.check(c)?;
            let idx = grid.index(c);
            if occupant[idx] != usize::MAX {
                return Err(Error::config(format!("workloads {} and {w} both mapped to {c}", occupant[idx])));
            }
            occupant[idx] = w;
            location.push(idx);
        }
        Ok(Mapping { nx: grid.nx, ny: grid.ny, location, occupant })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn fits(&self, grid: &GridSpec) -> bool {
        self.nx == grid.nx && self.ny == grid.ny
    }

    pub fn len(&self) -> usize {
        self.location.len()
    }

    pub fn is_empty(&self) -> bool {
        self.location.is_empty()
    }

    pub fn coord_of(&self, workload: WorkloadId) -> Coord {
        let idx = self.location[workload];
        Coord::new(idx % self.nx, idx / self.nx)
    }

    pub fn workload_at(&self, c: Coord) -> WorkloadId {
        self.occupant[c.y * self.nx + c.x]
    }

    /// Coordinates indexed by workload id.
    pub fn assignment(&self) -> Vec<Coord> {
        (0..self.len()).map(|w| self.coord_of(w)).collect()
    }

    /// Exchanges the positions of two workloads.
    pub fn swap(&mut self, a: WorkloadId, b: WorkloadId) {
        let (ia, ib) = (self.location[a], self.location[b]);
        self.location.swap(a, b);
        self.occupant[ia] = b;
        self.occupant[ib] = a;
    }

    /// Moves every workload through `cell_map`, which sends old cell index to
    /// new cell index. The caller guarantees `cell_map` is a permutation.
    pub(crate) fn permuted(&self, cell_map: &[usize]) -> Mapping {
        let location: Vec<usize> = self.location.iter().map(|&i| cell_map[i]).collect();
        let mut occupant = vec![0; location.len()];
        for (w, &i) in location.iter().enumerate() {
            occupant[i] = w;
        }
        Mapping { nx: self.nx, ny: self.ny, location, occupant }
    }

    /// Per-cell power (row-major) induced by placing `profile`'s workloads.
    pub fn power_vector(&self, profile: &PowerProfile) -> Vec<f64> {
        self.occupant.iter().map(|&w| profile.power_of(w)).collect()
    }

    /// `workload_id,x,y` with a header line, one workload per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("workload_id,x,y\n");
        for w in 0..self.len() {
            let c = self.coord_of(w);
            out.push_str(&format!("{w},{},{}\n", c.x, c.y));
        }
        out
    }

    /// Parses the format written by [`Mapping::to_csv`]. Rows may appear in
    /// any order but must name every workload once.
    pub fn from_csv(grid: &GridSpec, text: &str) -> Result<Self> {
        let n = grid.cell_count();
        let mut slots: Vec<Option<Coord>> = vec![None; n];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("workload_id")) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|_| Error::config(format!("mapping line {}: bad integer {s:?}", lineno + 1)))
            };
            if fields.len() != 3 {
                return Err(Error::config(format!("mapping line {}: expected workload_id,x,y", lineno + 1)));
            }
            let (w, x, y) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
            if w >= n {
                return Err(Error::config(format!("mapping line {}: workload {w} >= {n}", lineno + 1)));
            }
            if slots[w].replace(Coord::new(x, y)).is_some() {
                return Err(Error::config(format!("mapping lists workload {w} twice")));
            }
        }
        let assignment = slots
            .into_iter()
            .enumerate()
            .map(|(w, c)| c.ok_or_else(|| Error::config(format!("mapping is missing workload {w}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_assignment(grid, &assignment)
    }
}

/// Time-averaged power per workload. Workloads absent from the map are
/// fillers and dissipate `idle_power`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProfile {
    workload_power: BTreeMap<WorkloadId, f64>,
    idle_power: f64,
}

impl PowerProfile {
    pub fn new(workload_power: BTreeMap<WorkloadId, f64>, idle_power: f64) -> Result<Self> {
        for (&w, &p) in &workload_power {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::config(format!("workload {w} power must be >= 0 W, got {p}")));
            }
        }
        if !(idle_power.is_finite() && idle_power >= 0.0) {
            return Err(Error::config(format!("idle power must be >= 0 W, got {idle_power}")));
        }
        Ok(PowerProfile { workload_power, idle_power })
    }

    /// Idle power defaults to a fixed fraction of the mean active power.
    pub fn with_default_idle(workload_power: BTreeMap<WorkloadId, f64>) -> Result<Self> {
        let idle = if workload_power.is_empty() {
            0.0
        } else {
            DEFAULT_IDLE_FRACTION * workload_power.values().sum::<f64>() / workload_power.len() as f64
        };
        Self::new(workload_power, idle)
    }

    pub fn power_of(&self, workload: WorkloadId) -> f64 {
        self.workload_power.get(&workload).copied().unwrap_or(self.idle_power)
    }

    pub fn idle_power(&self) -> f64 {
        self.idle_power
    }

    pub fn workload_power(&self) -> &BTreeMap<WorkloadId, f64> {
        &self.workload_power
    }

    /// Total power over `cells` workloads, fillers included.
    pub fn total_power(&self, cells: usize) -> f64 {
        (0..cells).map(|w| self.power_of(w)).sum()
    }

    pub fn is_degenerate(&self) -> bool {
        self.workload_power.values().all(|&p| p == 0.0)
    }

    /// Errors if the profile names workloads the mesh cannot host.
    pub fn check_fits(&self, grid: &GridSpec) -> Result<()> {
        match self.workload_power.keys().next_back() {
            Some(&w) if w >= grid.cell_count() => {
                Err(Error::config(format!("profile names workload {w} but the mesh has {} cells", grid.cell_count())))
            }
            _ => Ok(()),
        }
    }
}

/// One row of PEs dissipates `band_p`, the rest `base_p`.
///
/// Workload ids follow the returned identity mapping, so the band workloads
/// are `band_row * nx .. (band_row + 1) * nx`.
pub fn generate_warm_band(
    grid: &GridSpec,
    base_p: f64,
    band_p: f64,
    band_row: usize,
) -> Result<(PowerProfile, Mapping)> {
    if !(base_p.is_finite() && base_p >= 0.0) {
        return Err(Error::config(format!("base power must be >= 0 W, got {base_p}")));
    }
    if !(band_p.is_finite() && band_p > base_p) {
        return Err(Error::config(format!("band power ({band_p} W) must exceed base power ({base_p} W)")));
    }
    if band_row >= grid.ny() {
        return Err(Error::config(format!("band row {band_row} outside mesh of {} rows", grid.ny())));
    }
    let mapping = Mapping::identity(grid);
    let powers =
        grid.cells().map(|c| (mapping.workload_at(c), if c.y == band_row { band_p } else { base_p })).collect();
    Ok((PowerProfile::with_default_idle(powers)?, mapping))
}

/// A single hot workload on the center PE of an odd mesh.
pub fn generate_center_hotspot(grid: &GridSpec, base_p: f64, hot_p: f64) -> Result<(PowerProfile, Mapping)> {
    if !(base_p.is_finite() && base_p >= 0.0) {
        return Err(Error::config(format!("base power must be >= 0 W, got {base_p}")));
    }
    if !(hot_p.is_finite() && hot_p > base_p) {
        return Err(Error::config(format!("hotspot power ({hot_p} W) must exceed base power ({base_p} W)")));
    }
    let center = grid
        .center()
        .ok_or_else(|| Error::config(format!("{}x{} mesh has no unique center cell", grid.nx(), grid.ny())))?;
    let mapping = Mapping::identity(grid);
    let powers = grid.cells().map(|c| (mapping.workload_at(c), if c == center { hot_p } else { base_p })).collect();
    Ok((PowerProfile::with_default_idle(powers)?, mapping))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = GridSpec::new(4, 4, 4.36).unwrap();
        assert_eq!(g.cell_count(), 16);
        assert!((g.cell_side_mm() - 2.088).abs() < 1e-3);
        assert_eq!(GridSpec::new(1, 1, 1.0).unwrap().cell_count(), 1);
        assert_eq!(GridSpec::new(5, 5, 4.36).unwrap().cell_count(), 25);
    }

    #[test]
    fn grid_rejects_bad_dimensions() {
        assert!(matches!(GridSpec::new(0, 4, 4.36), Err(Error::Config(_))));
        assert!(matches!(GridSpec::new(4, 0, 4.36), Err(Error::Config(_))));
        assert!(matches!(GridSpec::new(4, 4, 0.0), Err(Error::Config(_))));
        assert!(matches!(GridSpec::new(4, 4, -1.0), Err(Error::Config(_))));
        assert!(matches!(GridSpec::with_thickness(4, 4, 4.36, 0.0), Err(Error::Config(_))));
    }

    #[test]
    fn index_round_trip() {
        let g = GridSpec::new(5, 3, 1.0).unwrap();
        for i in 0..g.cell_count() {
            assert_eq!(g.index(g.coord(i)), i);
        }
        assert!(g.check(Coord::new(5, 0)).is_err());
        assert_eq!(g.center(), Some(Coord::new(2, 1)));
        assert_eq!(GridSpec::square(4).unwrap().center(), None);
    }

    #[test]
    fn warm_band_profile() {
        let g = GridSpec::square(4).unwrap();
        let (profile, mapping) = generate_warm_band(&g, 0.5, 2.0, 1).unwrap();
        assert_eq!(mapping, Mapping::identity(&g));
        let power = mapping.power_vector(&profile);
        let hot: Vec<_> = g.cells().filter(|&c| power[g.index(c)] == 2.0).collect();
        assert_eq!(hot.len(), 4);
        assert!(hot.iter().all(|c| c.y == 1));
        assert_eq!(power.iter().filter(|&&p| p == 0.5).count(), 12);
        // 4 * 2.0 + 12 * 0.5
        assert!((profile.total_power(16) - 14.0).abs() < 1e-12);
        // idle defaults to 5 % of the mean
        assert!((profile.idle_power() - 0.05 * 14.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn warm_band_errors() {
        let g = GridSpec::square(4).unwrap();
        assert!(generate_warm_band(&g, 1.0, 1.0, 1).is_err());
        assert!(generate_warm_band(&g, 0.5, 2.0, 4).is_err());
        assert!(generate_warm_band(&g, -0.1, 2.0, 0).is_err());
    }

    #[test]
    fn center_hotspot_profile() {
        let g = GridSpec::square(5).unwrap();
        let (profile, mapping) = generate_center_hotspot(&g, 0.5, 3.0).unwrap();
        assert_eq!(profile.power_of(mapping.workload_at(Coord::new(2, 2))), 3.0);
        assert!((profile.total_power(25) - (3.0 + 24.0 * 0.5)).abs() < 1e-12);

        let g3 = GridSpec::square(3).unwrap();
        let (profile, mapping) = generate_center_hotspot(&g3, 0.0, 1.0).unwrap();
        let power = mapping.power_vector(&profile);
        assert_eq!(power, vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);

        assert!(generate_center_hotspot(&GridSpec::square(4).unwrap(), 0.5, 3.0).is_err());
        assert!(generate_center_hotspot(&g, 3.0, 3.0).is_err());
    }

    #[test]
    fn mapping_rejects_non_bijection() {
        let g = GridSpec::new(2, 1, 1.0).unwrap();
        assert!(Mapping::from_assignment(&g, &[Coord::new(0, 0), Coord::new(0, 0)]).is_err());
        assert!(Mapping::from_assignment(&g, &[Coord::new(0, 0)]).is_err());
        assert!(Mapping::from_assignment(&g, &[Coord::new(0, 0), Coord::new(2, 0)]).is_err());
        let m = Mapping::from_assignment(&g, &[Coord::new(1, 0), Coord::new(0, 0)]).unwrap();
        assert_eq!(m.workload_at(Coord::new(0, 0)), 1);
    }

    #[test]
    fn swap_keeps_inverse_consistent() {
        let g = GridSpec::square(3).unwrap();
        let mut m = Mapping::identity(&g);
        m.swap(0, 8);
        m.swap(4, 0);
        for w in 0..9 {
            assert_eq!(m.workload_at(m.coord_of(w)), w);
        }
        assert_eq!(m.coord_of(0), Coord::new(1, 1));
    }

    #[test]
    fn mapping_csv() {
        let g = GridSpec::new(3, 2, 1.0).unwrap();
        let mut m = Mapping::identity(&g);
        m.swap(1, 5);
        let text = m.to_csv();
        assert!(text.starts_with("workload_id,x,y\n0,0,0\n1,2,1\n"));
        assert_eq!(Mapping::from_csv(&g, &text).unwrap(), m);
        assert!(Mapping::from_csv(&g, "workload_id,x,y\n0,0,0\n").is_err());
        assert!(Mapping::from_csv(&g, "0,0,0\n0,1,0\n").is_err());
    }

    #[test]
    fn fillers_use_idle_power() {
        let profile = PowerProfile::new(BTreeMap::from([(0, 2.0)]), 0.1).unwrap();
        assert_eq!(profile.power_of(0), 2.0);
        assert_eq!(profile.power_of(7), 0.1);
        assert!(PowerProfile::new(BTreeMap::from([(0, -1.0)]), 0.1).is_err());
        assert!(profile.check_fits(&GridSpec::square(1).unwrap()).is_ok());
        let far = PowerProfile::new(BTreeMap::from([(9, 1.0)]), 0.0).unwrap();
        assert!(far.check_fits(&GridSpec::square(3).unwrap()).is_err());
    }
}
