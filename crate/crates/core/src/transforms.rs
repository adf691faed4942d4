//! Rigid migration functions on the mesh plane.
//!
//! Each function moves the whole plane at once, so workloads keep their
//! positions relative to each other. Coordinates are zero-based:
//!
//! | function      | new x              | new y              |
//! |---------------|--------------------|--------------------|
//! | rotation      | `N - 1 - y`        | `x`                |
//! | mirror x      | `nx - 1 - x`       | `y`                |
//! | translate x   | `(x + dx) mod nx`  | `y`                |
//!
//! plus the Y and XY variants by symmetry. Translation wraps so that every
//! function is a permutation of the cells.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Coord, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MigrationFunction {
    #[default]
    Identity,
    /// Quarter turn; square meshes only.
    Rotation,
    MirrorX,
    MirrorY,
    MirrorXY,
    TranslateX(i64),
    TranslateY(i64),
    TranslateXY(i64, i64),
}

impl MigrationFunction {
    /// The four schemes compared in the standard sweep.
    pub const STANDARD: [MigrationFunction; 4] = [
        MigrationFunction::Rotation,
        MigrationFunction::MirrorXY,
        MigrationFunction::TranslateX(1),
        MigrationFunction::TranslateXY(1, 1),
    ];

    /// Short tag used in scenario files and reports, without offsets.
    pub fn tag(&self) -> &'static str {
        match self {
            MigrationFunction::Identity => "identity",
            MigrationFunction::Rotation => "rotation",
            MigrationFunction::MirrorX => "mirror_x",
            MigrationFunction::MirrorY => "mirror_y",
            MigrationFunction::MirrorXY => "mirror_xy",
            MigrationFunction::TranslateX(_) => "translate_x",
            MigrationFunction::TranslateY(_) => "translate_y",
            MigrationFunction::TranslateXY(..) => "translate_xy",
        }
    }

    /// Builds a function from its tag and offsets. Offsets are ignored by
    /// the non-translating functions; `translate_x` uses `dx`, `translate_y`
    /// uses `dy`.
    pub fn from_tag(tag: &str, dx: i64, dy: i64) -> Result<Self> {
        Ok(match tag {
            "identity" | "none" => MigrationFunction::Identity,
            "rotation" | "rotate" => MigrationFunction::Rotation,
            "mirror_x" => MigrationFunction::MirrorX,
            "mirror_y" => MigrationFunction::MirrorY,
            "mirror_xy" => MigrationFunction::MirrorXY,
            "translate_x" => MigrationFunction::TranslateX(dx),
            "translate_y" => MigrationFunction::TranslateY(dy),
            "translate_xy" => MigrationFunction::TranslateXY(dx, dy),
            other => return Err(Error::config(format!("unknown migration function {other:?}"))),
        })
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, MigrationFunction::Identity)
    }

    /// Checks the function is defined on `grid`.
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if matches!(self, MigrationFunction::Rotation) && !grid.is_square() {
            return Err(Error::Unsupported(format!("rotation needs a square mesh, got {}x{}", grid.nx(), grid.ny())));
        }
        Ok(())
    }

    /// Destination of the workload currently at `c`.
    pub fn apply(&self, c: Coord, grid: &GridSpec) -> Result<Coord> {
        self.validate(grid)?;
        grid.check(c)?;
        Ok(self.apply_unchecked(c, grid))
    }

    fn apply_unchecked(&self, c: Coord, grid: &GridSpec) -> Coord {
        let (nx, ny) = (grid.nx(), grid.ny());
        let wrap = |v: usize, off: i64, n: usize| (v as i64 + off).rem_euclid(n as i64) as usize;
        match *self {
            MigrationFunction::Identity => c,
            MigrationFunction::Rotation => Coord::new(nx - 1 - c.y, c.x),
            MigrationFunction::MirrorX => Coord::new(nx - 1 - c.x, c.y),
            MigrationFunction::MirrorY => Coord::new(c.x, ny - 1 - c.y),
            MigrationFunction::MirrorXY => Coord::new(nx - 1 - c.x, ny - 1 - c.y),
            MigrationFunction::TranslateX(dx) => Coord::new(wrap(c.x, dx, nx), c.y),
            MigrationFunction::TranslateY(dy) => Coord::new(c.x, wrap(c.y, dy, ny)),
            MigrationFunction::TranslateXY(dx, dy) => Coord::new(wrap(c.x, dx, nx), wrap(c.y, dy, ny)),
        }
    }

    /// The induced permutation over all cells.
    pub fn as_permutation(&self, grid: &GridSpec) -> Result<Permutation> {
        self.validate(grid)?;
        let map = grid.cells().map(|c| grid.index(self.apply_unchecked(c, grid))).collect();
        Ok(Permutation { nx: grid.nx(), ny: grid.ny(), map })
    }

    /// Cells the function leaves in place, in row-major order.
    pub fn fixed_points(&self, grid: &GridSpec) -> Result<Vec<Coord>> {
        self.validate(grid)?;
        Ok(grid.cells().filter(|&c| self.apply_unchecked(c, grid) == c).collect())
    }
}

impl fmt::Display for MigrationFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MigrationFunction::TranslateX(dx) => write!(f, "translate_x:{dx}"),
            MigrationFunction::TranslateY(dy) => write!(f, "translate_y:{dy}"),
            MigrationFunction::TranslateXY(dx, dy) => write!(f, "translate_xy:{dx}:{dy}"),
            other => f.write_str(other.tag()),
        }
    }
}

/// Parses the compact form printed by `Display`: `rotation`, `mirror_xy`,
/// `translate_x:1`, `translate_xy:1:2`. Omitted offsets default to 1.
impl FromStr for MigrationFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let tag = parts.next().unwrap_or_default().to_ascii_lowercase();
        let mut offsets = Vec::new();
        for p in parts {
            offsets.push(
                p.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::config(format!("bad offset {p:?} in migration function {s:?}")))?,
            );
        }
        let (dx, dy) = match (tag.as_str(), offsets.as_slice()) {
            (_, []) => (1, 1),
            ("translate_y", [d]) => (1, *d),
            ("translate_x", [d]) => (*d, 1),
            ("translate_xy", [d]) => (*d, *d),
            ("translate_xy", [dx, dy]) => (*dx, *dy),
            _ => return Err(Error::config(format!("unexpected offsets in migration function {s:?}"))),
        };
        MigrationFunction::from_tag(&tag, dx, dy)
    }
}

/// A permutation of mesh cells: `map[old_index] = new_index`, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    nx: usize,
    ny: usize,
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(grid: &GridSpec) -> Self {
        Permutation { nx: grid.nx(), ny: grid.ny(), map: (0..grid.cell_count()).collect() }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn fits(&self, grid: &GridSpec) -> bool {
        self.nx == grid.nx() && self.ny == grid.ny()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, c: Coord) -> Coord {
        let j = self.map[c.y * self.nx + c.x];
        Coord::new(j % self.nx, j / self.nx)
    }

    /// True when every cell is hit exactly once.
    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.map.len()];
        self.map.iter().all(|&j| j < seen.len() && !std::mem::replace(&mut seen[j], true))
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `other ∘ self`: apply `self` first.
    pub fn then(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.dims(), other.dims(), "composing permutations of different meshes");
        Permutation { nx: self.nx, ny: self.ny, map: self.map.iter().map(|&j| other.map[j]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut map = vec![0; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            map[j] = i;
        }
        Permutation { nx: self.nx, ny: self.ny, map }
    }
}

/// Product of every migration applied since start.
///
/// Outside the chip, workloads are addressed by their logical (start-of-run)
/// coordinates. The migration unit at the I/O boundary rewrites destination
/// addresses of incoming packets with [`external_address`](Self::external_address)
/// and source addresses of outgoing packets with
/// [`internal_address`](Self::internal_address).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CumulativeTransform {
    composed: Permutation,
    inverse: Permutation,
}

impl CumulativeTransform {
    pub fn identity(grid: &GridSpec) -> Self {
        let p = Permutation::identity(grid);
        CumulativeTransform { inverse: p.clone(), composed: p }
    }

    /// `fn ∘ self`.
    pub fn compose(&self, f: MigrationFunction, grid: &GridSpec) -> Result<Self> {
        self.compose_permutation(&f.as_permutation(grid)?)
    }

    pub fn compose_permutation(&self, step: &Permutation) -> Result<Self> {
        if step.dims() != self.composed.dims() {
            return Err(Error::config("migration permutation does not match the mesh"));
        }
        let composed = self.composed.then(step);
        Ok(CumulativeTransform { inverse: composed.inverse(), composed })
    }

    pub fn permutation(&self) -> &Permutation {
        &self.composed
    }

    fn check(&self, c: Coord) -> Result<()> {
        let (nx, ny) = self.composed.dims();
        if c.x < nx && c.y < ny {
            Ok(())
        } else {
            Err(Error::OutOfBounds { x: c.x, y: c.y, nx, ny })
        }
    }

    /// Physical PE currently hosting the workload that started at `logical`.
    pub fn external_address(&self, logical: Coord) -> Result<Coord> {
        self.check(logical)?;
        Ok(self.composed.apply(logical))
    }

    /// Logical address of whatever currently runs on `physical`.
    pub fn internal_address(&self, physical: Coord) -> Result<Coord> {
        self.check(physical)?;
        Ok(self.inverse.apply(physical))
    }
}
