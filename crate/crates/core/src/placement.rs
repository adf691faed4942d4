//! Thermally-aware static placement.
//!
//! Simulated annealing over pairwise workload swaps, minimising the
//! steady-state peak block temperature. The steady state is linear in the
//! block powers, so the annealer precomputes the block-to-block influence
//! matrix once and evaluates each candidate with a single mat-vec.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Mapping, PowerProfile};
use crate::thermal::{steady_state, ThermalNetwork};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealConfig {
    pub iterations: usize,
    /// Initial annealing temperature, in °C of objective.
    pub t_start: f64,
    pub t_end: f64,
    pub seed: u64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig { iterations: 20_000, t_start: 1.0, t_end: 1e-3, seed: 1 }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::config("annealing needs at least one iteration"));
        }
        if !(self.t_end > 0.0 && self.t_start > self.t_end && self.t_start.is_finite()) {
            return Err(Error::config(format!(
                "annealing temperatures need t_start > t_end > 0, got {} and {}",
                self.t_start, self.t_end
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub mapping: Mapping,
    /// Steady-state peak of `mapping`, °C.
    pub peak: f64,
}

/// Steady-state peak block temperature of `mapping`, °C.
pub fn evaluate(mapping: &Mapping, profile: &PowerProfile, net: &ThermalNetwork) -> Result<f64> {
    if mapping.len() != net.block_count() {
        return Err(Error::config(format!(
            "mapping covers {} PEs, network has {} blocks",
            mapping.len(),
            net.block_count()
        )));
    }
    Ok(steady_state(net, &mapping.power_vector(profile))?.peak())
}

/// Anneals from the identity mapping and returns the best mapping seen.
pub fn place(profile: &PowerProfile, grid: &GridSpec, net: &ThermalNetwork, cfg: &AnnealConfig) -> Result<Placement> {
    cfg.validate()?;
    profile.check_fits(grid)?;
    let n = grid.cell_count();
    if net.block_count() != n {
        return Err(Error::config("thermal network does not match the mesh"));
    }

    // influence[i * n + j]: rise at block i per watt at block j
    let mut influence = vec![0.0; n * n];
    let mut unit = vec![0.0; n];
    for j in 0..n {
        unit[j] = 1.0;
        let s = steady_state(net, &unit)?;
        for i in 0..n {
            influence[i * n + j] = s.temps[i] - net.ambient();
        }
        unit[j] = 0.0;
    }
    let peak_rise = |power: &[f64]| -> f64 {
        influence
            .chunks_exact(n)
            .map(|row| row.iter().zip(power).map(|(r, p)| r * p).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    };

    let mut current = Mapping::identity(grid);
    let mut power = current.power_vector(profile);
    let mut current_cost = peak_rise(&power);
    let mut best = current.clone();
    let mut best_cost = current_cost;

    if n >= 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let cooling = (cfg.t_end / cfg.t_start).ln();
        let last = (cfg.iterations - 1).max(1) as f64;
        for k in 0..cfg.iterations {
            let temperature = cfg.t_start * (cooling * k as f64 / last).exp();
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            if power[a] == power[b] {
                continue;
            }
            power.swap(a, b);
            let cost = peak_rise(&power);
            let delta = cost - current_cost;
            if delta <= 0.0 || rng.random::<f64>() < (-delta / temperature).exp() {
                let (wa, wb) = (current.workload_at(grid.coord(a)), current.workload_at(grid.coord(b)));
                current.swap(wa, wb);
                current_cost = cost;
                if cost < best_cost {
                    best_cost = cost;
                    best = current.clone();
                }
            } else {
                power.swap(a, b);
            }
        }
    }

    let peak = evaluate(&best, profile, net)?;
    Ok(Placement { mapping: best, peak })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::grid::{generate_warm_band, Coord};
    use crate::thermal::{build_network, ThermalParams};

    fn setup(n: usize) -> (GridSpec, ThermalNetwork) {
        let g = GridSpec::square(n).unwrap();
        let net = build_network(&g, &ThermalParams::default()).unwrap();
        (g, net)
    }

    #[test]
    fn evaluate_examples() {
        let (g, net) = setup(3);
        let zero = PowerProfile::new(BTreeMap::new(), 0.0).unwrap();
        assert_eq!(evaluate(&Mapping::identity(&g), &zero, &net).unwrap(), 40.0);

        let (g1, net1) = setup(1);
        let one = PowerProfile::new(BTreeMap::from([(0, 1.0)]), 0.0).unwrap();
        assert!((evaluate(&Mapping::identity(&g1), &one, &net1).unwrap() - 42.5).abs() < 1e-12);

        let uniform = PowerProfile::new((0..9).map(|w| (w, 0.7)).collect(), 0.0).unwrap();
        let mut m = Mapping::identity(&g);
        let before = evaluate(&m, &uniform, &net).unwrap();
        m.swap(0, 4);
        assert_eq!(evaluate(&m, &uniform, &net).unwrap(), before);

        assert!(evaluate(&Mapping::identity(&GridSpec::square(2).unwrap()), &zero, &net).is_err());
    }

    #[test]
    fn equal_powers_keep_identity_peak() {
        let (g, net) = setup(3);
        let uniform = PowerProfile::new((0..9).map(|w| (w, 1.0)).collect(), 0.0).unwrap();
        let placed = place(&uniform, &g, &net, &AnnealConfig::default()).unwrap();
        let identity_peak = evaluate(&Mapping::identity(&g), &uniform, &net).unwrap();
        assert_eq!(placed.peak, identity_peak);
    }

    #[test]
    fn hot_workload_goes_to_center() {
        let (g, net) = setup(3);
        let mut powers: BTreeMap<_, _> = (0..9).map(|w| (w, 0.5)).collect();
        powers.insert(0, 3.0);
        let profile = PowerProfile::new(powers, 0.0).unwrap();
        let cfg = AnnealConfig { iterations: 2000, ..Default::default() };
        let placed = place(&profile, &g, &net, &cfg).unwrap();
        assert_eq!(placed.mapping.coord_of(0), Coord::new(1, 1));
    }

    #[test]
    fn warm_band_never_gets_worse() {
        let (g, net) = setup(4);
        let (profile, start) = generate_warm_band(&g, 0.5, 2.0, 1).unwrap();
        let cfg = AnnealConfig { iterations: 3000, seed: 7, ..Default::default() };
        let placed = place(&profile, &g, &net, &cfg).unwrap();
        assert!(placed.peak <= evaluate(&start, &profile, &net).unwrap());
        assert_eq!(placed.peak, evaluate(&placed.mapping, &profile, &net).unwrap());
        assert_eq!(place(&profile, &g, &net, &cfg).unwrap(), placed);
    }

    #[test]
    fn config_validation() {
        let bad = [
            AnnealConfig { iterations: 0, ..Default::default() },
            AnnealConfig { t_start: 1e-3, t_end: 1.0, ..Default::default() },
            AnnealConfig { t_end: 0.0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err());
        }
    }
}
