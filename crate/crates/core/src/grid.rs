//! Shared uniform frequency grid.
//!
//! All Green's functions (electron and photon) live on one grid so that the
//! self-energy convolutions, which mix electron frequencies ~ ±omega21/2 with
//! photon frequencies ~ ±omega21, stay on-grid: the layout
//! `omega_i = (i - n/2) d_omega` makes every pairwise sum/difference of grid
//! points another grid point and places omega = 0 exactly on the grid (where
//! theta(0) = 1/2 and sgn(0) = 0 are evaluated).

use serde::Serialize;

use crate::error::CoreError;
use crate::params::SystemParams;
use crate::Result;

pub const MIN_POINTS: usize = 1 << 14;
pub const DEFAULT_POINTS: usize = 1 << 15;
pub const MAX_POINTS: usize = 1 << 17;
/// Above this chain length the N^2 frequency stacks dominate memory, so the
/// automatic sizing caps the grid one octave lower.
const LARGE_CHAIN: usize = 8;
const LARGE_CHAIN_MAX_POINTS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyGrid {
    pub n_points: usize,
    pub d_omega: f64,
    /// Lorentzian half-width replacing the free-propagator delta functions.
    pub eta: f64,
}

impl FrequencyGrid {
    /// Grid of `n_points` (even) spanning [-half_width, half_width - d_omega]
    /// with delta width `eta = eta_factor * d_omega`.
    pub fn symmetric(half_width: f64, n_points: usize, eta_factor: f64) -> Result<Self> {
        if n_points < 16 || n_points % 2 != 0 {
            return Err(CoreError::InvalidParams(format!(
                "n_points = {n_points} must be even and >= 16"
            )));
        }
        if !(half_width > 0.0) {
            return Err(CoreError::InvalidParams(format!(
                "half_width = {half_width} must be > 0"
            )));
        }
        let d_omega = 2.0 * half_width / n_points as f64;
        let eta = eta_factor * d_omega;
        let grid = FrequencyGrid {
            n_points,
            d_omega,
            eta,
        };
        grid.check_eta()?;
        Ok(grid)
    }

    /// Auto-sized grid: spans both bands and the cavity line with margin
    /// `max(0.25, 10 max(kappa, gamma, g sqrt(N)))` on each side, and targets
    /// a spacing that resolves the lead-broadened Bloch lines.
    pub fn for_params(params: &SystemParams, n_override: Option<usize>) -> Result<Self> {
        let n = params.n_sites as f64;
        let margin = 0.25_f64
            .max(10.0 * params.kappa)
            .max(10.0 * params.gamma1)
            .max(10.0 * params.gamma2)
            .max(10.0 * params.g * n.sqrt());
        let reach = (params.omega1.abs() + 2.0 * params.t1)
            .max(params.omega2.abs() + 2.0 * params.t2)
            .max(params.omega_c.abs());
        let half_width = reach + margin;

        let n_points = match n_override {
            Some(np) => np,
            None => {
                // Per-mode lead broadening shrinks roughly like gamma/(N+1),
                // so the target spacing follows the chain length.
                let d_target =
                    params.gamma1.min(params.gamma2) * (0.25_f64).min(1.0 / (n + 1.0));
                let want = (2.0 * half_width / d_target).ceil() as usize;
                let cap = if params.n_sites >= LARGE_CHAIN {
                    LARGE_CHAIN_MAX_POINTS
                } else {
                    MAX_POINTS
                };
                want.next_power_of_two().clamp(DEFAULT_POINTS, cap)
            }
        };
        Self::symmetric(half_width, n_points, 4.0)
    }

    fn check_eta(&self) -> Result<()> {
        if self.eta < 2.0 * self.d_omega {
            return Err(CoreError::GridTooCoarse(format!(
                "eta = {:.3e} must be >= 2 d_omega = {:.3e} for the delta-function Lorentzians to be resolvable",
                self.eta,
                2.0 * self.d_omega
            )));
        }
        Ok(())
    }

    /// Replace eta (e.g. from a CLI override), revalidating the 2 d_omega floor.
    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        self.eta = eta;
        self.check_eta()?;
        Ok(self)
    }

    #[inline]
    pub fn omega(&self, i: usize) -> f64 {
        (i as isize - (self.n_points / 2) as isize) as f64 * self.d_omega
    }

    /// Index of omega = 0 (exact grid point).
    #[inline]
    pub fn zero_index(&self) -> usize {
        self.n_points / 2
    }

    pub fn omega_min(&self) -> f64 {
        self.omega(0)
    }

    pub fn omega_max(&self) -> f64 {
        self.omega(self.n_points - 1)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.omega(i)).collect()
    }

    /// Nearest grid index to `omega` (clamped).
    pub fn nearest(&self, omega: f64) -> usize {
        let raw = omega / self.d_omega + (self.n_points / 2) as f64;
        raw.round().clamp(0.0, (self.n_points - 1) as f64) as usize
    }

    /// Trapezoid integral of samples over the full grid. For smooth decaying
    /// integrands on a uniform grid this is spectrally accurate.
    pub fn integrate(&self, samples: impl Iterator<Item = f64>) -> f64 {
        samples.sum::<f64>() * self.d_omega
    }

    /// Verifies that the grid covers the interval the solver needs.
    pub fn check_covers(&self, params: &SystemParams) -> Result<()> {
        let reach = (params.omega1.abs() + 2.0 * params.t1)
            .max(params.omega2.abs() + 2.0 * params.t2)
            .max(params.omega_c.abs());
        if self.omega_max() < reach + 0.05 || -self.omega_min() < reach + 0.05 {
            return Err(CoreError::GridTooCoarse(format!(
                "grid [{:.3}, {:.3}] does not cover the spectral range +-{:.3}",
                self.omega_min(),
                self.omega_max(),
                reach
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SystemParams {
        SystemParams {
            n_sites: 3,
            t1: 1e-4,
            t2: 1e-2,
            gamma1: 1e-3,
            gamma2: 1e-3,
            omega1: -0.5,
            omega2: 0.5,
            omega_c: 1.0,
            kappa: 0.07,
            g: 2.65e-3,
        }
    }

    #[test]
    fn zero_is_on_grid_and_spacing_uniform() {
        let g = FrequencyGrid::symmetric(1.25, 1 << 10, 4.0).unwrap();
        assert_eq!(g.omega(g.zero_index()), 0.0);
        let vals = g.values();
        for w in vals.windows(2) {
            assert!((w[1] - w[0] - g.d_omega).abs() < 1e-15);
        }
        assert!((g.omega_min() + 1.25).abs() < 1e-12);
        // Sum/difference closure: omega_i + omega_j lands on the extended lattice.
        let s = g.omega(100) + g.omega(731);
        assert!((s / g.d_omega - (s / g.d_omega).round()).abs() < 1e-9);
    }

    #[test]
    fn eta_floor_enforced() {
        assert!(FrequencyGrid::symmetric(1.0, 1 << 10, 1.0).is_err());
        let g = FrequencyGrid::symmetric(1.0, 1 << 10, 4.0).unwrap();
        assert!(g.with_eta(g.d_omega).is_err());
    }

    #[test]
    fn auto_grid_covers_bands_and_cavity() {
        let p = params();
        let g = FrequencyGrid::for_params(&p, None).unwrap();
        // kappa = 0.07 drives the margin: W = 1 + 0.7.
        assert!((g.omega_max().abs() - 1.7).abs() < 0.01);
        g.check_covers(&p).unwrap();
        assert!(g.n_points >= DEFAULT_POINTS);
        assert!((g.eta - 4.0 * g.d_omega).abs() < 1e-15);
    }

    #[test]
    fn auto_grid_caps_long_chains() {
        let mut p = params();
        p.n_sites = 11;
        p.t2 = 0.1;
        p.kappa = 1e-4;
        p.gamma1 = 5e-4;
        p.gamma2 = 5e-4;
        p.g = 2.2e-3;
        let g = FrequencyGrid::for_params(&p, None).unwrap();
        assert!(g.n_points <= LARGE_CHAIN_MAX_POINTS);
    }

    #[test]
    fn nearest_rounds_to_grid() {
        let g = FrequencyGrid::symmetric(2.0, 1 << 8, 4.0).unwrap();
        let i = g.nearest(0.5004);
        assert!((g.omega(i) - 0.5004).abs() <= g.d_omega / 2.0 + 1e-12);
    }
}
