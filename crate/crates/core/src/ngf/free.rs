//! Free propagators used to seed the self-consistent loop.
//!
//! Electron seeds are Bloch-diagonal with an eta-regularized delta peak per
//! state,
//!
//!   G0^r_k(w)  = 1 / (w - w_k + i eta),
//!   G0^<_k(w)  = +2 pi i n0     delta_eta(w - w_k),
//!   G0^>_k(w)  = -2 pi i (1-n0) delta_eta(w - w_k),
//!
//! which obey i(G^> - G^<) = -2 Im G^r exactly for any eta. The photon seed
//! is the displacement propagator of a cavity damped by a flat Markovian
//! bath,
//!
//!   D^r(w)  = 2 w_c / (w^2 - w_c^2 + i kappa w_c sgn w),
//!   Pi^<_P  = -i kappa theta(-w),   Pi^>_P = -i kappa theta(+w),
//!   D^<>    = |D^r|^2 Pi^<>_P,
//!
//! whose lesser component integrates to photon number zero: the empty cavity.

use crate::bloch::BlochBasis;
use crate::grid::FrequencyGrid;
use crate::ngf::{BandBlock, ElectronGf, PhotonGf};
use crate::{C64, CoreError, Result, SystemParams};

/// Initial band occupations seeding the iteration. The converged solution
/// must not depend on them; that invariance is part of the test suite.
#[derive(Clone, Copy, Debug)]
pub struct Filling {
    pub lower: f64,
    pub upper: f64,
}

impl Default for Filling {
    fn default() -> Self {
        Filling {
            lower: 1.0,
            upper: 0.0,
        }
    }
}

impl Filling {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lower", self.lower), ("upper", self.upper)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(CoreError::InvalidParams(format!(
                    "filling.{name} = {v} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn band(&self, band: usize) -> f64 {
        match band {
            0 => self.lower,
            1 => self.upper,
            _ => panic!("band index {band} out of range"),
        }
    }
}

/// Bloch-diagonal eta-smeared electron seed for both bands.
pub fn free_electron(
    params: &SystemParams,
    bloch: &BlochBasis,
    grid: &FrequencyGrid,
    filling: Filling,
) -> ElectronGf {
    let n = bloch.n;
    let l = grid.n_points;
    let eta = grid.eta;
    let mut gf = ElectronGf::zeros(n, l);
    for band in 0..2 {
        let n0 = filling.band(band);
        let disp = bloch.dispersion(params, band);
        let block: &mut BandBlock = &mut gf.bands[band];
        for (k, &wk) in disp.iter().enumerate() {
            for i in 0..l {
                let x = grid.omega(i) - wk;
                let delta = (eta / std::f64::consts::PI) / (x * x + eta * eta);
                block.retarded[[k, k, i]] = C64::new(1.0, 0.0) / C64::new(x, eta);
                block.lesser[[k, k, i]] =
                    C64::new(0.0, 2.0 * std::f64::consts::PI * n0 * delta);
                block.greater[[k, k, i]] =
                    C64::new(0.0, -2.0 * std::f64::consts::PI * (1.0 - n0) * delta);
            }
        }
    }
    gf
}

/// Heaviside with the symmetric midpoint convention theta(0) = 1/2, so the
/// bath self-energies are odd/even partners on a grid containing w = 0.
pub fn theta(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// Bath-only photon self-energies: Pi^<_P = -i kappa theta(-w),
/// Pi^>_P = -i kappa theta(+w). Retarded part handled analytically in the
/// Dyson denominator as -i (kappa/2) sgn(w).
pub fn bath_polarization(params: &SystemParams, grid: &FrequencyGrid) -> (Vec<C64>, Vec<C64>) {
    let kappa = params.kappa;
    let lesser = grid
        .values()
        .into_iter()
        .map(|w| C64::new(0.0, -kappa * theta(-w)))
        .collect();
    let greater = grid
        .values()
        .into_iter()
        .map(|w| C64::new(0.0, -kappa * theta(w)))
        .collect();
    (lesser, greater)
}

/// Photon propagator of the empty lossy cavity.
pub fn bath_photon(params: &SystemParams, grid: &FrequencyGrid) -> PhotonGf {
    let wc = params.omega_c;
    let kappa = params.kappa;
    let (pi_less, pi_great) = bath_polarization(params, grid);
    let retarded: Vec<C64> = grid
        .values()
        .into_iter()
        .map(|w| {
            let sgn = if w > 0.0 {
                1.0
            } else if w < 0.0 {
                -1.0
            } else {
                0.0
            };
            C64::new(2.0 * wc, 0.0) / C64::new(w * w - wc * wc, kappa * wc * sgn)
        })
        .collect();
    let lesser = retarded
        .iter()
        .zip(&pi_less)
        .map(|(d, p)| d * d.conj() * p)
        .collect();
    let greater = retarded
        .iter()
        .zip(&pi_great)
        .map(|(d, p)| d * d.conj() * p)
        .collect();
    PhotonGf {
        retarded,
        lesser,
        greater,
    }
}
