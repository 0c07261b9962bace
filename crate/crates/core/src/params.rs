//! System parameters, validation, and derived energy scales.
//!
//! Everything downstream reads the model from [`SystemParams`]: an `N`-site
//! chain with two bands (centers `omega1 < omega2`, hoppings `t1`, `t2`),
//! source/drain rates `gamma1`, `gamma2` acting on site 1 / site `N` of each
//! band, and a single cavity mode (`omega_c`, loss `kappa`, vacuum coupling
//! `g`). Units: hbar = e = 1.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::Result;

fn default_omega1() -> f64 {
    -0.5
}
fn default_omega2() -> f64 {
    0.5
}
fn default_omega_c() -> f64 {
    1.0
}

/// Physical parameters of the chain + cavity model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Number of chain sites N >= 2.
    pub n_sites: usize,
    /// Lower-band hopping (>= 0).
    pub t1: f64,
    /// Upper-band hopping (>= 0).
    pub t2: f64,
    /// Lead rate for band 1 (> 0): injection at site 1, extraction at site N.
    pub gamma1: f64,
    /// Lead rate for band 2 (> 0).
    pub gamma2: f64,
    /// Lower band center.
    #[serde(default = "default_omega1")]
    pub omega1: f64,
    /// Upper band center.
    #[serde(default = "default_omega2")]
    pub omega2: f64,
    /// Cavity frequency.
    #[serde(default = "default_omega_c")]
    pub omega_c: f64,
    /// Cavity loss rate (> 0).
    pub kappa: f64,
    /// Vacuum light-matter coupling (>= 0).
    pub g: f64,
}

/// Transport regime classified by cavity loss vs. upper-band width.
///
/// `Dissipative`: kappa exceeds the band width, photons decay before
/// resolving individual Bloch transitions and the bands couple collectively.
/// `Coherent`: kappa below the band width, the cavity dresses individual
/// transitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Dissipative,
    Coherent,
}

/// Energy scales derived from [`SystemParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedScales {
    /// Interband gap omega2 - omega1.
    pub omega21: f64,
    /// Cavity detuning omega_c - omega21.
    pub detuning: f64,
    /// Cavity-mediated decay rate g^2 / kappa.
    pub gamma_c: f64,
    /// Cooperativity gamma_c / gamma1.
    pub cooperativity: f64,
    /// Upper-band width 4 t2 cos(pi / (N+1)).
    pub w2: f64,
    /// Lower-band width 4 t1 cos(pi / (N+1)).
    pub w1: f64,
    /// Largest spacing between adjacent interband Bloch transition
    /// frequencies; the cavity dresses transitions individually once
    /// g falls below this scale.
    pub delta_omega: f64,
    /// Collective coupling ceiling g sqrt(N).
    pub g_collective: f64,
    pub regime: Regime,
}

impl SystemParams {
    /// Validates ranges and cross-field constraints.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n_sites < 2 {
            problems.push(format!("n_sites = {} must be >= 2", self.n_sites));
        }
        for (name, v) in [("t1", self.t1), ("t2", self.t2), ("g", self.g)] {
            if !(v >= 0.0) || !v.is_finite() {
                problems.push(format!("{name} = {v} must be finite and >= 0"));
            }
        }
        for (name, v) in [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("kappa", self.kappa),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                problems.push(format!("{name} = {v} must be finite and > 0"));
            }
        }
        for (name, v) in [
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("omega_c", self.omega_c),
        ] {
            if !v.is_finite() {
                problems.push(format!("{name} = {v} must be finite"));
            }
        }
        if !(self.omega2 > self.omega1) {
            problems.push(format!(
                "omega2 = {} must exceed omega1 = {}",
                self.omega2, self.omega1
            ));
        }
        if !(self.omega_c > 0.0) {
            problems.push(format!("omega_c = {} must be > 0", self.omega_c));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CoreError::InvalidParams(problems.join("; ")))
        }
    }

    pub fn omega21(&self) -> f64 {
        self.omega2 - self.omega1
    }

    /// Cavity-mediated decay rate g^2 / kappa.
    pub fn gamma_c(&self) -> f64 {
        self.g * self.g / self.kappa
    }

    /// Band hopping by index (0 = lower, 1 = upper).
    pub fn hopping(&self, band: usize) -> f64 {
        match band {
            0 => self.t1,
            1 => self.t2,
            _ => panic!("band index {band} out of range"),
        }
    }

    /// Band center by index.
    pub fn band_center(&self, band: usize) -> f64 {
        match band {
            0 => self.omega1,
            1 => self.omega2,
            _ => panic!("band index {band} out of range"),
        }
    }

    /// Lead rate by band index.
    pub fn gamma(&self, band: usize) -> f64 {
        match band {
            0 => self.gamma1,
            1 => self.gamma2,
            _ => panic!("band index {band} out of range"),
        }
    }

    /// Derived energy scales. Call after `validate`.
    pub fn derived(&self) -> DerivedScales {
        let n = self.n_sites as f64;
        let cos_edge = (std::f64::consts::PI / (n + 1.0)).cos();
        let w2 = 4.0 * self.t2 * cos_edge;
        let w1 = 4.0 * self.t1 * cos_edge;
        // Interband transitions omega21 - 2(t2 - t1) cos(pi k/(N+1)) are
        // monotone in k; the largest adjacent gap sits at the band center.
        let mut delta_omega: f64 = 0.0;
        for k in 1..self.n_sites {
            let a = (std::f64::consts::PI * k as f64 / (n + 1.0)).cos();
            let b = (std::f64::consts::PI * (k + 1) as f64 / (n + 1.0)).cos();
            delta_omega = delta_omega.max(2.0 * (self.t2 - self.t1).abs() * (a - b).abs());
        }
        let gamma_c = self.gamma_c();
        DerivedScales {
            omega21: self.omega21(),
            detuning: self.omega_c - self.omega21(),
            gamma_c,
            cooperativity: gamma_c / self.gamma1,
            w2,
            w1,
            delta_omega,
            g_collective: self.g * n.sqrt(),
            regime: if self.kappa >= w2 {
                Regime::Dissipative
            } else {
                Regime::Coherent
            },
        }
    }

    /// Validity advisories for the individual methods. Returned, not fatal:
    /// each method stays runnable outside its domain so that cross-method
    /// comparisons can show the breakdown.
    pub fn validity_warnings(&self) -> Vec<String> {
        let d = self.derived();
        let mut w = Vec::new();
        if d.cooperativity > 1.0 {
            w.push(format!(
                "cooperativity gamma_c/gamma1 = {:.3} > 1: the Born light-matter self-energy is no longer perturbative",
                d.cooperativity
            ));
        }
        if d.g_collective >= self.kappa / 4.0 {
            w.push(format!(
                "g sqrt(N) = {:.3e} >= kappa/4 = {:.3e}: adiabatic elimination of the cavity is unreliable",
                d.g_collective,
                self.kappa / 4.0
            ));
        }
        w
    }
}
