//! Full quantum master equation for the chain + cavity in the many-body
//! Fock space.
//!
//! rho_dot = -i[H, rho] + sum_alpha Gamma_alpha/2 (D[c+_{alpha,1}] +
//! D[c_{alpha,N}]) rho + kappa/2 ((n_p + 1) D[a] + n_p D[a+]) rho.
//!
//! The stationary state is found either by a trace-constrained dense
//! null-space solve on the conserved-label block (exact up to roundoff,
//! feasible up to a few thousand block pairs) or by RK4 relaxation from the
//! filled-lower-band state for blocks too large to factor. Excitation
//! blocking follows the coupling: number-conserving coupling pins the
//! steady state in the (delta_q, delta_e) = (0, 0) block, counter-rotating
//! coupling only conserves charge and uses the coarser delta_q = 0 block.
//!
//! Inside the steady block the optical frequencies omega_c and
//! omega2 - omega1 only enter through their difference (an index pair at
//! fixed label offsets shifts band-center energy by the detuning alone), so
//! relaxation steps at the slow hybridization scale even in the lab frame.

pub mod current;
pub mod hamiltonian;
pub mod liouville;
pub mod regression;
pub mod steady;

use serde::{Deserialize, Serialize};

use crate::fock::{ManyBodyBasis, SparseOp};
use crate::params::SystemParams;
use crate::{C64, CoreError, Result};

pub use current::CurrentReport;
pub use regression::{CavityDos, RegressionOptions};

use hamiltonian::{build_hamiltonian, Coupling};
use liouville::{build_generator, LindbladModel, PairSector};
use regression::photon_dos_regression;
use steady::{evolve_to_steady, steady_state_null, SteadyOutcome, MAX_DENSE_BLOCK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    /// Null-space solve when the block fits a dense factorization, RK4
    /// relaxation otherwise.
    #[default]
    Auto,
    Null,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QmeOptions {
    /// Photon number cutoff (inclusive).
    pub n_max: usize,
    /// RK4 step; 0 picks 0.02 over the fastest block scale.
    pub dt: f64,
    /// Relaxation cap; 0 picks 30 over the slowest rate.
    pub t_max: f64,
    /// Stationarity target max |L rho|.
    pub steady_tol: f64,
    pub solver: SolverKind,
    /// Replace fermionic chain statistics by hardcore bosons (drops the
    /// exchange strings; isolates the role of antisymmetrization).
    pub hardcore: bool,
    /// Keep the non-excitation-conserving light-matter terms.
    pub counter_rotating: bool,
    /// Thermal occupation of the photon loss bath.
    pub n_p: f64,
}

impl Default for QmeOptions {
    fn default() -> Self {
        Self {
            n_max: 2,
            dt: 0.0,
            t_max: 0.0,
            steady_tol: 1e-10,
            solver: SolverKind::Auto,
            hardcore: false,
            counter_rotating: false,
            n_p: 0.0,
        }
    }
}

/// Stationary solution with enough structure kept to regress correlators.
#[derive(Debug, Clone)]
pub struct QmeSolution {
    pub params: SystemParams,
    pub options: QmeOptions,
    pub basis: ManyBodyBasis,
    pub model: LindbladModel,
    pub sector: PairSector,
    /// Stationary density matrix as block coefficients over `sector`.
    pub rho: Vec<C64>,
    pub report: CurrentReport,
    pub method: &'static str,
    pub iterations: usize,
    pub residual: f64,
    pub warnings: Vec<String>,
}

impl QmeSolution {
    /// Cavity spectral function on `omega` from this stationary state.
    pub fn cavity_dos(&self, omega: &[f64], opts: &RegressionOptions) -> Result<CavityDos> {
        photon_dos_regression(
            &self.params,
            &self.basis,
            &self.model,
            &self.sector,
            &self.rho,
            self.coupling(),
            omega,
            opts,
        )
    }

    pub fn coupling(&self) -> Coupling {
        if self.options.counter_rotating {
            Coupling::CounterRotating
        } else {
            Coupling::Rwa
        }
    }
}

/// Scales surviving inside a fixed label block (or the rotating frame):
/// hopping, damping, detuning and the collective coupling.
pub(crate) fn slow_block_scale(params: &SystemParams, basis: &ManyBodyBasis) -> f64 {
    let d = params.derived();
    let g_eff = params.g * ((basis.n_sites * basis.n_max.max(1)) as f64).sqrt();
    [params.t1, params.t2, params.gamma1, params.gamma2, params.kappa, d.detuning.abs(), g_eff]
        .into_iter()
        .fold(0.0, f64::max)
}

/// Lab-frame phase scale: optical frequencies on top of the slow scales.
pub(crate) fn lab_frame_scale(params: &SystemParams, basis: &ManyBodyBasis) -> f64 {
    params.omega_c.abs()
        + params.omega1.abs().max(params.omega2.abs())
        + 2.0 * (params.t1 + params.t2)
        + slow_block_scale(params, basis)
}

/// Lead and loss jump operators with their D[.] weights.
pub fn lead_and_loss_jumps(
    params: &SystemParams,
    basis: &ManyBodyBasis,
    n_p: f64,
) -> Vec<(SparseOp, f64)> {
    let n = basis.n_sites;
    let mut jumps = Vec::new();
    for band in 0..2 {
        jumps.push((basis.create(band, 0), 0.5 * params.gamma(band)));
        jumps.push((basis.annihilate(band, n - 1), 0.5 * params.gamma(band)));
    }
    if basis.has_photon {
        jumps.push((basis.photon_annihilate(), 0.5 * params.kappa * (n_p + 1.0)));
        if n_p > 0.0 {
            jumps.push((basis.photon_create(), 0.5 * params.kappa * n_p));
        }
    }
    jumps
}

/// Builds the master equation and solves for the stationary state.
pub fn solve(params: &SystemParams, opts: &QmeOptions) -> Result<QmeSolution> {
    params.validate()?;
    if !(opts.n_p >= 0.0) || !opts.n_p.is_finite() {
        return Err(CoreError::InvalidParams(format!(
            "thermal photon occupation n_p = {} must be finite and >= 0",
            opts.n_p
        )));
    }
    let basis = ManyBodyBasis::new(params.n_sites, opts.n_max, opts.hardcore)?;
    let coupling = if opts.counter_rotating { Coupling::CounterRotating } else { Coupling::Rwa };
    let h = build_hamiltonian(params, &basis, coupling)?;
    let model = LindbladModel { h, jumps: lead_and_loss_jumps(params, &basis, opts.n_p) };
    let delta_e = if opts.counter_rotating { None } else { Some(0) };
    let sector = PairSector::build(&basis, 0, delta_e);
    let gen = build_generator(&model, &basis, sector)?;
    let use_null = match opts.solver {
        SolverKind::Null => true,
        SolverKind::Rk4 => false,
        SolverKind::Auto => gen.sector.len() <= MAX_DENSE_BLOCK,
    };
    let (outcome, method) = if use_null {
        (steady_state_null(&gen)?, "null-space")
    } else {
        (relax(params, opts, &basis, &gen)?, "rk4")
    };
    let SteadyOutcome { x: rho, residual, iterations } = outcome;
    let report = current::measure(&basis, &gen.sector, &rho, params)?;
    let mut warnings = params.validity_warnings();
    if basis.has_photon && report.nbar > 0.3 * basis.n_max as f64 {
        warnings.push(format!(
            "mean photon number {:.3} approaches the cutoff n_max = {}: raise the cutoff \
             and re-converge",
            report.nbar, basis.n_max
        ));
    }
    Ok(QmeSolution {
        params: *params,
        options: *opts,
        basis,
        sector: gen.sector,
        model,
        rho,
        report,
        method,
        iterations,
        residual,
        warnings,
    })
}

fn relax(
    params: &SystemParams,
    opts: &QmeOptions,
    basis: &ManyBodyBasis,
    gen: &liouville::BlockGenerator,
) -> Result<SteadyOutcome> {
    let scale = if opts.counter_rotating {
        lab_frame_scale(params, basis)
    } else {
        slow_block_scale(params, basis).max(params.kappa * (1.0 + 2.0 * opts.n_p))
    };
    let dt = if opts.dt > 0.0 { opts.dt } else { 0.02 / scale.max(1e-12) };
    let t_max = if opts.t_max > 0.0 {
        opts.t_max
    } else {
        let mut slowest = params.gamma1.min(params.gamma2).min(params.kappa);
        if params.g > 0.0 {
            slowest = slowest.min(params.gamma_c());
        }
        30.0 / slowest
    };
    // Lower band filled, upper band and cavity empty: the natural transport
    // initial condition, and it already carries trace one.
    let filled = (1usize << params.n_sites) - 1;
    let x0 = gen.sector.pure_state(basis.index(filled, 0))?;
    evolve_to_steady(gen, x0, dt, t_max, opts.steady_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn base(t: f64, gamma: f64) -> SystemParams {
        SystemParams {
            n_sites: 2,
            t1: t,
            t2: t,
            gamma1: gamma,
            gamma2: gamma,
            omega1: -0.5,
            omega2: 0.5,
            omega_c: 1.0,
            kappa: 0.1,
            g: 0.0,
        }
    }

    #[test]
    fn decoupled_bands_match_the_two_site_closed_form() {
        // J per band = Gamma / (2 + Gamma^2 / (2 t^2)) at g = 0; the photon
        // register is empty and must not disturb the electron sector.
        for (t, gamma) in [(1e-2_f64, 1e-3_f64), (1e-4, 1e-3)] {
            let want = 0.5 / (1.0 + (gamma / (2.0 * t)).powi(2));
            let p = base(t, gamma);
            let sol = solve(&p, &QmeOptions::default()).unwrap();
            assert_eq!(sol.method, "null-space");
            for band in 0..2 {
                assert_abs_diff_eq!(sol.report.j_band[band] / gamma, want, epsilon = 1e-9);
            }
            assert_abs_diff_eq!(sol.report.j_net / gamma, 2.0 * want, epsilon = 1e-9);
            assert_abs_diff_eq!(sol.report.j_source, sol.report.j_drain, epsilon = 1e-12);
            assert_abs_diff_eq!(sol.report.nbar, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn thermal_loss_bath_fills_the_cavity_to_n_p() {
        let mut p = base(1e-2, 1e-3);
        p.g = 0.0;
        let opts = QmeOptions { n_max: 7, n_p: 0.2, ..Default::default() };
        let sol = solve(&p, &opts).unwrap();
        // Truncated geometric thermal state: corrections O((n_p/(n_p+1))^8).
        assert_abs_diff_eq!(sol.report.nbar, 0.2, epsilon = 1e-4);
    }

    #[test]
    fn counter_rotating_terms_are_negligible_far_below_resonance() {
        // g = 1e-3 and omega_c = 1: Bloch-Siegert-type shifts enter at
        // (g/2 omega_c)^2 ~ 1e-7 and the currents must agree tightly.
        let mut p = base(5e-3, 5e-4);
        p.g = 1e-3;
        p.kappa = 0.05;
        let rwa = solve(&p, &QmeOptions { n_max: 1, ..Default::default() }).unwrap();
        let cr = solve(
            &p,
            &QmeOptions { n_max: 1, counter_rotating: true, ..Default::default() },
        )
        .unwrap();
        assert_eq!(cr.method, "null-space");
        let rel = (cr.report.j_net - rwa.report.j_net).abs() / rwa.report.j_net;
        assert!(rel < 1e-3, "counter-rotating current deviates by {rel:.2e}");
        assert!(cr.report.j_net > 0.0);
    }

    #[test]
    fn forced_rk4_agrees_with_the_null_solve() {
        let mut p = base(5e-3, 1e-3);
        p.g = 3e-3;
        p.kappa = 0.05;
        let opts_null = QmeOptions { n_max: 1, ..Default::default() };
        let null = solve(&p, &opts_null).unwrap();
        let rk4 = solve(
            &p,
            &QmeOptions { n_max: 1, solver: SolverKind::Rk4, steady_tol: 1e-12, ..Default::default() },
        )
        .unwrap();
        assert_eq!(rk4.method, "rk4");
        assert!(rk4.iterations > 0);
        let rel = (rk4.report.j_net - null.report.j_net).abs() / null.report.j_net;
        assert!(rel < 1e-6, "rk4 vs null current deviates by {rel:.2e}");
    }

    #[test]
    fn photon_exchange_boosts_the_current_at_resonance() {
        // t1 = 0 blocks the lower band entirely; every transported electron
        // must emit a photon, so J > 0 requires g > 0 and grows with it.
        let mut p = base(0.0, 5e-4);
        p.t1 = 0.0;
        p.t2 = 5e-3;
        p.kappa = 0.1;
        p.g = 0.0;
        let j0 = solve(&p, &QmeOptions::default()).unwrap().report.j_net;
        p.g = 2.2e-3;
        let j1 = solve(&p, &QmeOptions::default()).unwrap().report.j_net;
        p.g = 4.4e-3;
        let j2 = solve(&p, &QmeOptions::default()).unwrap().report.j_net;
        let j0_band2 = 0.5 * p.gamma2 / (1.0 + (p.gamma2 / (2.0 * p.t2)).powi(2));
        assert_abs_diff_eq!(j0, j0_band2, epsilon = 1e-12 + 1e-6 * j0_band2);
        assert!(j1 > 1.05 * j0, "weak coupling: j1 = {j1:.3e} vs j0 = {j0:.3e}");
        assert!(j2 > 1.05 * j1, "stronger coupling must transport more: {j2:.3e} vs {j1:.3e}");
    }
}
