//! Electron-only master equation with the cavity adiabatically eliminated.
//!
//! When the photon decays much faster than it is refilled (kappa well above
//! the collective coupling and the upper bandwidth), the cavity stays close
//! to vacuum and can be integrated out. What remains acts on the electrons
//! alone through the collective interband lowering operator
//! `S^- = sum_j c+_{1j} c_{2j}`:
//!
//! ```text
//! rho_dot = -i[H_e + 2 Gamma_Delta S^+ S^-, rho]
//!           + leads + 2 Gamma_kappa D[S^-] rho,
//! Gamma_Delta = 2 g^2 Delta / (4 Delta^2 + kappa^2),
//! Gamma_kappa =   g^2 kappa / (4 Delta^2 + kappa^2),
//! ```
//!
//! with `Delta = omega21 - omega_c` and `D[A] rho = 2 A rho A+ - {A+A, rho}`
//! normalized as in [`crate::qme::liouville`] (weights multiply
//! `-{A+A, rho}/1 + ...` via the 1/2-free convention used there). On
//! resonance the single surviving rate is `Gamma_c = g^2/kappa` and the
//! dissipator transfers population between the bands at
//! `d<N_1>/dt = 4 Gamma_c <S^+ S^-> = -d<N_2>/dt`.
//!
//! The dissipator is non-local: it de-excites coherent superpositions
//! spanning the whole chain. Dropping the cross-site terms leaves the local
//! variant `sum_j 2 Gamma_c D[c+_{1j} c_{2j}]`, kept here as a contrast
//! model; both can also run with hardcore-boson statistics. Only the
//! resonant form of the local variant is defined; combining `detuned` and
//! `local` is rejected rather than inventing a light shift for it.
//!
//! Everything depends on g and kappa only through the two rates, so any
//! rescaling (g, kappa) -> (s g, s^2 kappa) leaves the equation invariant;
//! this exact degeneracy is what the dissipative-regime scaling laws of the
//! full model reduce to.

use serde::{Deserialize, Serialize};

use crate::fock::ManyBodyBasis;
use crate::params::SystemParams;
use crate::qme::current::{self, CurrentReport};
use crate::qme::hamiltonian::electron_hamiltonian;
use crate::qme::liouville::{build_generator, BlockGenerator, LindbladModel, PairSector};
use crate::qme::steady::{evolve_to_steady, steady_state_null, SteadyOutcome, MAX_DENSE_BLOCK};
use crate::qme::SolverKind;
use crate::{C64, CoreError, Result};

/// Rates left over after the cavity is integrated out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRates {
    /// Resonant transfer rate g^2/kappa.
    pub gamma_c: f64,
    /// Collective light shift, odd in the detuning omega21 - omega_c.
    pub gamma_delta: f64,
    /// Detuning-corrected transfer rate; equals gamma_c on resonance.
    pub gamma_kappa: f64,
}

impl EffectiveRates {
    pub fn from_params(params: &SystemParams) -> Self {
        let delta = params.omega21() - params.omega_c;
        let den = 4.0 * delta * delta + params.kappa * params.kappa;
        Self {
            gamma_c: params.gamma_c(),
            gamma_delta: 2.0 * params.g * params.g * delta / den,
            gamma_kappa: params.g * params.g * params.kappa / den,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EffectiveOptions {
    /// Keep the cross-site terms of the collective dissipator (the derived
    /// form). `false` truncates to on-site de-excitation.
    pub nonlocal: bool,
    /// Use the detuning-corrected rates and the collective light shift
    /// instead of the resonant form.
    pub detuned: bool,
    pub solver: SolverKind,
    /// RK4 step; 0 picks 0.02 over the fastest surviving rate.
    pub dt: f64,
    /// Relaxation cap; 0 picks 30 over the slowest lead rate.
    pub t_max: f64,
    pub steady_tol: f64,
    /// Hardcore-boson statistics instead of fermions.
    pub hardcore: bool,
}

impl Default for EffectiveOptions {
    fn default() -> Self {
        Self {
            nonlocal: true,
            detuned: false,
            solver: SolverKind::Auto,
            dt: 0.0,
            t_max: 0.0,
            steady_tol: 1e-10,
            hardcore: false,
        }
    }
}

/// Stationary solution of the electron-only equation.
#[derive(Debug, Clone)]
pub struct EffectiveSolution {
    pub params: SystemParams,
    pub options: EffectiveOptions,
    pub rates: EffectiveRates,
    pub basis: ManyBodyBasis,
    pub model: LindbladModel,
    pub sector: PairSector,
    pub rho: Vec<C64>,
    pub report: CurrentReport,
    /// <S^+ S^-> in the stationary state.
    pub s_plus_s_minus: f64,
    /// Adiabatic photon-number estimate (4 gamma_c / kappa) <S^+ S^->.
    pub nbar_estimate: f64,
    /// Its a-priori bound N g^2 / (kappa/2)^2.
    pub nbar_bound: f64,
    pub method: &'static str,
    pub iterations: usize,
    pub residual: f64,
    pub warnings: Vec<String>,
}

/// Assembles the electron-only basis and Lindblad model without solving.
pub fn build_effective_model(
    params: &SystemParams,
    opts: &EffectiveOptions,
) -> Result<(ManyBodyBasis, LindbladModel)> {
    if opts.detuned && !opts.nonlocal {
        return Err(CoreError::Unsupported(
            "the detuned light shift is only derived for the collective dissipator; \
             no local-variant counterpart exists"
                .into(),
        ));
    }
    let basis = ManyBodyBasis::electrons_only(params.n_sites, opts.hardcore)?;
    let rates = EffectiveRates::from_params(params);
    let mut h = electron_hamiltonian(params, &basis);
    let mut jumps = crate::qme::lead_and_loss_jumps(params, &basis, 0.0);
    if params.g > 0.0 {
        let s_minus = basis.collective_lowering();
        if opts.detuned {
            h.add_scaled(
                &s_minus.dagger().then(&s_minus),
                C64::new(2.0 * rates.gamma_delta, 0.0),
            );
            h.compact();
        }
        let weight = 2.0 * if opts.detuned { rates.gamma_kappa } else { rates.gamma_c };
        if opts.nonlocal {
            jumps.push((s_minus, weight));
        } else {
            for site in 0..params.n_sites {
                jumps.push((basis.local_lowering(site), weight));
            }
        }
    }
    Ok((basis, LindbladModel { h, jumps }))
}

/// Solves the electron-only equation for its stationary state.
pub fn solve_effective(params: &SystemParams, opts: &EffectiveOptions) -> Result<EffectiveSolution> {
    params.validate()?;
    let rates = EffectiveRates::from_params(params);
    let (basis, model) = build_effective_model(params, opts)?;
    // Charge and upper-band number are conserved pairwise (jumps shift both
    // labels identically), so the steady state lives in the (0, 0) block.
    let sector = PairSector::build(&basis, 0, Some(0));
    let gen = build_generator(&model, &basis, sector)?;
    let use_null = match opts.solver {
        SolverKind::Null => true,
        SolverKind::Rk4 => false,
        SolverKind::Auto => gen.sector.len() <= MAX_DENSE_BLOCK,
    };
    let (outcome, method) = if use_null {
        (steady_state_null(&gen)?, "null-space")
    } else {
        (relax(params, opts, &rates, &basis, &gen)?, "rk4")
    };
    let SteadyOutcome { x: rho, residual, iterations } = outcome;
    let report = current::measure(&basis, &gen.sector, &rho, params)?;

    let s_minus = basis.collective_lowering();
    let spsm = gen.sector.expectation(&rho, &s_minus.dagger().then(&s_minus));
    if spsm.im.abs() > 1e-8 || spsm.re < -1e-8 {
        return Err(CoreError::ConsistencyViolation(format!(
            "<S+S-> = {spsm} must be real and non-negative"
        )));
    }
    let s_plus_s_minus = spsm.re.max(0.0);
    let half_kappa = 0.5 * params.kappa;
    let nbar_bound = params.n_sites as f64 * params.g * params.g / (half_kappa * half_kappa);

    let mut warnings = params.validity_warnings();
    let detuning = params.omega21() - params.omega_c;
    if !opts.detuned && detuning.abs() > 1e-9 * params.omega21().abs() {
        warnings.push(format!(
            "resonant rates applied to a detuned cavity (omega21 - omega_c = {detuning:.3e}); \
             enable the detuned option"
        ));
    }
    Ok(EffectiveSolution {
        params: *params,
        options: *opts,
        rates,
        basis,
        sector: gen.sector,
        model,
        rho,
        report,
        s_plus_s_minus,
        nbar_estimate: 4.0 * rates.gamma_c / params.kappa * s_plus_s_minus,
        nbar_bound,
        method,
        iterations,
        residual,
        warnings,
    })
}

fn relax(
    params: &SystemParams,
    opts: &EffectiveOptions,
    rates: &EffectiveRates,
    basis: &ManyBodyBasis,
    gen: &BlockGenerator,
) -> Result<SteadyOutcome> {
    let n = params.n_sites as f64;
    let transfer = 2.0 * n * rates.gamma_kappa.max(rates.gamma_c)
        + 2.0 * n * rates.gamma_delta.abs();
    let scale = [params.t1, params.t2, params.gamma1, params.gamma2, transfer]
        .into_iter()
        .fold(0.0_f64, f64::max);
    let dt = if opts.dt > 0.0 { opts.dt } else { 0.02 / scale.max(1e-12) };
    let t_max = if opts.t_max > 0.0 {
        opts.t_max
    } else {
        30.0 / params.gamma1.min(params.gamma2)
    };
    let filled = (1usize << params.n_sites) - 1;
    let x0 = gen.sector.pure_state(basis.index(filled, 0))?;
    evolve_to_steady(gen, x0, dt, t_max, opts.steady_tol)
}
