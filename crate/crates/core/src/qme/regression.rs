//! Cavity spectral function from two-time correlators via the quantum
//! regression theorem.
//!
//! The displacement response C(tau) = <[A(tau), A(0)]> with A = a + a+ is
//! regressed as C(tau) = Tr[A e^{L tau}([A, rho_ss])]. Its half Fourier
//! transform gives the retarded propagator and spectral function
//!
//!   D^r(omega) = -i int_0^inf dtau e^{i omega tau} C(tau),
//!   A_c(omega) = -2 Im D^r(omega).
//!
//! With excitation-conserving coupling the seed [A, rho] splits into
//! [a, rho] and [a+, rho] living in the (0, -1) and (0, +1) label blocks,
//! and adjoint covariance of the Lindblad map ties them together:
//! [a+, rho] = -[a, rho]+, so only the (0, -1) block is evolved. Working in
//! the frame rotating at omega_c (H -> H - omega_c R with R the excitation
//! label) removes the fast optical phase from the block, which lets the
//! integrator step at the slow hybridization and damping scales; the phase
//! is restored analytically inside the Fourier integral:
//!
//!   C(tau) = e^{+i omega_c tau} Tm(tau) + e^{-i omega_c tau} Tp(tau),
//!   Tm = Tr[a+ Y_-], Tp = Tr[a Y_+] = -conj(Tm).
//!
//! Counter-rotating coupling breaks excitation conservation; then the seed
//! is evolved in the lab frame inside the charge-offset-zero block and
//! C(tau) is transformed directly, at the cost of a step resolving omega_c.
//!
//! The transform uses a trapezoidal Filon rule: the sampled correlator is
//! interpolated linearly and the oscillatory kernel integrated exactly, so
//! the frequency grid is decoupled from the sampling step. A cosine taper
//! on the trailing tenth of the window suppresses truncation ringing; the
//! evolution stops once |C| stays below decay_threshold times its running
//! peak, and reports the horizon as insufficient if that never happens.
//!
//! Empty-cavity limit (g = 0): C(tau) = -2i sin(omega_c tau) e^{-kappa tau/2},
//! hence D^r(omega) ~= 1/(omega - omega_c + i kappa/2) near the resonance:
//! a Lorentzian of height 4/kappa and full width kappa, odd in omega.

use crate::fock::{ManyBodyBasis, SparseOp};
use crate::params::SystemParams;
use crate::qme::hamiltonian::{excitation_number, Coupling};
use crate::qme::liouville::{build_generator, BlockGenerator, LindbladModel, PairSector};
use crate::qme::steady::{rk4_step, Rk4Scratch};
use crate::qme::{lab_frame_scale, slow_block_scale};
use crate::{C64, CoreError, Result};

/// Hard ceiling on integration steps; reached only when the horizon and
/// step autoselection are overridden inconsistently.
const MAX_STEPS: usize = 2_000_000;

#[derive(Debug, Clone)]
pub struct RegressionOptions {
    /// Integrator step; 0 picks 0.02 over the fastest block scale.
    pub dt: f64,
    /// Correlation horizon; 0 picks 10 / min(kappa, gamma1, gamma2).
    pub t_max: f64,
    /// Stop once |C| holds below this fraction of its running peak.
    pub decay_threshold: f64,
    /// Consecutive samples the decay condition must hold.
    pub sustain: usize,
}

impl Default for RegressionOptions {
    fn default() -> Self {
        Self { dt: 0.0, t_max: 0.0, decay_threshold: 1e-4, sustain: 50 }
    }
}

/// Sampled cavity spectral function and retarded propagator.
#[derive(Debug, Clone)]
pub struct CavityDos {
    pub omega: Vec<f64>,
    /// A_c(omega) = -2 Im D^r(omega).
    pub a_c: Vec<f64>,
    pub d_retarded: Vec<C64>,
    /// Correlator time actually integrated.
    pub horizon: f64,
    pub n_samples: usize,
}

/// Computes the cavity spectral function on the given frequency grid from
/// the stationary state `rho_ss` (block coefficients over `ss_sector`).
pub fn photon_dos_regression(
    params: &SystemParams,
    basis: &ManyBodyBasis,
    model: &LindbladModel,
    ss_sector: &PairSector,
    rho_ss: &[C64],
    coupling: Coupling,
    omega: &[f64],
    opts: &RegressionOptions,
) -> Result<CavityDos> {
    if !basis.has_photon {
        return Err(CoreError::Unsupported(
            "cavity spectral function needs a photon register in the basis".into(),
        ));
    }
    if omega.is_empty() {
        return Err(CoreError::InvalidParams("empty frequency grid".into()));
    }
    let t_max = if opts.t_max > 0.0 {
        opts.t_max
    } else {
        10.0 / params.kappa.min(params.gamma1).min(params.gamma2)
    };
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(CoreError::InvalidParams(format!("bad horizon t_max = {t_max}")));
    }
    match coupling {
        Coupling::Rwa => rotating_frame_dos(params, basis, model, ss_sector, rho_ss, omega, opts, t_max),
        Coupling::CounterRotating => {
            lab_frame_dos(params, basis, model, ss_sector, rho_ss, omega, opts, t_max)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn rotating_frame_dos(
    params: &SystemParams,
    basis: &ManyBodyBasis,
    model: &LindbladModel,
    ss_sector: &PairSector,
    rho_ss: &[C64],
    omega: &[f64],
    opts: &RegressionOptions,
    t_max: f64,
) -> Result<CavityDos> {
    let mut h_rot = model.h.clone();
    h_rot.add_scaled(&excitation_number(basis), C64::new(-params.omega_c, 0.0));
    h_rot.compact();
    let rotated = LindbladModel { h: h_rot, jumps: model.jumps.clone() };
    let sector = PairSector::build(basis, 0, Some(-1));
    let gen = build_generator(&rotated, basis, sector)?;
    let a = basis.photon_annihilate();
    // Seed [a, rho_ss] lowers the row label into the (0, -1) block.
    let left = ss_sector.map_left(&a, rho_ss, &gen.sector)?;
    let right = ss_sector.map_right(&a, rho_ss, &gen.sector)?;
    let y: Vec<C64> = left.iter().zip(&right).map(|(l, r)| l - r).collect();
    let dt =
        if opts.dt > 0.0 { opts.dt } else { 0.02 / slow_block_scale(params, basis).max(1e-12) };
    let (mut tm, horizon) = evolve_and_sample(&gen, y, &a.dagger(), dt, t_max, opts)?;
    cosine_taper(&mut tm, 0.1);
    let tp: Vec<C64> = tm.iter().map(|v| -v.conj()).collect();
    let n_samples = tm.len();
    let mut a_c = Vec::with_capacity(omega.len());
    let mut d_retarded = Vec::with_capacity(omega.len());
    for &w in omega {
        let fm = filon_half_transform(dt, &tm, w + params.omega_c);
        let fp = filon_half_transform(dt, &tp, w - params.omega_c);
        let dr = C64::new(0.0, -1.0) * (fm + fp);
        a_c.push(-2.0 * dr.im);
        d_retarded.push(dr);
    }
    Ok(CavityDos { omega: omega.to_vec(), a_c, d_retarded, horizon, n_samples })
}

#[allow(clippy::too_many_arguments)]
fn lab_frame_dos(
    params: &SystemParams,
    basis: &ManyBodyBasis,
    model: &LindbladModel,
    ss_sector: &PairSector,
    rho_ss: &[C64],
    omega: &[f64],
    opts: &RegressionOptions,
    t_max: f64,
) -> Result<CavityDos> {
    let sector = PairSector::build(basis, 0, None);
    let gen = build_generator(model, basis, sector)?;
    let mut disp = basis.photon_annihilate();
    disp.add_scaled(&basis.photon_create(), C64::new(1.0, 0.0));
    disp.compact();
    let left = ss_sector.map_left(&disp, rho_ss, &gen.sector)?;
    let right = ss_sector.map_right(&disp, rho_ss, &gen.sector)?;
    let y: Vec<C64> = left.iter().zip(&right).map(|(l, r)| l - r).collect();
    let dt =
        if opts.dt > 0.0 { opts.dt } else { 0.02 / lab_frame_scale(params, basis).max(1e-12) };
    let (mut c, horizon) = evolve_and_sample(&gen, y, &disp, dt, t_max, opts)?;
    cosine_taper(&mut c, 0.1);
    let n_samples = c.len();
    let mut a_c = Vec::with_capacity(omega.len());
    let mut d_retarded = Vec::with_capacity(omega.len());
    for &w in omega {
        let dr = C64::new(0.0, -1.0) * filon_half_transform(dt, &c, w);
        a_c.push(-2.0 * dr.im);
        d_retarded.push(dr);
    }
    Ok(CavityDos { omega: omega.to_vec(), a_c, d_retarded, horizon, n_samples })
}

/// Integrates the seed and samples Tr[probe Y] each step until the sample
/// magnitude holds below threshold * peak for `sustain` steps.
fn evolve_and_sample(
    gen: &BlockGenerator,
    y0: Vec<C64>,
    probe: &SparseOp,
    dt: f64,
    t_max: f64,
    opts: &RegressionOptions,
) -> Result<(Vec<C64>, f64)> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(CoreError::InvalidParams(format!("bad correlator step dt = {dt}")));
    }
    let steps = (((t_max / dt).ceil() as usize).max(1)).min(MAX_STEPS);
    let mut y = y0;
    let mut scratch = Rk4Scratch::new(y.len());
    let mut samples = Vec::with_capacity((steps + 1).min(1 << 16));
    let first = gen.sector.expectation(&y, probe);
    samples.push(first);
    let mut peak = first.norm();
    let mut below = 0usize;
    for step in 1..=steps {
        rk4_step(gen, &mut y, dt, &mut scratch);
        let s = gen.sector.expectation(&y, probe);
        if !s.norm().is_finite() {
            return Err(CoreError::StepTooLarge(format!(
                "correlator diverged after {step} steps of dt = {dt}"
            )));
        }
        samples.push(s);
        let mag = s.norm();
        if mag > peak {
            peak = mag;
            below = 0;
        } else if mag <= opts.decay_threshold * peak {
            below += 1;
            if below >= opts.sustain.max(1) {
                return Ok((samples, step as f64 * dt));
            }
        } else {
            below = 0;
        }
    }
    let final_fraction = samples.last().map_or(0.0, |s| s.norm()) / peak.max(f64::MIN_POSITIVE);
    Err(CoreError::InsufficientHorizon {
        t_final: steps as f64 * dt,
        final_fraction,
        required: opts.decay_threshold,
    })
}

/// Rolls the trailing `fraction` of the window smoothly to zero.
fn cosine_taper(samples: &mut [C64], fraction: f64) {
    let n = samples.len();
    if n < 3 {
        return;
    }
    let i0 = ((1.0 - fraction) * (n - 1) as f64).floor() as usize;
    let span = (n - 1 - i0).max(1) as f64;
    for (k, s) in samples.iter_mut().enumerate().skip(i0) {
        let frac = (k - i0) as f64 / span;
        *s *= 0.5 * (1.0 + (std::f64::consts::PI * frac).cos());
    }
}

/// int_0^{T} dtau e^{i Omega tau} f(tau) for linearly interpolated samples:
/// per interval dt e^{i Omega tau_m} [f_m phi0 + (f_{m+1} - f_m) phi1] with
/// phi0 = (e^{i theta} - 1)/(i theta), phi1 = (e^{i theta}(i theta - 1) + 1)
/// / (i theta)^2, theta = Omega dt. The kernel is exact at any theta, so the
/// frequency grid is independent of the sampling rate.
fn filon_half_transform(dt: f64, samples: &[C64], big_omega: f64) -> C64 {
    if samples.len() < 2 {
        return C64::new(0.0, 0.0);
    }
    let theta = big_omega * dt;
    let (phi0, phi1) = filon_weights(theta);
    let step_phase = C64::from_polar(1.0, theta);
    let mut phase = C64::new(1.0, 0.0);
    let mut acc = C64::new(0.0, 0.0);
    for m in 0..samples.len() - 1 {
        let f0 = samples[m];
        let df = samples[m + 1] - f0;
        acc += phase * (f0 * phi0 + df * phi1);
        phase *= step_phase;
        // Phase drift from repeated multiplication; refresh periodically.
        if m % 4096 == 4095 {
            phase = C64::from_polar(1.0, theta * (m + 1) as f64);
        }
    }
    acc * dt
}

fn filon_weights(theta: f64) -> (C64, C64) {
    if theta.abs() < 0.01 {
        // Series sum_n (i theta)^n / (n+1)! and sum_n (i theta)^n (n+1)/(n+2)!.
        let it = C64::new(0.0, theta);
        let it2 = it * it;
        let it3 = it2 * it;
        let phi0 = C64::new(1.0, 0.0) + 0.5 * it + it2 / 6.0 + it3 / 24.0;
        let phi1 = C64::new(0.5, 0.0) + it / 3.0 + 0.125 * it2 + it3 / 30.0;
        (phi0, phi1)
    } else {
        let it = C64::new(0.0, theta);
        let eit = C64::from_polar(1.0, theta);
        let phi0 = (eit - 1.0) / it;
        let phi1 = (eit * (it - 1.0) + 1.0) / (it * it);
        (phi0, phi1)
    }
}
