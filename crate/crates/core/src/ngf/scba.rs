//! Self-consistent Born fixed point.
//!
//! State variable: the electron Green's function set of both bands. One
//! sweep maps it through the interband bubble, the photon Dyson equation,
//! the light-matter self-energies, and the electron Dyson equation; linear
//! mixing damps the update. The residual is the fixed-point defect
//! max|F(G) - G| normalized by the largest propagator magnitude, so the
//! tolerance is scale free. At g = 0 every light-matter term vanishes
//! identically and the lead-dressed solution is returned from a single
//! direct pass.
//!
//! Mixing adapts to the observed contraction: a growing residual halves the
//! step, a sustained monotone decrease cautiously enlarges it. Everything
//! stays deterministic.

use ndarray::Array2;

use crate::bloch::BlochBasis;
use crate::grid::FrequencyGrid;
use crate::ngf::dyson::dyson_electron;
use crate::ngf::free::{free_electron, Filling};
use crate::ngf::photon::photon_dyson;
use crate::ngf::selfenergy::{BornEngine, LeadSigma};
use crate::ngf::{BandBlock, ElectronGf, PhotonGf};
use crate::{C64, CoreError, Result, SystemParams};

#[derive(Clone, Copy, Debug)]
pub struct ScbaOptions {
    /// Frequency grid override; None sizes the grid from the parameters.
    pub grid_points: Option<usize>,
    pub mixing: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Extra broadening inside the Dyson kernel. Zero by default: the leads
    /// provide the physical widths and any artificial eta at grid scale
    /// would distort rates Gamma of comparable size.
    pub eta_kernel: f64,
    pub taper_fraction: f64,
    pub filling: Filling,
}

impl Default for ScbaOptions {
    fn default() -> Self {
        ScbaOptions {
            grid_points: None,
            mixing: 0.5,
            tol: 1e-8,
            max_iter: 500,
            eta_kernel: 0.0,
            taper_fraction: 0.05,
            filling: Filling::default(),
        }
    }
}

pub struct NgfSolution {
    pub params: SystemParams,
    pub grid: FrequencyGrid,
    pub bloch: BlochBasis,
    pub electron: ElectronGf,
    pub photon: PhotonGf,
    /// Diagonal of the total broadening function chi = i(Sigma^> - Sigma^<)
    /// per band, shape (k, w). Leads included.
    pub chi_diag: Vec<Array2<f64>>,
    pub iterations: usize,
    pub residual: f64,
}

pub fn solve(params: &SystemParams, opts: &ScbaOptions) -> Result<NgfSolution> {
    let grid = FrequencyGrid::for_params(params, opts.grid_points)?;
    solve_on_grid(params, grid, opts, None)
}

/// Full control variant: explicit grid and an optional warm-start state
/// (e.g. the converged propagators of a neighboring coupling strength).
pub fn solve_on_grid(
    params: &SystemParams,
    grid: FrequencyGrid,
    opts: &ScbaOptions,
    seed: Option<ElectronGf>,
) -> Result<NgfSolution> {
    params.validate()?;
    opts.filling.validate()?;
    grid.check_covers(params)?;
    if !(0.0 < opts.mixing && opts.mixing <= 1.0) {
        return Err(CoreError::InvalidParams(format!(
            "mixing = {} outside (0, 1]",
            opts.mixing
        )));
    }
    let bloch = BlochBasis::new(params.n_sites);
    let leads = LeadSigma::new(params, &bloch);
    let engine = BornEngine::new(params, &grid, opts.taper_fraction);

    if params.g == 0.0 {
        let mut sigma = zero_sigma(params.n_sites, grid.n_points);
        add_leads(&mut sigma, &leads);
        let electron = dyson_electron(params, &bloch, &grid, &sigma, opts.eta_kernel)?;
        let zeros = vec![C64::new(0.0, 0.0); grid.n_points];
        let photon = photon_dyson(params, &grid, &engine, &zeros, &zeros);
        let chi_diag = chi_diag_from(&sigma);
        return Ok(NgfSolution {
            params: *params,
            grid,
            bloch,
            electron,
            photon,
            chi_diag,
            iterations: 1,
            residual: 0.0,
        });
    }

    let mut state = seed.unwrap_or_else(|| free_electron(params, &bloch, &grid, opts.filling));
    let mut mixing = opts.mixing;
    let mut prev_res = f64::INFINITY;
    let mut shrink_streak = 0usize;
    let mut last_res = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let (pi_l, pi_g) = engine.polarization(&state);
        let photon = photon_dyson(params, &grid, &engine, &pi_l, &pi_g);
        let mut sigma = engine.electron_sigma(&state, &photon);
        add_leads(&mut sigma, &leads);
        let candidate = dyson_electron(params, &bloch, &grid, &sigma, opts.eta_kernel)?;
        let (defect, scale) = defect_and_scale(&candidate, &state);
        let residual = defect / scale.max(f64::MIN_POSITIVE);
        last_res = residual;
        if residual < opts.tol {
            drop(state);
            drop(sigma);
            // One consistency pass so photon, self-energies and electron
            // propagators all derive from the returned state.
            let (pi_l, pi_g) = engine.polarization(&candidate);
            let photon = photon_dyson(params, &grid, &engine, &pi_l, &pi_g);
            let mut sigma = engine.electron_sigma(&candidate, &photon);
            add_leads(&mut sigma, &leads);
            let chi_diag = chi_diag_from(&sigma);
            return Ok(NgfSolution {
                params: *params,
                grid,
                bloch,
                electron: candidate,
                photon,
                chi_diag,
                iterations: iter,
                residual,
            });
        }
        if residual > prev_res {
            mixing = (0.5 * mixing).max(0.05);
            shrink_streak = 0;
        } else {
            shrink_streak += 1;
            if shrink_streak >= 4 {
                mixing = (1.2 * mixing).min(0.9);
                shrink_streak = 0;
            }
        }
        prev_res = residual;
        mix_into(&mut state, &candidate, mixing);
    }
    Err(CoreError::NotConverged {
        iterations: opts.max_iter,
        residual: last_res,
        tol: opts.tol,
    })
}

fn zero_sigma(n: usize, l: usize) -> Vec<BandBlock> {
    vec![BandBlock::zeros(n, l), BandBlock::zeros(n, l)]
}

fn add_leads(sigma: &mut [BandBlock], leads: &LeadSigma) {
    for band in 0..2 {
        let n = leads.lesser[band].nrows();
        let l = sigma[band].lesser.shape()[2];
        for k in 0..n {
            for kp in 0..n {
                let dl = leads.lesser[band][[k, kp]];
                let dg = leads.greater[band][[k, kp]];
                let dr = leads.retarded[band][[k, kp]];
                for i in 0..l {
                    sigma[band].lesser[[k, kp, i]] += dl;
                    sigma[band].greater[[k, kp, i]] += dg;
                    sigma[band].retarded[[k, kp, i]] += dr;
                }
            }
        }
    }
}

fn chi_diag_from(sigma: &[BandBlock]) -> Vec<Array2<f64>> {
    sigma
        .iter()
        .map(|b| {
            let n = b.lesser.shape()[0];
            let l = b.lesser.shape()[2];
            let mut chi = Array2::zeros((n, l));
            for k in 0..n {
                for i in 0..l {
                    chi[[k, i]] =
                        (C64::new(0.0, 1.0) * (b.greater[[k, k, i]] - b.lesser[[k, k, i]])).re;
                }
            }
            chi
        })
        .collect()
}

fn defect_and_scale(candidate: &ElectronGf, state: &ElectronGf) -> (f64, f64) {
    let mut defect = 0.0f64;
    let mut scale = 0.0f64;
    for band in 0..2 {
        for (c, s) in [
            (
                &candidate.bands[band].retarded,
                &state.bands[band].retarded,
            ),
            (&candidate.bands[band].lesser, &state.bands[band].lesser),
            (&candidate.bands[band].greater, &state.bands[band].greater),
        ] {
            for (cv, sv) in c.iter().zip(s.iter()) {
                defect = defect.max((cv - sv).norm());
                scale = scale.max(sv.norm());
            }
        }
    }
    (defect, scale)
}

fn mix_into(state: &mut ElectronGf, candidate: &ElectronGf, mixing: f64) {
    for (sb, cb) in state.bands.iter_mut().zip(&candidate.bands) {
        for (s, c) in [
            (&mut sb.retarded, &cb.retarded),
            (&mut sb.lesser, &cb.lesser),
            (&mut sb.greater, &cb.greater),
        ] {
            for (sv, cv) in s.iter_mut().zip(c.iter()) {
                *sv += mixing * (*cv - *sv);
            }
        }
    }
}
