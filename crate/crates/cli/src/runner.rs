//! Single-point execution: dispatches one method at one parameter set and
//! packages the result as an [`ObservableRecord`] plus optional spectra.
//!
//! The record is the cross-method currency: every solver reduces to the same
//! normalized currents and populations, so sweeps and comparisons can mix
//! methods freely. Spectra (photon spectral function, band-resolved real-time
//! profiles) ride along only where the method produces them.

use anyhow::{Context, Result};
use ndarray::Array2;
use serde_json::{json, Value};

use fermicav_core::observables::{
    self, ObservableRecord, RealTimeSpectral,
};
use fermicav_core::qme::RegressionOptions;
use fermicav_core::rates::{
    decoupled_band_current, delta_j_perturbative, meanfield_steady,
};
use fermicav_core::{CoreError, SystemParams};

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Ngf,
    QmeFull,
    QmeEff,
    Rates,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ngf => "ngf",
            Method::QmeFull => "qme-full",
            Method::QmeEff => "qme-eff",
            Method::Rates => "rates",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "ngf" => Some(Method::Ngf),
            "qme-full" => Some(Method::QmeFull),
            "qme-eff" => Some(Method::QmeEff),
            "rates" => Some(Method::Rates),
            _ => None,
        }
    }
}

/// Everything a single run produces. `metadata` echoes the options the
/// solver actually used, so a summary file pins its own provenance.
pub struct RunOutput {
    pub record: ObservableRecord,
    pub metadata: Value,
    /// (omega, A_c) pairs, whichever method produced them.
    pub cavity_spectrum: Option<(Vec<f64>, Vec<f64>)>,
    /// Frequency-resolved electron spectra: omega plus the state-summed
    /// spectral function of each band.
    pub electron_spectra: Option<ElectronSpectra>,
    pub realtime: Option<RealTimeSpectral>,
}

pub struct ElectronSpectra {
    pub omega: Vec<f64>,
    pub a_band: [Vec<f64>; 2],
    pub im_d_lesser: Vec<f64>,
}

/// Runs `method` on the config's parameters, with all observable extras the
/// config asks for.
pub fn run(method: Method, cfg: &RunConfig) -> Result<RunOutput> {
    run_at(method, &cfg.system, cfg, true)
}

/// Record-only variant used by sweeps: no spectra, no real-time transform.
pub fn run_point(method: Method, params: &SystemParams, cfg: &RunConfig) -> Result<ObservableRecord> {
    Ok(run_at(method, params, cfg, false)?.record)
}

fn run_at(
    method: Method,
    params: &SystemParams,
    cfg: &RunConfig,
    extras: bool,
) -> Result<RunOutput> {
    cfg.observables.validate()?;
    match method {
        Method::Ngf => run_ngf(params, cfg, extras),
        Method::QmeFull => run_qme_full(params, cfg, extras),
        Method::QmeEff => run_qme_eff(params, cfg),
        Method::Rates => run_rates(params, cfg),
    }
    .with_context(|| format!("method {} failed", method.name()))
}

fn run_ngf(params: &SystemParams, cfg: &RunConfig, extras: bool) -> Result<RunOutput> {
    let opts = cfg.ngf.to_options();
    let sol = fermicav_core::ngf::solve(params, &opts)?;
    let mut record = ObservableRecord::from_ngf(&sol)?;

    let omega = sol.grid.values();
    let a_c: Vec<f64> = sol.photon.retarded.iter().map(|d| -2.0 * d.im).collect();
    let im_d_lesser: Vec<f64> = sol.photon.lesser.iter().map(|d| d.im).collect();
    let mut a_band: [Vec<f64>; 2] = [vec![0.0; omega.len()], vec![0.0; omega.len()]];
    for band in 0..2 {
        let gf = &sol.electron.bands[band];
        for k in 0..sol.bloch.n {
            for (i, slot) in a_band[band].iter_mut().enumerate() {
                *slot += (fermicav_core::C64::new(0.0, 1.0)
                    * (gf.greater[[k, k, i]] - gf.lesser[[k, k, i]]))
                .re;
            }
        }
    }

    if params.g > 0.0 {
        attach_peak_diagnostics(&mut record, &omega, &a_c, params);
    }

    let mut realtime = None;
    if extras && cfg.observables.realtime_t_max > 0.0 {
        let band = cfg.observables.realtime_band - 1;
        let site = cfg.observables.realtime_site - 1;
        let rt = observables::spectral_function_realtime(
            &sol,
            band,
            site,
            cfg.observables.realtime_t_max,
        )?;
        match observables::transfer_time(&rt, params.g, cfg.observables.transfer_threshold) {
            Ok(report) => record.transfer = Some(report),
            Err(e) => record.warnings.push(format!("transfer detection: {e}")),
        }
        realtime = Some(rt);
    }

    let metadata = json!({
        "options": {
            "grid_points": sol.grid.n_points,
            "d_omega": sol.grid.d_omega,
            "omega_min": sol.grid.omega_min(),
            "omega_max": sol.grid.omega_max(),
            "eta": sol.grid.eta,
            "eta_kernel": opts.eta_kernel,
            "mixing": opts.mixing,
            "tol": opts.tol,
            "max_iter": opts.max_iter,
        },
    });

    Ok(RunOutput {
        record,
        metadata,
        cavity_spectrum: extras.then(|| (omega.clone(), a_c)),
        electron_spectra: extras.then(|| ElectronSpectra {
            omega,
            a_band,
            im_d_lesser,
        }),
        realtime,
    })
}

fn run_qme_full(params: &SystemParams, cfg: &RunConfig, extras: bool) -> Result<RunOutput> {
    let sol = fermicav_core::qme::solve(params, &cfg.qme)?;
    let mut record = ObservableRecord::from_qme(&sol);

    let mut cavity_spectrum = None;
    if extras && cfg.observables.cavity_dos && params.g > 0.0 {
        let obs = &cfg.observables;
        let d = params.derived();
        let span = if obs.dos_span > 0.0 {
            obs.dos_span
        } else {
            (6.0 * d.g_collective)
                .max(6.0 * params.kappa)
                .max(20.0 * (params.gamma1 + params.gamma2))
        };
        let center = 0.5 * (params.omega_c + d.omega21);
        let omega: Vec<f64> = (0..obs.dos_points)
            .map(|i| {
                center - span + 2.0 * span * i as f64 / (obs.dos_points - 1) as f64
            })
            .collect();
        let reg = RegressionOptions {
            t_max: obs.dos_t_max,
            ..RegressionOptions::default()
        };
        match sol.cavity_dos(&omega, &reg) {
            Ok(dos) => {
                attach_peak_diagnostics(&mut record, &dos.omega, &dos.a_c, params);
                cavity_spectrum = Some((dos.omega, dos.a_c));
            }
            Err(e) => record.warnings.push(format!("cavity spectrum: {e}")),
        }
    }

    let metadata = json!({ "options": &cfg.qme });
    Ok(RunOutput {
        record,
        metadata,
        cavity_spectrum,
        electron_spectra: None,
        realtime: None,
    })
}

fn run_qme_eff(params: &SystemParams, cfg: &RunConfig) -> Result<RunOutput> {
    let sol = fermicav_core::qme_eff::solve_effective(params, &cfg.qme_eff)?;
    let record = ObservableRecord::from_effective(&sol);
    let metadata = json!({
        "options": &cfg.qme_eff,
        "rates": {
            "gamma_c": sol.rates.gamma_c,
            "nbar_bound": sol.nbar_bound,
            "s_plus_s_minus": sol.s_plus_s_minus,
        },
    });
    Ok(RunOutput {
        record,
        metadata,
        cavity_spectrum: None,
        electron_spectra: None,
        realtime: None,
    })
}

/// The factorized rate equations describe one source site and one drain site
/// per band regardless of N; the record's populations carry those two
/// effective sites.
fn run_rates(params: &SystemParams, cfg: &RunConfig) -> Result<RunOutput> {
    params.validate()?;
    let gamma = params.gamma1;
    let mut warnings = params.validity_warnings();
    if params.gamma2 != params.gamma1 {
        warnings.push(
            "rate equations assume a single lead rate; gamma1 is used for both bands".into(),
        );
    }
    let gc = params.gamma_c();
    let st = meanfield_steady(gamma, params.t2, gc, cfg.rates.damp_coherence)?;
    let pert = delta_j_perturbative(params.t2, gamma, gc);
    if let Some(w) = &pert.warning {
        warnings.push(w.clone());
    }

    let j_source = gamma * (2.0 - st.n11 - st.n21);
    let j_drain = gamma * (st.n12 + st.n22);
    let j_band = [
        0.5 * gamma * (1.0 - st.n11 + st.n12),
        0.5 * gamma * (1.0 - st.n21 + st.n22),
    ];
    let j = 0.5 * (j_source + j_drain);
    // The factorized model drops t1 entirely, so its decoupled limit is the
    // bare upper-band current alone; measuring the enhancement against the
    // shared two-band baseline would report a spurious offset at g = 0.
    let j0 = decoupled_band_current(params.t2, gamma).j / gamma;
    let j_norm = j / gamma;
    let delta_j = if j0 != 0.0 { j_norm / j0 - 1.0 } else { 0.0 };

    let record = ObservableRecord {
        method: "rates".into(),
        params: *params,
        derived: params.derived(),
        j: j_norm,
        j_source: j_source / gamma,
        j_drain: j_drain / gamma,
        j_band: [j_band[0] / gamma, j_band[1] / gamma],
        j0,
        delta_j,
        populations: vec![vec![st.n11, st.n12], vec![st.n21, st.n22]],
        nbar: 0.0,
        omega_s: None,
        omega_n: None,
        chi_ratio: None,
        transfer: None,
        iterations: 0,
        residual: 0.0,
        warnings,
    };

    let j20 = decoupled_band_current(params.t2, gamma).j;
    let metadata = json!({
        "options": { "damp_coherence": cfg.rates.damp_coherence },
        "baselines": {
            "j0_band1": decoupled_band_current(params.t1, gamma).j / gamma,
            "j0_band2": j20 / gamma,
        },
        "meanfield": {
            "bond_current_band2": 2.0 * params.t2 * st.c,
            "phi": st.phi,
            "delta_j_band2": if j20 > 0.0 {
                2.0 * params.t2 * st.c / j20 - 1.0
            } else {
                0.0
            },
        },
        "perturbative": {
            "delta_j": pert.full,
            "delta_j_wideband": pert.simplified,
            "cooperativity": gc / gamma,
        },
    });

    Ok(RunOutput {
        record,
        metadata,
        cavity_spectrum: None,
        electron_spectra: None,
        realtime: None,
    })
}

/// Polariton splitting and the collective-coupling estimate from the
/// populations; failures are informational (single peak in the overdamped
/// regime, inverted populations) and land in the warnings.
fn attach_peak_diagnostics(
    record: &mut ObservableRecord,
    omega: &[f64],
    a_c: &[f64],
    params: &SystemParams,
) {
    match observables::polariton_splitting(omega, a_c) {
        Ok(peaks) => record.omega_s = Some(peaks.omega_s),
        Err(CoreError::PeaksNotResolved(why)) => {
            record.warnings.push(format!("no polariton doublet: {why}"));
        }
        Err(e) => record.warnings.push(format!("peak search: {e}")),
    }
    let n_sites = record.populations.first().map_or(0, Vec::len);
    if n_sites > 0 {
        let pops = Array2::from_shape_fn((2, n_sites), |(b, j)| record.populations[b][j]);
        match observables::vacuum_rabi(&pops, params.g) {
            Ok(omega_n) => record.omega_n = Some(omega_n),
            Err(e) => record.warnings.push(format!("collective coupling: {e}")),
        }
    }
}

/// Maps a method-failure chain back to a flat string for sweep rows.
pub fn error_chain(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for (i, cause) in err.chain().enumerate() {
        if i > 0 {
            out.push_str(": ");
        }
        out.push_str(&cause.to_string());
    }
    out
}
