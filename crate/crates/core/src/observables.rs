//! Solver-independent derived observables: normalized currents and their
//! enhancement over the decoupled baseline, real-time site-resolved spectral
//! functions with transfer-time extraction, polariton splittings from cavity
//! spectra, vacuum Rabi frequencies from band populations, and broadening
//! ratios between coupled and uncoupled runs.

use ndarray::Array2;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::ngf::observables as ngf_obs;
use crate::ngf::NgfSolution;
use crate::params::{DerivedScales, SystemParams};
use crate::qme::QmeSolution;
use crate::qme_eff::EffectiveSolution;
use crate::rates::decoupled_band_current;
use crate::{C64, CoreError, Result};

/// One steady-state run reduced to its scalar observables. Currents are in
/// units of e * gamma1 so runs at different lead rates stay comparable;
/// `delta_j = j/j0 - 1` against the analytic decoupled baseline `j0` in the
/// same units.
#[derive(Debug, Clone, Serialize)]
pub struct ObservableRecord {
    pub method: String,
    pub params: SystemParams,
    pub derived: DerivedScales,
    pub j: f64,
    pub j_source: f64,
    pub j_drain: f64,
    pub j_band: [f64; 2],
    pub j0: f64,
    pub delta_j: f64,
    /// Site populations indexed [band][site].
    pub populations: Vec<Vec<f64>>,
    pub nbar: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transfer: Option<TransferReport>,
    pub iterations: usize,
    pub residual: f64,
    pub warnings: Vec<String>,
}

/// Decoupled-band baseline current in units of e * gamma1.
pub fn baseline_current(params: &SystemParams) -> f64 {
    (decoupled_band_current(params.t1, params.gamma1).j
        + decoupled_band_current(params.t2, params.gamma2).j)
        / params.gamma1
}

fn population_rows(p: &Array2<f64>) -> Vec<Vec<f64>> {
    p.rows().into_iter().map(|r| r.to_vec()).collect()
}

impl ObservableRecord {
    fn assemble(
        method: &str,
        params: &SystemParams,
        j_source: f64,
        j_drain: f64,
        j: f64,
        j_band: [f64; 2],
        populations: Vec<Vec<f64>>,
        nbar: f64,
        iterations: usize,
        residual: f64,
        warnings: Vec<String>,
    ) -> Self {
        let scale = params.gamma1;
        let j0 = baseline_current(params);
        let j_scaled = j / scale;
        Self {
            method: method.to_string(),
            params: *params,
            derived: params.derived(),
            j: j_scaled,
            j_source: j_source / scale,
            j_drain: j_drain / scale,
            j_band: [j_band[0] / scale, j_band[1] / scale],
            j0,
            delta_j: if j0 > 0.0 { j_scaled / j0 - 1.0 } else { 0.0 },
            populations,
            nbar,
            omega_s: None,
            omega_n: None,
            chi_ratio: None,
            transfer: None,
            iterations,
            residual,
            warnings,
        }
    }

    pub fn from_qme(sol: &QmeSolution) -> Self {
        let r = &sol.report;
        Self::assemble(
            "qme-full",
            &sol.params,
            r.j_source,
            r.j_drain,
            r.j_net,
            r.j_band,
            population_rows(&r.populations),
            r.nbar,
            sol.iterations,
            sol.residual,
            sol.warnings.clone(),
        )
    }

    /// Record for the electron-only solution; `nbar` is the adiabatic
    /// estimate (4 gamma_c / kappa) <S+S->.
    pub fn from_effective(sol: &EffectiveSolution) -> Self {
        let r = &sol.report;
        Self::assemble(
            "qme-eff",
            &sol.params,
            r.j_source,
            r.j_drain,
            r.j_net,
            r.j_band,
            population_rows(&r.populations),
            sol.nbar_estimate,
            sol.iterations,
            sol.residual,
            sol.warnings.clone(),
        )
    }

    pub fn from_ngf(sol: &NgfSolution) -> Result<Self> {
        let r = ngf_obs::current(sol)?;
        Ok(Self::assemble(
            "ngf",
            &sol.params,
            r.j_source,
            r.j_drain,
            r.j_total,
            r.j_band,
            population_rows(&r.populations),
            ngf_obs::cavity_occupation(sol),
            sol.iterations,
            sol.residual,
            sol.params.validity_warnings(),
        ))
    }

    pub fn with_method(mut self, method: &str) -> Self {
        self.method = method.to_string();
        self
    }
}

/// Real-time, site-resolved spectral function of one band,
/// `amplitude[[j, m]] = 2 |<{c_{band,j}(tau_m), c+_{band,j0}(0)}>|`: the
/// envelope of the overlap profile of an excitation injected at `j0` after
/// time tau_m. The modulus strips the on-site carrier phase exp(-i e_band t)
/// so the profile tracks weight, not interference fringes. The on-site value
/// starts at 2 and decays with the escape rates.
#[derive(Debug, Clone)]
pub struct RealTimeSpectral {
    pub band: usize,
    pub j0: usize,
    pub dt: f64,
    pub times: Vec<f64>,
    pub amplitude: Array2<f64>,
}

/// Inverse Fourier transform of the Bloch-resolved spectral function
/// `i (G^> - G^<)` to time, then the Bloch-to-site transform. The time step
/// is fixed by the grid span (dt = 2 pi / (L d_omega)) and the reachable
/// horizon by the grid resolution (2 pi / d_omega).
pub fn spectral_function_realtime(
    sol: &NgfSolution,
    band: usize,
    j0: usize,
    t_max: f64,
) -> Result<RealTimeSpectral> {
    let n = sol.bloch.n;
    if band >= 2 || j0 >= n {
        return Err(CoreError::InvalidParams(format!(
            "band {band} / injection site {j0} outside a 2 x {n} chain"
        )));
    }
    let l = sol.grid.n_points;
    let d_omega = sol.grid.d_omega;
    let dt = 2.0 * std::f64::consts::PI / (l as f64 * d_omega);
    let window = l as f64 * dt;
    if !(t_max > 0.0) {
        return Err(CoreError::InvalidParams("horizon must be positive".into()));
    }
    if t_max > window {
        return Err(CoreError::GridTooCoarse(format!(
            "horizon {t_max:.3e} exceeds the periodic window 2 pi / d_omega = {window:.3e}; \
             refine the frequency grid"
        )));
    }
    let m_times = (t_max / dt).floor() as usize + 1;
    let times: Vec<f64> = (0..m_times).map(|m| m as f64 * dt).collect();

    // One forward FFT per Bloch pair: A(tau_m) picks up the grid-offset
    // phase exp(-i omega_min tau_m) on top of the DFT bins.
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(l);
    let gf = &sol.electron.bands[band];
    let pref = d_omega / (2.0 * std::f64::consts::PI);
    let omega_min = sol.grid.omega_min();
    let mut bloch_time = vec![vec![C64::new(0.0, 0.0); m_times]; n * n];
    let mut buf = vec![C64::new(0.0, 0.0); l];
    for k in 0..n {
        for kp in 0..n {
            for i in 0..l {
                buf[i] = C64::new(0.0, 1.0) * (gf.greater[[k, kp, i]] - gf.lesser[[k, kp, i]]);
            }
            fft.process(&mut buf);
            let dst = &mut bloch_time[k * n + kp];
            for m in 0..m_times {
                let phase = C64::new(0.0, -omega_min * times[m]).exp();
                dst[m] = pref * phase * buf[m];
            }
        }
    }

    let phi = &sol.bloch.phi;
    let mut amplitude = Array2::zeros((n, m_times));
    for j in 0..n {
        for m in 0..m_times {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                for kp in 0..n {
                    acc += phi[[j, k]] * phi[[j0, kp]] * bloch_time[k * n + kp][m];
                }
            }
            amplitude[[j, m]] = 2.0 * acc.norm();
        }
    }
    Ok(RealTimeSpectral { band, j0, dt, times, amplitude })
}

/// Transfer-time extraction from a real-time spectral function.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransferReport {
    /// First time at which the off-site weight fraction exceeds its
    /// equal-time value by more than the threshold.
    pub t_transfer: f64,
    /// The same time in units of the inverse coupling.
    pub t_times_g: f64,
    pub max_offsite_fraction: f64,
    /// Off-site fraction at equal time. Exactly zero for canonical modes;
    /// in practice a small spectral-quadrature residue that the detection
    /// subtracts out.
    pub baseline_fraction: f64,
    /// Of the off-site weight at maximum transfer, the fraction sitting at
    /// even offsets from the injection site (a two-site spatial period).
    pub even_offset_fraction: f64,
    pub threshold: f64,
}

/// Scans the envelope over time for the first crossing of
/// `off-site / total > baseline + threshold`, where the baseline is the
/// equal-time off-site fraction (ideally zero). Times where less than 1% of
/// the initial weight survives are ignored (decayed tail). The 5% default
/// threshold is a convention: small enough to catch a ~10% transfer, large
/// enough to sit above grid noise.
pub fn transfer_time(rt: &RealTimeSpectral, g: f64, threshold: f64) -> Result<TransferReport> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(CoreError::InvalidParams(format!(
            "transfer threshold {threshold} must lie in (0, 1)"
        )));
    }
    let (n, m_times) = rt.amplitude.dim();
    let weight = |m: usize| -> (f64, f64) {
        let mut total = 0.0;
        let mut off = 0.0;
        for j in 0..n {
            let w = rt.amplitude[[j, m]];
            total += w;
            if j != rt.j0 {
                off += w;
            }
        }
        (total, off)
    };
    let (total0, off0) = weight(0);
    let baseline = off0 / total0;
    let floor = 0.01 * total0;
    let mut first = None;
    let mut max_frac = baseline;
    let mut at_max = 0;
    for m in 1..m_times {
        let (total, off) = weight(m);
        if total < floor {
            break;
        }
        let frac = off / total;
        if frac > max_frac {
            max_frac = frac;
            at_max = m;
        }
        if first.is_none() && frac - baseline > threshold {
            first = Some(m);
        }
    }
    let Some(m_first) = first else {
        return Err(CoreError::NoTransferDetected { threshold });
    };
    let (_, off) = weight(at_max);
    let mut even = 0.0;
    for j in 0..n {
        if j != rt.j0 && rt.j0.abs_diff(j) % 2 == 0 {
            even += rt.amplitude[[j, at_max]];
        }
    }
    let t = rt.times[m_first];
    Ok(TransferReport {
        t_transfer: t,
        t_times_g: t * g,
        max_offsite_fraction: max_frac,
        baseline_fraction: baseline,
        even_offset_fraction: if off > 0.0 { even / off } else { 0.0 },
        threshold,
    })
}

/// Polariton peak positions extracted from a cavity spectral function.
#[derive(Debug, Clone)]
pub struct PolaritonPeaks {
    /// Half the distance between the outermost maxima.
    pub omega_s: f64,
    pub lower: f64,
    pub upper: f64,
    /// Interior maxima between the polariton pair (central-region weight).
    pub central: Vec<f64>,
}

/// Finds local maxima of `a_c` above 1e-3 of the global maximum, refines
/// each by a parabola through its three-point neighborhood, and reads the
/// splitting off the outermost pair.
pub fn polariton_splitting(omega: &[f64], a_c: &[f64]) -> Result<PolaritonPeaks> {
    if omega.len() != a_c.len() || omega.len() < 3 {
        return Err(CoreError::InvalidParams(
            "need matching omega / A_c arrays with at least 3 points".into(),
        ));
    }
    let peak = a_c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return Err(CoreError::PeaksNotResolved("spectrum is non-positive".into()));
    }
    let cutoff = 1e-3 * peak;
    let mut maxima = Vec::new();
    for i in 1..a_c.len() - 1 {
        if a_c[i] > cutoff && a_c[i] > a_c[i - 1] && a_c[i] >= a_c[i + 1] {
            let denom = a_c[i - 1] - 2.0 * a_c[i] + a_c[i + 1];
            let shift = if denom.abs() > 1e-300 {
                0.5 * (a_c[i - 1] - a_c[i + 1]) / denom
            } else {
                0.0
            };
            let d = omega[i + 1] - omega[i];
            maxima.push(omega[i] + shift.clamp(-0.5, 0.5) * d);
        }
    }
    if maxima.len() < 2 {
        return Err(CoreError::PeaksNotResolved(format!(
            "found {} maxima; the collective coupling has not split the cavity line",
            maxima.len()
        )));
    }
    maxima.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lower = maxima[0];
    let upper = *maxima.last().unwrap();
    Ok(PolaritonPeaks {
        omega_s: 0.5 * (upper - lower),
        lower,
        upper,
        central: maxima[1..maxima.len() - 1].to_vec(),
    })
}

/// Vacuum Rabi frequency g sqrt(N1 - N2) from band populations (shape 2 x N).
/// Steady states keep N1 >= N2; an inversion is reported as an error. The
/// result can never exceed g sqrt(N).
pub fn vacuum_rabi(populations: &Array2<f64>, g: f64) -> Result<f64> {
    let n1: f64 = populations.row(0).sum();
    let n2: f64 = populations.row(1).sum();
    if n1 < n2 {
        return Err(CoreError::InvertedPopulations { delta: n1 - n2 });
    }
    let omega_n = g * (n1 - n2).sqrt();
    let cap = g * (populations.ncols() as f64).sqrt();
    if omega_n > cap * (1.0 + 1e-9) {
        return Err(CoreError::ConsistencyViolation(format!(
            "Omega_n = {omega_n:.6e} exceeds g sqrt(N) = {cap:.6e}; populations out of range"
        )));
    }
    Ok(omega_n)
}

/// Broadening of the resonant lower-band Bloch state against a decoupled
/// baseline run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BroadeningRatio {
    /// chi_{1,k0}(omega_{1,k0}) with the cavity coupled.
    pub chi: f64,
    /// Same quantity from the g = 0 run (leads only).
    pub chi0: f64,
    pub ratio: f64,
}

/// Reads the total broadening function of both runs at the band-center
/// Bloch state k0 (odd N required) and its bare energy.
pub fn broadening_ratio(sol: &NgfSolution, baseline: &NgfSolution) -> Result<BroadeningRatio> {
    let (p, q) = (&sol.params, &baseline.params);
    if q.g != 0.0 {
        return Err(CoreError::ParameterMismatch(format!(
            "baseline run must be decoupled, got g = {}",
            q.g
        )));
    }
    let same = p.n_sites == q.n_sites
        && p.t1 == q.t1
        && p.t2 == q.t2
        && p.gamma1 == q.gamma1
        && p.gamma2 == q.gamma2
        && p.omega1 == q.omega1
        && p.omega2 == q.omega2
        && p.omega_c == q.omega_c
        && p.kappa == q.kappa;
    if !same {
        return Err(CoreError::ParameterMismatch(
            "runs differ in more than the coupling strength".into(),
        ));
    }
    let k0 = sol.bloch.k0.ok_or_else(|| {
        CoreError::InvalidParams("band-center Bloch state needs an odd chain length".into())
    })?;
    let omega_res = sol.bloch.dispersion(p, 0)[k0];
    let chi = sol.chi_diag[0][[k0, sol.grid.nearest(omega_res)]];
    let chi0 = baseline.chi_diag[0][[k0, baseline.grid.nearest(omega_res)]];
    if !(chi0 > 0.0) {
        return Err(CoreError::ConsistencyViolation(format!(
            "baseline broadening chi0 = {chi0:.3e} must be positive"
        )));
    }
    Ok(BroadeningRatio { chi, chi0, ratio: chi / chi0 })
}
