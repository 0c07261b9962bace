//! Transport and cavity observables extracted from a converged solution.
//!
//! Band-resolved transmission on the grid,
//!
//!   T_a(w) = Tr[ -2 s1 Im G^r_a(w) + (sN - s1) Im G^<_a(w) ],
//!
//! integrates to the symmetrized current
//!
//!   J_a = (Gamma_a / 2) Int dw/2pi T_a(w)
//!       = (Gamma_a / 2) (1 - n_a1 + n_aN),
//!
//! in units e = 1. An independent expression uses drain populations only,
//! J = Sum_a Gamma_a n_aN; in a converged steady state both must agree
//! (total electron number is conserved by the cavity coupling), so a
//! mismatch beyond 1% is reported as a consistency violation rather than
//! silently averaged away.
//!
//! Real-space band populations come from the lesser function,
//! n_aj = Sum_kk' phi^j_k phi^j_k' Int dw/2pi Im G^<_a,kk'(w).

use ndarray::Array2;

use crate::ngf::photon::bath_lesser_tail;
use crate::ngf::scba::NgfSolution;
use crate::{CoreError, Result};

/// Relative disagreement between the two current expressions that triggers
/// an error.
pub const CURRENT_CONSISTENCY_TOL: f64 = 0.01;

/// Slack beyond [0, 1] tolerated in site populations before the solution is
/// declared unphysical.
pub const POPULATION_SLACK: f64 = 0.02;

pub struct CurrentReport {
    /// Symmetrized total current, (source + drain)/2 summed over bands.
    pub j_total: f64,
    /// Symmetrized per-band currents.
    pub j_band: [f64; 2],
    /// Sum_a Gamma_a (1 - n_a1).
    pub j_source: f64,
    /// Sum_a Gamma_a n_aN.
    pub j_drain: f64,
    /// Site populations per band, shape (2, N).
    pub populations: Array2<f64>,
}

/// Band-resolved transmission function on the frequency grid.
pub fn transmission(sol: &NgfSolution) -> [Vec<f64>; 2] {
    let n = sol.bloch.n;
    let l = sol.grid.n_points;
    let s1 = &sol.bloch.sigma1;
    let sn = &sol.bloch.sigma_n;
    let mut out = [vec![0.0; l], vec![0.0; l]];
    for band in 0..2 {
        let b = &sol.electron.bands[band];
        let t = &mut out[band];
        for k in 0..n {
            for kp in 0..n {
                let w_s1 = s1[[k, kp]];
                let w_dn = sn[[k, kp]] - s1[[k, kp]];
                // Tr[s M] = Sum_kk' s_kk' M_k'k; s is real symmetric.
                for i in 0..l {
                    t[i] += -2.0 * w_s1 * b.retarded[[kp, k, i]].im
                        + w_dn * b.lesser[[kp, k, i]].im;
                }
            }
        }
    }
    out
}

/// Site populations per band from the lesser function.
pub fn populations(sol: &NgfSolution) -> Result<Array2<f64>> {
    let n = sol.bloch.n;
    let pref = sol.grid.d_omega / (2.0 * std::f64::consts::PI);
    let mut out = Array2::zeros((2, n));
    for band in 0..2 {
        let b = &sol.electron.bands[band];
        // Occupation matrix rho_kk' = Int dw/2pi Im G^<.
        let mut rho = Array2::<f64>::zeros((n, n));
        for k in 0..n {
            for kp in 0..n {
                let lane = b.lesser.slice(ndarray::s![k, kp, ..]);
                rho[[k, kp]] = lane.iter().map(|v| v.im).sum::<f64>() * pref;
            }
        }
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                for kp in 0..n {
                    acc += sol.bloch.phi[[j, k]] * sol.bloch.phi[[j, kp]] * rho[[k, kp]];
                }
            }
            if !(-POPULATION_SLACK..=1.0 + POPULATION_SLACK).contains(&acc) {
                return Err(CoreError::UnphysicalPopulation {
                    band,
                    site: j + 1,
                    value: acc,
                });
            }
            out[[band, j]] = acc;
        }
    }
    Ok(out)
}

/// Currents via both routes, with the cross-check between them.
pub fn current(sol: &NgfSolution) -> Result<CurrentReport> {
    let n = sol.bloch.n;
    let trans = transmission(sol);
    let pops = populations(sol)?;
    let pref = sol.grid.d_omega / (2.0 * std::f64::consts::PI);
    let mut j_band = [0.0; 2];
    let mut j_source = 0.0;
    let mut j_drain = 0.0;
    for band in 0..2 {
        let gamma = sol.params.gamma(band);
        j_band[band] = 0.5 * gamma * trans[band].iter().sum::<f64>() * pref;
        j_source += gamma * (1.0 - pops[[band, 0]]);
        j_drain += gamma * pops[[band, n - 1]];
    }
    let j_total = j_band[0] + j_band[1];
    let scale = j_total.abs().max(j_drain.abs()).max(f64::MIN_POSITIVE);
    if (j_total - j_drain).abs() > CURRENT_CONSISTENCY_TOL * scale {
        return Err(CoreError::ConsistencyViolation(format!(
            "current mismatch: transmission integral {j_total:.6e} vs drain form {j_drain:.6e}"
        )));
    }
    Ok(CurrentReport {
        j_total,
        j_band,
        j_source,
        j_drain,
        populations: pops,
    })
}

/// Cavity displacement spectral function A_c(w) = -2 Im D^r(w).
pub fn cavity_dos(sol: &NgfSolution) -> Vec<f64> {
    sol.photon.retarded.iter().map(|d| -2.0 * d.im).collect()
}

/// Mean photon number from the equal-time lesser function,
/// nbar = -(1 + Int dw/2pi Im D^<)/2, with the analytic bath tail beyond
/// the grid window restored (the empty-cavity Lorentzian loses ~1e-2 of its
/// weight to the window edges otherwise).
pub fn cavity_occupation(sol: &NgfSolution) -> f64 {
    let on_grid: f64 = sol.photon.lesser.iter().map(|v| v.im).sum::<f64>() * sol.grid.d_omega
        / (2.0 * std::f64::consts::PI);
    // Bath lesser weight lives at w < 0; the window reaches -half_width there.
    let tail = bath_lesser_tail(&sol.params, -sol.grid.omega_min());
    -0.5 * (1.0 + on_grid + tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ngf::scba::{solve, ScbaOptions};
    use crate::SystemParams;
    use approx::assert_abs_diff_eq;

    fn params() -> SystemParams {
        SystemParams {
            n_sites: 2,
            t1: 1e-2,
            t2: 1e-2,
            gamma1: 1e-3,
            gamma2: 1e-3,
            omega1: -0.5,
            omega2: 0.5,
            omega_c: 1.0,
            kappa: 0.07,
            g: 0.0,
        }
    }

    // Decoupled two-site chain: J/Gamma = (1/2) / (1 + (Gamma/2t)^2) and the
    // drain site holds 1/(2 + Gamma^2/2t^2) electrons per band.
    #[test]
    fn decoupled_current_matches_closed_form() {
        let p = params();
        let sol = solve(&p, &ScbaOptions::default()).unwrap();
        let report = current(&sol).unwrap();
        let expect_j = 0.5 * p.gamma1 / (1.0 + (p.gamma1 / (2.0 * p.t1)).powi(2));
        for band in 0..2 {
            assert_abs_diff_eq!(report.j_band[band], expect_j, epsilon = 2e-3 * expect_j);
        }
        let expect_nn = 1.0 / (2.0 + p.gamma1 * p.gamma1 / (2.0 * p.t1 * p.t1));
        for band in 0..2 {
            assert_abs_diff_eq!(
                report.populations[[band, 1]],
                expect_nn,
                epsilon = 2e-3 * expect_nn
            );
            // Mirror symmetry of the two-site chain: n1 = 1 - nN.
            assert_abs_diff_eq!(
                report.populations[[band, 0]],
                1.0 - expect_nn,
                epsilon = 2e-3
            );
        }
        assert_abs_diff_eq!(
            report.j_source,
            report.j_drain,
            epsilon = 1e-3 * report.j_drain
        );
    }

    #[test]
    fn slow_band_limit_blocks_transport() {
        // t << Gamma: J/Gamma -> 2 (t/Gamma)^2, strongly suppressed.
        let p = SystemParams {
            t1: 1e-4,
            t2: 1e-4,
            ..params()
        };
        let sol = solve(&p, &ScbaOptions::default()).unwrap();
        let report = current(&sol).unwrap();
        let expect_j = 0.5 * p.gamma1 / (1.0 + (p.gamma1 / (2.0 * p.t1)).powi(2));
        assert_abs_diff_eq!(
            report.j_band[0],
            expect_j,
            epsilon = 3e-3 * expect_j
        );
        assert!(report.j_total < 0.05 * p.gamma1);
    }

    #[test]
    fn decoupled_cavity_is_empty() {
        let p = params();
        let sol = solve(&p, &ScbaOptions::default()).unwrap();
        let nbar = cavity_occupation(&sol);
        assert!(nbar.abs() < 1e-3, "nbar = {nbar}");
        // DOS positive above w = 0 and peaked at the cavity line.
        let dos = cavity_dos(&sol);
        let at_wc = sol.grid.nearest(p.omega_c);
        for i in sol.grid.zero_index() + 1..sol.grid.n_points {
            assert!(dos[i] >= -1e-12);
        }
        let max = dos
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!((max as i64 - at_wc as i64).abs() <= 1);
    }
}
