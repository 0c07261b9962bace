//! Photon Dyson equation and first-order polarization diagnostics.
//!
//! The cavity displacement propagator obeys
//!
//!   D^r(w)  = 1 / [ (w^2 - w_c^2)/(2 w_c) - Pi^r(w) ],
//!   D^<>(w) = |D^r(w)|^2 Pi^<>(w),
//!
//! with Pi = Pi_bath + Pi_interband. The flat Markovian loss bath gives the
//! exact odd retarded part -i (kappa/2) sgn(w) (its dispersive partner is a
//! scale-free log divergence absorbed into w_c) and occupation components
//! Pi^<_P = -i kappa theta(-w), Pi^>_P = -i kappa theta(w). The interband
//! part comes from the Born bubble; its retarded piece goes through the same
//! Kramers-Kronig reconstruction as the electron self-energies.
//!
//! To first order in g^2 with static occupations n_ak the bubble sums to
//!
//!   Pi^r(w) = g^2 Sum_k (n_1k - n_2k) 2 w21_k / ((w + i0)^2 - w21_k^2),
//!
//! which for degenerate transitions collapses to the collective form
//! 2 Omega^2 w21 / ((w + i0)^2 - w21^2) with Omega = g sqrt(Sum_k (n1 - n2)).
//! Poles of D^r built on it sit at w^2 = w21^2 +- 2 w21 Omega on resonance:
//! the polariton doublet.

use crate::bloch::BlochBasis;
use crate::grid::FrequencyGrid;
use crate::ngf::free::bath_polarization;
use crate::ngf::selfenergy::BornEngine;
use crate::ngf::PhotonGf;
use crate::{C64, SystemParams};

/// Full photon propagator from interband polarization components (bath terms
/// are added internally).
pub fn photon_dyson(
    params: &SystemParams,
    grid: &FrequencyGrid,
    engine: &BornEngine,
    pi_less_i: &[C64],
    pi_great_i: &[C64],
) -> PhotonGf {
    let l = grid.n_points;
    let wc = params.omega_c;
    let kappa = params.kappa;
    let (h, chi) = engine.dispersive_pair(pi_less_i, pi_great_i);
    let (bath_less, bath_great) = bath_polarization(params, grid);
    let i_c = C64::new(0.0, 1.0);
    let mut retarded = Vec::with_capacity(l);
    let mut lesser = Vec::with_capacity(l);
    let mut greater = Vec::with_capacity(l);
    for j in 0..l {
        let w = grid.omega(j);
        let sgn = if w > 0.0 {
            1.0
        } else if w < 0.0 {
            -1.0
        } else {
            0.0
        };
        let pi_r_interband = 0.5 * (h[j] - i_c * chi[j]);
        let denom = C64::new((w * w - wc * wc) / (2.0 * wc), 0.5 * kappa * sgn)
            - pi_r_interband;
        let dr = C64::new(1.0, 0.0) / denom;
        let weight = dr * dr.conj();
        retarded.push(dr);
        lesser.push(weight * (bath_less[j] + pi_less_i[j]));
        greater.push(weight * (bath_great[j] + pi_great_i[j]));
    }
    PhotonGf {
        retarded,
        lesser,
        greater,
    }
}

/// First-order retarded polarization for fixed band occupations, evaluated
/// with an explicit infinitesimal eta.
pub fn polarization_first_order(
    params: &SystemParams,
    bloch: &BlochBasis,
    n_lower: f64,
    n_upper: f64,
    omega: f64,
    eta: f64,
) -> C64 {
    let d1 = bloch.dispersion(params, 0);
    let d2 = bloch.dispersion(params, 1);
    let g2 = params.g * params.g;
    let w = C64::new(omega, eta);
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..bloch.n {
        let w21 = d2[k] - d1[k];
        acc += g2 * (n_lower - n_upper) * 2.0 * w21 / (w * w - w21 * w21);
    }
    acc
}

/// Collective (degenerate-transition) form of the same function with
/// Omega = g sqrt(N (n1 - n2)).
pub fn polarization_collective(
    params: &SystemParams,
    n_sites: usize,
    n_lower: f64,
    n_upper: f64,
    omega: f64,
    eta: f64,
) -> C64 {
    let w21 = params.omega21();
    let omega_n2 = params.g * params.g * n_sites as f64 * (n_lower - n_upper);
    let w = C64::new(omega, eta);
    2.0 * omega_n2 * w21 / (w * w - w21 * w21)
}

/// Real part of the inverse photon propagator with a first-order bubble;
/// zeros locate the polariton branches.
pub fn inverse_propagator_first_order(
    params: &SystemParams,
    bloch: &BlochBasis,
    n_lower: f64,
    n_upper: f64,
    omega: f64,
) -> f64 {
    let wc = params.omega_c;
    let d0_inv = (omega * omega - wc * wc) / (2.0 * wc);
    let pi = polarization_first_order(params, bloch, n_lower, n_upper, omega, 0.0);
    d0_inv - pi.re
}

/// Bath-only occupation integrand weight beyond the grid window: the
/// lesser-component tail Int_{|w| > W} dw/2pi Im D^<_bath. The integrand is
/// -kappa |D^r_bath|^2 on w < -W (empty cavity has no positive-frequency
/// lesser weight), mapped to [0, 1) and integrated by Simpson's rule.
pub fn bath_lesser_tail(params: &SystemParams, half_width: f64) -> f64 {
    let wc = params.omega_c;
    let kappa = params.kappa;
    let integrand = |u: f64| -> f64 {
        let dr2 = 4.0 * wc * wc / ((u * u - wc * wc).powi(2) + kappa * kappa * wc * wc);
        -kappa * dr2
    };
    // u = W + s/(1-s): ds Jacobian 1/(1-s)^2.
    let steps = 2000;
    let h = 1.0 / steps as f64;
    let mut total = 0.0;
    for j in 0..steps {
        let s0 = j as f64 * h;
        let s1 = s0 + h;
        let sm = 0.5 * (s0 + s1);
        let eval = |s: f64| -> f64 {
            if s >= 1.0 {
                return 0.0;
            }
            let u = half_width + s / (1.0 - s);
            integrand(u) / ((1.0 - s) * (1.0 - s))
        };
        total += h / 6.0 * (eval(s0) + 4.0 * eval(sm) + eval(s1));
    }
    total / (2.0 * std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ngf::free::{free_electron, Filling};
    use approx::assert_abs_diff_eq;

    fn params(g: f64, n: usize) -> SystemParams {
        SystemParams {
            n_sites: n,
            t1: 0.0,
            t2: 0.0,
            gamma1: 1e-3,
            gamma2: 1e-3,
            omega1: -0.5,
            omega2: 0.5,
            omega_c: 1.0,
            kappa: 0.1,
            g,
        }
    }

    fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        let (flo, fhi) = (f(lo), f(hi));
        assert!(
            flo * fhi < 0.0,
            "no sign change on [{lo}, {hi}]: {flo}, {fhi}"
        );
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) * f(lo) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn polariton_poles_split_by_collective_coupling() {
        // Resonant cavity, inverted filling difference n1 - n2 = 1, N = 3
        // flat sites: poles of the first-order propagator at
        // w^2 = w21^2 +- 2 w21 g sqrt(N).
        let p = params(0.05, 3);
        let bloch = BlochBasis::new(3);
        let omega_n = p.g * (3.0f64).sqrt();
        let upper = bisect(1.0 + 1e-4, 1.4, |w| {
            inverse_propagator_first_order(&p, &bloch, 1.0, 0.0, w)
        });
        let lower = bisect(0.6, 1.0 - 1e-4, |w| {
            inverse_propagator_first_order(&p, &bloch, 1.0, 0.0, w)
        });
        assert_abs_diff_eq!(upper, (1.0 + 2.0 * omega_n).sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(lower, (1.0 - 2.0 * omega_n).sqrt(), epsilon = 1e-10);
        // Collective and summed forms agree for degenerate transitions.
        for w in [0.3, 0.8, 1.3] {
            let a = polarization_first_order(&p, &bloch, 1.0, 0.0, w, 1e-9);
            let b = polarization_collective(&p, 3, 1.0, 0.0, w, 1e-9);
            assert!((a - b).norm() < 1e-12 * b.norm());
        }
    }

    #[test]
    fn dressed_propagator_reduces_to_bath_form_without_coupling() {
        let p = params(0.0, 2);
        let grid = FrequencyGrid::symmetric(2.0, 8192, 4.0).unwrap();
        let engine = BornEngine::new(&p, &grid, 0.05);
        let zeros = vec![C64::new(0.0, 0.0); grid.n_points];
        let d = photon_dyson(&p, &grid, &engine, &zeros, &zeros);
        let bath = crate::ngf::free::bath_photon(&p, &grid);
        for i in (0..grid.n_points).step_by(61) {
            assert!((d.retarded[i] - bath.retarded[i]).norm() < 1e-12);
            assert!((d.lesser[i] - bath.lesser[i]).norm() < 1e-12);
            assert!((d.greater[i] - bath.greater[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn interband_bubble_shifts_the_cavity_pole() {
        // Feed the numerically generated flat-band bubble through the photon
        // Dyson equation and check the upper polariton peak location against
        // the first-order prediction. Moderate g so the splitting clears the
        // peak widths.
        let p = params(2.5e-2, 2);
        let bloch = BlochBasis::new(2);
        let grid = FrequencyGrid::symmetric(2.0, 32768, 4.0).unwrap();
        let el = free_electron(&p, &bloch, &grid, Filling::default());
        let engine = BornEngine::new(&p, &grid, 0.05);
        let (pl, pg) = engine.polarization(&el);
        let d = photon_dyson(&p, &grid, &engine, &pl, &pg);
        let omega_n = p.g * (2.0f64).sqrt();
        let expect_upper = (1.0 + 2.0 * omega_n).sqrt();
        // Locate the DOS maximum above w21.
        let start = grid.nearest(1.02);
        let stop = grid.nearest(1.3);
        let mut best = (0.0, 0.0f64);
        for i in start..stop {
            let dos = -2.0 * d.retarded[i].im;
            if dos > best.1 {
                best = (grid.omega(i), dos);
            }
        }
        assert_abs_diff_eq!(best.0, expect_upper, epsilon = 2e-3);
    }

    #[test]
    fn bath_tail_accounts_for_missing_lorentzian_weight() {
        // Window ending just past the cavity line: grid integral plus tail
        // must reproduce the closed-form lesser weight of the empty cavity.
        // With sgn-form damping that weight is not exactly -1: partial
        // fractions with Int_0^inf du/(u^2 + b^2) = pi/(2b) give
        //   Int dw/2pi Im D^< = -w_c Im sqrt(-w_c^2 + i kappa w_c) / |...|
        //                     = -1 + 3 kappa^2/(8 w_c^2) + O(kappa^4).
        let p = params(0.0, 2);
        let grid = FrequencyGrid::symmetric(1.8, 65536, 4.0).unwrap();
        let bath = crate::ngf::free::bath_photon(&p, &grid);
        let on_grid: f64 = bath.lesser.iter().map(|v| v.im).sum::<f64>() * grid.d_omega
            / (2.0 * std::f64::consts::PI);
        // Lesser weight sits entirely at w < 0; the grid covers down to
        // exactly -half_width, so the tail starts there.
        let tail = bath_lesser_tail(&p, -grid.omega_min());
        let b2 = C64::new(-p.omega_c * p.omega_c, p.kappa * p.omega_c);
        let exact = -p.omega_c * b2.sqrt().im / b2.norm();
        assert_abs_diff_eq!(on_grid + tail, exact, epsilon = 1e-6);
        assert!(tail < -1e-4, "tail should be a visible correction: {tail}");
    }
}
