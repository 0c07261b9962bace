//! Bloch eigenbasis of an open N-site chain.
//!
//! With open boundaries the single-band eigenstates are standing waves
//! `phi^j_k = sqrt(2/(N+1)) sin(pi j k / (N+1))` (site j, mode k, both
//! 1-based) with dispersion `omega_{alpha,k} = omega_alpha
//! - 2 t_alpha cos(pi k / (N+1))`. The lead couplings become the rank-one
//! matrices `sigma^j_{k,k'} = phi^j_k phi^j_{k'}` for j = 1 (source) and
//! j = N (drain). For odd N the central mode k0 = (N+1)/2 sits exactly at
//! the band center, so the k0 interband transition is the one the resonant
//! cavity dresses first.

use ndarray::Array2;

use crate::params::SystemParams;

#[derive(Debug, Clone)]
pub struct BlochBasis {
    pub n: usize,
    /// `phi[[j, k]]`, 0-based storage of phi^{j+1}_{k+1}.
    pub phi: Array2<f64>,
    /// `sigma^1` in the Bloch basis (source site projector).
    pub sigma1: Array2<f64>,
    /// `sigma^N` in the Bloch basis (drain site projector).
    pub sigma_n: Array2<f64>,
    /// Central mode index (0-based) for odd N.
    pub k0: Option<usize>,
}

impl BlochBasis {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "chain needs at least one site");
        let norm = (2.0 / (n as f64 + 1.0)).sqrt();
        let mut phi = Array2::zeros((n, n));
        for j in 0..n {
            for k in 0..n {
                let arg = std::f64::consts::PI * ((j + 1) * (k + 1)) as f64 / (n as f64 + 1.0);
                phi[[j, k]] = norm * arg.sin();
            }
        }
        let sigma1 = Self::site_projector(&phi, 0);
        let sigma_n = Self::site_projector(&phi, n - 1);
        BlochBasis {
            n,
            phi,
            sigma1,
            sigma_n,
            k0: if n % 2 == 1 { Some(n / 2) } else { None },
        }
    }

    fn site_projector(phi: &Array2<f64>, j: usize) -> Array2<f64> {
        let n = phi.nrows();
        let mut s = Array2::zeros((n, n));
        for k in 0..n {
            for kp in 0..n {
                s[[k, kp]] = phi[[j, k]] * phi[[j, kp]];
            }
        }
        s
    }

    /// Mode energies of one band: omega_alpha - 2 t_alpha cos(pi k/(N+1)).
    pub fn dispersion(&self, params: &SystemParams, band: usize) -> Vec<f64> {
        let t = params.hopping(band);
        let w0 = params.band_center(band);
        (0..self.n)
            .map(|k| {
                w0 - 2.0 * t
                    * (std::f64::consts::PI * (k + 1) as f64 / (self.n as f64 + 1.0)).cos()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params_n(n: usize) -> SystemParams {
        SystemParams {
            n_sites: n,
            t1: 1e-4,
            t2: 0.1,
            gamma1: 1e-3,
            gamma2: 1e-3,
            omega1: -0.5,
            omega2: 0.5,
            omega_c: 1.0,
            kappa: 0.07,
            g: 0.0,
        }
    }

    #[test]
    fn two_site_closed_form() {
        // N = 2: phi = (1/sqrt(2)) [[1, 1], [1, -1]] up to column signs.
        let b = BlochBasis::new(2);
        let s = 0.5_f64.sqrt();
        assert_abs_diff_eq!(b.phi[[0, 0]], s, epsilon = 1e-14);
        assert_abs_diff_eq!(b.phi[[1, 0]], s, epsilon = 1e-14);
        assert_abs_diff_eq!(b.phi[[0, 1]], s, epsilon = 1e-14);
        assert_abs_diff_eq!(b.phi[[1, 1]], -s, epsilon = 1e-14);
        // sigma^1 + sigma^N = identity only at N = 2.
        for k in 0..2 {
            for kp in 0..2 {
                let expect = if k == kp { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(b.sigma1[[k, kp]] + b.sigma_n[[k, kp]], expect, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn three_site_dispersion() {
        let b = BlochBasis::new(3);
        let disp = b.dispersion(&params_n(3), 1);
        // 0.5 - 0.2 cos(pi k/4), k = 1..3.
        assert_abs_diff_eq!(disp[0], 0.5 - 0.2 * (std::f64::consts::PI / 4.0).cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(disp[1], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(disp[2], 0.5 + 0.2 * (std::f64::consts::PI / 4.0).cos(), epsilon = 1e-14);
        assert_eq!(b.k0, Some(1));
        // Central mode sits exactly at the band center.
        assert_abs_diff_eq!(disp[b.k0.unwrap()], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn orthonormal_and_complete() {
        for n in [2usize, 3, 5, 8, 11, 16] {
            let b = BlochBasis::new(n);
            for a in 0..n {
                for c in 0..n {
                    let mut over_k = 0.0; // sum_k phi^a_k phi^c_k
                    let mut over_j = 0.0; // sum_j phi^j_a phi^j_c
                    for i in 0..n {
                        over_k += b.phi[[a, i]] * b.phi[[c, i]];
                        over_j += b.phi[[i, a]] * b.phi[[i, c]];
                    }
                    let expect = if a == c { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(over_k, expect, epsilon = 1e-12);
                    assert_abs_diff_eq!(over_j, expect, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn site_projectors_have_unit_trace() {
        for n in [2usize, 3, 7, 12] {
            let b = BlochBasis::new(n);
            let tr1: f64 = (0..n).map(|k| b.sigma1[[k, k]]).sum();
            let trn: f64 = (0..n).map(|k| b.sigma_n[[k, k]]).sum();
            assert_abs_diff_eq!(tr1, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(trn, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn even_chain_has_no_central_mode() {
        assert_eq!(BlochBasis::new(4).k0, None);
    }

    #[test]
    fn bandwidth_monotone_in_n() {
        // Width 4 t cos(pi/(N+1)) grows toward 4t as N grows.
        let p = params_n(2);
        let w = |n: usize| {
            let b = BlochBasis::new(n);
            let d = b.dispersion(&p, 1);
            d[n - 1] - d[0]
        };
        assert_abs_diff_eq!(w(2), 2.0 * p.t2, epsilon = 1e-14);
        assert!(w(3) > w(2) && w(8) > w(3) && w(8) < 4.0 * p.t2);
    }
}
