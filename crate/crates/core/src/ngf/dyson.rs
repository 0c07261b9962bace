//! Dyson equation on the frequency grid.
//!
//! Per band and frequency, with the total self-energy (leads plus
//! light-matter),
//!
//!   G^r(w)  = [(w + i eta_k - w_k) delta - Sigma^r(w)]^-1,
//!   G^a     = (G^r)^dagger,
//!   G^<>(w) = G^r Sigma^<>(w) G^a.
//!
//! The kernel broadening eta_k defaults to zero: the leads supply a finite
//! anti-Hermitian part everywhere it matters, and an artificial eta of grid
//! scale would swamp lead rates Gamma comparable to the grid spacing. A
//! vanishing pivot (possible for flat degenerate bands, where the lead
//! matrices have rank 2 < N) surfaces as a SingularMatrix error rather than
//! being regularized away.

use crate::bloch::BlochBasis;
use crate::grid::FrequencyGrid;
use crate::linalg::{dagger_into, invert_flat, matmul_into};
use crate::ngf::{BandBlock, ElectronGf};
use crate::{C64, CoreError, Result, SystemParams};

pub fn dyson_electron(
    params: &SystemParams,
    bloch: &BlochBasis,
    grid: &FrequencyGrid,
    sigma: &[BandBlock],
    eta_kernel: f64,
) -> Result<ElectronGf> {
    let n = bloch.n;
    let l = grid.n_points;
    let mut out = ElectronGf::zeros(n, l);
    let mut a = vec![C64::new(0.0, 0.0); n * n];
    let mut ga = vec![C64::new(0.0, 0.0); n * n];
    let mut tmp = vec![C64::new(0.0, 0.0); n * n];
    let mut buf = vec![C64::new(0.0, 0.0); n * n];
    let mut sig = vec![C64::new(0.0, 0.0); n * n];
    for band in 0..2 {
        let disp = bloch.dispersion(params, band);
        let sb = &sigma[band];
        let ob = &mut out.bands[band];
        for i in 0..l {
            let w = grid.omega(i);
            for k in 0..n {
                for kp in 0..n {
                    let diag = if k == kp {
                        C64::new(w - disp[k], eta_kernel)
                    } else {
                        C64::new(0.0, 0.0)
                    };
                    a[k * n + kp] = diag - sb.retarded[[k, kp, i]];
                }
            }
            let gr = invert_flat(&a, n).ok_or_else(|| CoreError::SingularMatrix {
                omega: w,
                context: format!("electron Dyson inversion, band {band}"),
            })?;
            dagger_into(&gr, &mut ga, n);
            // Lesser: G^r Sigma^< G^a.
            for k in 0..n {
                for kp in 0..n {
                    sig[k * n + kp] = sb.lesser[[k, kp, i]];
                }
            }
            matmul_into(&sig, &ga, &mut tmp, n);
            matmul_into(&gr, &tmp, &mut buf, n);
            for k in 0..n {
                for kp in 0..n {
                    ob.lesser[[k, kp, i]] = buf[k * n + kp];
                }
            }
            // Greater: G^r Sigma^> G^a.
            for k in 0..n {
                for kp in 0..n {
                    sig[k * n + kp] = sb.greater[[k, kp, i]];
                }
            }
            matmul_into(&sig, &ga, &mut tmp, n);
            matmul_into(&gr, &tmp, &mut buf, n);
            for k in 0..n {
                for kp in 0..n {
                    ob.greater[[k, kp, i]] = buf[k * n + kp];
                    ob.retarded[[k, kp, i]] = gr[k * n + kp];
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ngf::selfenergy::LeadSigma;
    use approx::assert_abs_diff_eq;

    fn params() -> SystemParams {
        SystemParams {
            n_sites: 2,
            t1: 1e-2,
            t2: 1e-2,
            gamma1: 1e-3,
            gamma2: 2e-3,
            omega1: -0.5,
            omega2: 0.5,
            omega_c: 1.0,
            kappa: 0.1,
            g: 0.0,
        }
    }

    fn lead_blocks(p: &SystemParams, bloch: &BlochBasis, l: usize) -> Vec<BandBlock> {
        let leads = LeadSigma::new(p, bloch);
        let n = bloch.n;
        (0..2)
            .map(|band| {
                let mut b = BandBlock::zeros(n, l);
                for k in 0..n {
                    for kp in 0..n {
                        for i in 0..l {
                            b.lesser[[k, kp, i]] = leads.lesser[band][[k, kp]];
                            b.greater[[k, kp, i]] = leads.greater[band][[k, kp]];
                            b.retarded[[k, kp, i]] = leads.retarded[band][[k, kp]];
                        }
                    }
                }
                b
            })
            .collect()
    }

    #[test]
    fn zero_sigma_with_eta_reproduces_free_retarded() {
        let p = params();
        let bloch = BlochBasis::new(2);
        let grid = FrequencyGrid::symmetric(1.0, 1024, 4.0).unwrap();
        let sigma = vec![
            BandBlock::zeros(2, grid.n_points),
            BandBlock::zeros(2, grid.n_points),
        ];
        let gf = dyson_electron(&p, &bloch, &grid, &sigma, grid.eta).unwrap();
        let disp = bloch.dispersion(&p, 0);
        for i in (0..grid.n_points).step_by(31) {
            for k in 0..2 {
                let expect = C64::new(1.0, 0.0) / C64::new(grid.omega(i) - disp[k], grid.eta);
                assert!((gf.bands[0].retarded[[k, k, i]] - expect).norm() < 1e-13 * expect.norm());
                assert_eq!(gf.bands[0].lesser[[k, k, i]], C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn two_site_lead_broadened_closed_form() {
        // N = 2: s1 + sN = identity, so G^r is diagonal with HWHM Gamma/2,
        // and each Bloch state holds exactly half an electron (symmetric
        // fill/drain).
        let p = params();
        let bloch = BlochBasis::new(2);
        let grid = FrequencyGrid::symmetric(1.0, 65536, 4.0).unwrap();
        let sigma = lead_blocks(&p, &bloch, grid.n_points);
        let gf = dyson_electron(&p, &bloch, &grid, &sigma, 0.0).unwrap();
        for band in 0..2 {
            let gamma = p.gamma(band);
            let disp = bloch.dispersion(&p, band);
            for k in 0..2 {
                for i in (0..grid.n_points).step_by(127) {
                    let expect =
                        C64::new(1.0, 0.0) / C64::new(grid.omega(i) - disp[k], 0.5 * gamma);
                    let got = gf.bands[band].retarded[[k, k, i]];
                    assert!((got - expect).norm() < 1e-12 * expect.norm().max(1.0));
                }
                let n_k: f64 = (0..grid.n_points)
                    .map(|i| gf.bands[band].lesser[[k, k, i]].im)
                    .sum::<f64>()
                    * grid.d_omega
                    / (2.0 * std::f64::consts::PI);
                // Window truncation leaves (Gamma/4pi)(1/(W - w_k) + 1/(W + w_k))
                // ~ 2e-4 of the Lorentzian weight outside the grid.
                assert_abs_diff_eq!(n_k, 0.5, epsilon = 5e-4);
            }
        }
    }

    #[test]
    fn keldysh_components_keep_their_symmetries() {
        let p = SystemParams {
            n_sites: 3,
            t1: 1e-4,
            t2: 1e-2,
            ..params()
        };
        let bloch = BlochBasis::new(3);
        let grid = FrequencyGrid::symmetric(1.0, 16384, 4.0).unwrap();
        let sigma = lead_blocks(&p, &bloch, grid.n_points);
        let gf = dyson_electron(&p, &bloch, &grid, &sigma, 0.0).unwrap();
        for band in 0..2 {
            let b = &gf.bands[band];
            for i in (0..grid.n_points).step_by(211) {
                for k in 0..3 {
                    // Diagonal occupations/spectra nonnegative.
                    assert!(b.lesser[[k, k, i]].im >= -1e-12);
                    assert!(b.greater[[k, k, i]].im <= 1e-12);
                    let a_kk =
                        (C64::new(0.0, 1.0) * (b.greater[[k, k, i]] - b.lesser[[k, k, i]])).re;
                    assert!(a_kk >= -1e-12);
                    assert_abs_diff_eq!(a_kk, -2.0 * b.retarded[[k, k, i]].im, epsilon = 1e-10);
                    for kp in 0..3 {
                        // Anti-Hermitian lesser/greater.
                        let x = b.lesser[[k, kp, i]] + b.lesser[[kp, k, i]].conj();
                        assert!(x.norm() < 1e-12);
                    }
                }
            }
        }
    }
}
