//! Electron self-energies: wide-band leads and the second-order Born
//! light-matter terms.
//!
//! Leads are frequency independent. The source keeps site 1 of each band
//! supplied with electrons and the drain keeps site N drained, so in the
//! Bloch basis (projectors s1, sN onto the end sites)
//!
//!   Sigma^<_L = +i Gamma s1,   Sigma^>_L = -i Gamma sN,
//!   Sigma^r_L = -i (Gamma/2) (s1 + sN).
//!
//! The light-matter terms exchange a photon with the other band,
//!
//!   Sigma^<_a(w) = i g^2 Int dw'/2pi G^<_b(w + w') D^>(w'),   b != a,
//!
//! (greater: swap < and >), evaluated with the FFT correlator. Retarded
//! parts follow from the broadening function chi = i(Sigma^> - Sigma^<)
//! through the Kramers-Kronig relation Sigma^r = (H[chi] - i chi)/2.

use ndarray::{Array2, Array3};
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::bloch::BlochBasis;
use crate::conv::Correlator;
use crate::grid::FrequencyGrid;
use crate::hilbert::{cosine_taper, hilbert_with_plans};
use crate::ngf::{BandBlock, ElectronGf, PhotonGf};
use crate::{C64, SystemParams};

/// Constant lead self-energy matrices, one set per band.
pub struct LeadSigma {
    pub lesser: Vec<Array2<C64>>,
    pub greater: Vec<Array2<C64>>,
    pub retarded: Vec<Array2<C64>>,
}

impl LeadSigma {
    pub fn new(params: &SystemParams, bloch: &BlochBasis) -> Self {
        let mut lesser = Vec::new();
        let mut greater = Vec::new();
        let mut retarded = Vec::new();
        for band in 0..2 {
            let gamma = params.gamma(band);
            let i = C64::new(0.0, 1.0);
            lesser.push(bloch.sigma1.mapv(|s| i * gamma * s));
            greater.push(bloch.sigma_n.mapv(|s| -i * gamma * s));
            retarded.push(
                (&bloch.sigma1 + &bloch.sigma_n).mapv(|s| -i * 0.5 * gamma * s),
            );
        }
        LeadSigma {
            lesser,
            greater,
            retarded,
        }
    }
}

/// FFT workspace shared by all Born-approximation correlation integrals of
/// one solve: the correlator (length 2L plans) and Hilbert-transform plans.
pub struct BornEngine {
    pub corr: Correlator,
    taper: Vec<f64>,
    hil_m: usize,
    hil_fwd: Arc<dyn Fft<f64>>,
    hil_inv: Arc<dyn Fft<f64>>,
    g2: f64,
}

impl BornEngine {
    pub fn new(params: &SystemParams, grid: &FrequencyGrid, taper_fraction: f64) -> Self {
        let l = grid.n_points;
        let hil_m = 2 * l;
        let mut planner = FftPlanner::new();
        BornEngine {
            corr: Correlator::new(l, grid.d_omega),
            taper: cosine_taper(l, taper_fraction),
            hil_m,
            hil_fwd: planner.plan_fft_forward(hil_m),
            hil_inv: planner.plan_fft_inverse(hil_m),
            g2: params.g * params.g,
        }
    }

    /// Interband bubble Pi^<>_I(w) = -i g^2 Sum_kk' Int dw'/2pi
    /// [G^<>_1(w+w')_kk' G^><_2(w')_k'k + (1 <-> 2)]. Uses anti-Hermiticity
    /// of G^<> to run over k <= k' only. Both outputs are purely imaginary.
    pub fn polarization(&self, el: &ElectronGf) -> (Vec<C64>, Vec<C64>) {
        let n = el.bands[0].lesser.shape()[0];
        let m = self.corr.padded_len();
        let mut acc_less = vec![C64::new(0.0, 0.0); m];
        let mut acc_great = vec![C64::new(0.0, 0.0); m];
        let mut scratch = vec![C64::new(0.0, 0.0); m];
        for k in 0..n {
            for kp in k..n {
                let a_l = self.spec_of(&el.bands[0].lesser, k, kp);
                let a_g = self.spec_of(&el.bands[0].greater, k, kp);
                let b_l = self.spec_of(&el.bands[1].lesser, k, kp);
                let b_g = self.spec_of(&el.bands[1].greater, k, kp);
                // Pairings (F, K): lesser needs (G^<_1, G^>_2) and (G^<_2, G^>_1);
                // greater swaps lesser and greater everywhere. K sits at the
                // reversed-time argument, so its spectrum enters conjugated:
                // product[p] = F_hat[p] * conj(K_hat[p]). The (k', k) mirror
                // element contributes the conj-reversed product.
                let mirror = kp != k;
                for (into_less, f_hat, k_hat) in [
                    (true, &a_l, &b_g),
                    (true, &b_l, &a_g),
                    (false, &a_g, &b_l),
                    (false, &b_g, &a_l),
                ] {
                    let acc: &mut [C64] = if into_less {
                        &mut acc_less
                    } else {
                        &mut acc_great
                    };
                    for p in 0..m {
                        scratch[p] = f_hat[p] * k_hat[p].conj();
                    }
                    acc[0] -= scratch[0];
                    if mirror {
                        acc[0] -= scratch[0].conj();
                    }
                    for p in 1..m {
                        acc[p] -= scratch[p];
                        if mirror {
                            acc[p] -= scratch[m - p].conj();
                        }
                    }
                }
            }
        }
        // The accumulator signs above belong to the anti-Hermitian mirror
        // identities; the closed-fermion-loop prefactor -i g^2 applies on top.
        let mig2 = C64::new(0.0, -self.g2);
        let mut less = self.corr.finish(acc_less);
        let mut great = self.corr.finish(acc_great);
        less.iter_mut().for_each(|v| *v *= mig2);
        great.iter_mut().for_each(|v| *v *= mig2);
        (less, great)
    }

    fn spec_of(&self, arr: &Array3<C64>, k: usize, kp: usize) -> Vec<C64> {
        let lane = arr.slice(ndarray::s![k, kp, ..]);
        let series: Vec<C64> = lane.iter().copied().collect();
        self.corr.spectrum(&series)
    }

    /// Light-matter self-energies for both bands, including the retarded
    /// part from Kramers-Kronig. Lead contributions are not included.
    pub fn electron_sigma(&self, el: &ElectronGf, ph: &PhotonGf) -> Vec<BandBlock> {
        let n = el.bands[0].lesser.shape()[0];
        let l = self.corr.len();
        let d_less_rev = self.corr.reversed(&self.corr.spectrum(&ph.lesser));
        let d_great_rev = self.corr.reversed(&self.corr.spectrum(&ph.greater));
        let ig2 = C64::new(0.0, self.g2);
        let mut out = Vec::new();
        for band in 0..2 {
            let other = &el.bands[1 - band];
            let mut block = BandBlock::zeros(n, l);
            for k in 0..n {
                for kp in k..n {
                    let f_less = self.spec_of(&other.lesser, k, kp);
                    let f_great = self.spec_of(&other.greater, k, kp);
                    let mut acc = self.corr.zero_accumulator();
                    self.corr.accumulate(&mut acc, &f_less, &d_great_rev);
                    let sig_less: Vec<C64> =
                        self.corr.finish(acc).iter().map(|v| v * ig2).collect();
                    let mut acc = self.corr.zero_accumulator();
                    self.corr.accumulate(&mut acc, &f_great, &d_less_rev);
                    let sig_great: Vec<C64> =
                        self.corr.finish(acc).iter().map(|v| v * ig2).collect();
                    let (h, chi) = self.dispersive_pair(&sig_less, &sig_great);
                    let half = C64::new(0.5, 0.0);
                    let i_c = C64::new(0.0, 1.0);
                    for i in 0..l {
                        block.lesser[[k, kp, i]] = sig_less[i];
                        block.greater[[k, kp, i]] = sig_great[i];
                        block.retarded[[k, kp, i]] = half * (h[i] - i_c * chi[i]);
                        if kp != k {
                            // Sigma^<> are anti-Hermitian; chi and its
                            // Hilbert transform are Hermitian, so the mirror
                            // conjugates h and chi separately.
                            block.lesser[[kp, k, i]] = -sig_less[i].conj();
                            block.greater[[kp, k, i]] = -sig_great[i].conj();
                            block.retarded[[kp, k, i]] =
                                half * (h[i].conj() - i_c * chi[i].conj());
                        }
                    }
                }
            }
            out.push(block);
        }
        out
    }

    /// Hilbert transform and raw broadening function for one matrix element:
    /// chi = i(Sigma^> - Sigma^<), h = H[taper . chi]. The retarded part is
    /// (h - i chi)/2; the taper only guards the FFT window edges.
    pub(crate) fn dispersive_pair(&self, lesser: &[C64], greater: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let l = lesser.len();
        let i = C64::new(0.0, 1.0);
        let chi: Vec<C64> = (0..l).map(|j| i * (greater[j] - lesser[j])).collect();
        let mut chi_tapered = chi.clone();
        for (v, t) in chi_tapered.iter_mut().zip(&self.taper) {
            *v *= *t;
        }
        let h = hilbert_with_plans(&chi_tapered, self.hil_m, &self.hil_fwd, &self.hil_inv);
        (h, chi)
    }

    /// Sigma^r(w) = (H[chi] - i chi)/2 from lesser/greater components.
    pub fn retarded_from_components(&self, lesser: &[C64], greater: &[C64]) -> Vec<C64> {
        let (h, chi) = self.dispersive_pair(lesser, greater);
        let i = C64::new(0.0, 1.0);
        (0..lesser.len()).map(|j| 0.5 * (h[j] - i * chi[j])).collect()
    }
}
