//! Frequency-domain correlation integrals of the form
//!
//!   C(w) = Int dw'/(2pi) F(w + w') K(w'),
//!
//! discretized on the shared grid w_i = (i - L/2) dw as
//!
//!   C[m] = (dw/2pi) Sum_n F[m + n - c] K[n],   c = L/2,
//!
//! with F taken as zero outside the window. The shifted sum is a
//! cross-correlation, evaluated with zero-padded FFTs (length 2L, so no
//! circular aliasing): Sum_j F[j] K[j - d] = IFFT(F_hat . rev(K_hat))[d],
//! where rev(X)[p] = X[(M - p) mod M]. These integrals dominate the solver
//! runtime, so spectra can be formed once and combined pairwise before a
//! single inverse transform.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::C64;

pub struct Correlator {
    l: usize,
    m: usize,
    prefactor: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Correlator {
    pub fn new(l: usize, d_omega: f64) -> Self {
        assert!(l >= 4 && l.is_power_of_two(), "grid length must be 2^k");
        let m = 2 * l;
        let mut planner = FftPlanner::new();
        Correlator {
            l,
            m,
            prefactor: d_omega / (2.0 * std::f64::consts::PI),
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
        }
    }

    pub fn len(&self) -> usize {
        self.l
    }

    pub fn padded_len(&self) -> usize {
        self.m
    }

    /// Zero-padded forward FFT of a length-L array.
    pub fn spectrum(&self, x: &[C64]) -> Vec<C64> {
        debug_assert_eq!(x.len(), self.l);
        let mut buf = vec![C64::new(0.0, 0.0); self.m];
        buf[..self.l].copy_from_slice(x);
        self.fwd.process(&mut buf);
        buf
    }

    /// Index-reversed spectrum: rev(X)[p] = X[(M - p) mod M]. Multiplying by
    /// this instead of X turns the FFT convolution into a correlation.
    pub fn reversed(&self, spec: &[C64]) -> Vec<C64> {
        debug_assert_eq!(spec.len(), self.m);
        let mut out = vec![C64::new(0.0, 0.0); self.m];
        out[0] = spec[0];
        for p in 1..self.m {
            out[p] = spec[self.m - p];
        }
        out
    }

    /// acc += f_spec . k_spec_rev (elementwise).
    pub fn accumulate(&self, acc: &mut [C64], f_spec: &[C64], k_spec_rev: &[C64]) {
        debug_assert_eq!(acc.len(), self.m);
        for ((a, f), k) in acc.iter_mut().zip(f_spec).zip(k_spec_rev) {
            *a += f * k;
        }
    }

    /// Inverse transform of an accumulated product; returns the length-L
    /// correlation including the dw/2pi prefactor.
    pub fn finish(&self, mut acc: Vec<C64>) -> Vec<C64> {
        debug_assert_eq!(acc.len(), self.m);
        self.inv.process(&mut acc);
        let c = self.l / 2;
        let scale = self.prefactor / self.m as f64;
        (0..self.l)
            .map(|m_idx| {
                let d = (self.m + m_idx - c) % self.m;
                acc[d] * scale
            })
            .collect()
    }

    /// One-shot C[m] = (dw/2pi) Sum_n F[m + n - c] K[n].
    pub fn correlate(&self, f: &[C64], k: &[C64]) -> Vec<C64> {
        let f_spec = self.spectrum(f);
        let k_rev = self.reversed(&self.spectrum(k));
        let mut acc = vec![C64::new(0.0, 0.0); self.m];
        self.accumulate(&mut acc, &f_spec, &k_rev);
        self.finish(acc)
    }

    pub fn zero_accumulator(&self) -> Vec<C64> {
        vec![C64::new(0.0, 0.0); self.m]
    }
}

/// Direct O(L^2) evaluation of the same sum; the oracle for the FFT path and
/// occasionally useful on short diagnostic grids.
pub fn correlate_naive(f: &[C64], k: &[C64], d_omega: f64) -> Vec<C64> {
    let l = f.len();
    debug_assert_eq!(k.len(), l);
    let c = l / 2;
    let pref = d_omega / (2.0 * std::f64::consts::PI);
    (0..l)
        .map(|m| {
            let mut acc = C64::new(0.0, 0.0);
            for n in 0..l {
                let j = m + n;
                if j >= c && j - c < l {
                    acc += f[j - c] * k[n];
                }
            }
            acc * pref
        })
        .collect()
}
