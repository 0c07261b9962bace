//! Discrete Hilbert transform via FFT, used to reconstruct the real
//! (dispersive) part of retarded self-energies from their broadening
//! functions through the Kramers-Kronig relation
//!
//!   H[chi](w) = (1/pi) p.v. Int dw' chi(w') / (w - w').
//!
//! In Fourier space the principal-value kernel is diagonal,
//! FT[1/(pi u)](f) = -i sgn(f), so the transform is a forward FFT, a sign
//! multiplier, and an inverse FFT. The DC and Nyquist bins are zeroed, which
//! makes H of a constant vanish identically in the unpadded (circular)
//! variant and gives H[H[chi]] = -chi up to the removed mean. Zero padding
//! (pad_factor >= 2) suppresses wrap-around of the slowly decaying 1/w tail
//! and is the right choice for spectra that have been tapered to zero at the
//! grid edges.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::C64;

/// Hilbert transform of complex samples on a uniform grid. `pad_factor = 1`
/// is circular (exact for constants); production spectra use 2.
pub fn hilbert(x: &[C64], pad_factor: usize) -> Vec<C64> {
    let l = x.len();
    assert!(l >= 4, "grid too short for a Hilbert transform");
    assert!(pad_factor >= 1);
    let m = (l * pad_factor).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    hilbert_with_plans(x, m, &fwd, &inv)
}

/// Same transform with caller-supplied FFT plans of length `m >= x.len()`.
pub fn hilbert_with_plans(
    x: &[C64],
    m: usize,
    fwd: &Arc<dyn Fft<f64>>,
    inv: &Arc<dyn Fft<f64>>,
) -> Vec<C64> {
    let l = x.len();
    debug_assert!(m >= l && m.is_power_of_two());
    let mut buf = vec![C64::new(0.0, 0.0); m];
    buf[..l].copy_from_slice(x);
    fwd.process(&mut buf);
    buf[0] = C64::new(0.0, 0.0);
    buf[m / 2] = C64::new(0.0, 0.0);
    let neg_i = C64::new(0.0, -1.0);
    let pos_i = C64::new(0.0, 1.0);
    for v in buf[1..m / 2].iter_mut() {
        *v *= neg_i;
    }
    for v in buf[m / 2 + 1..].iter_mut() {
        *v *= pos_i;
    }
    inv.process(&mut buf);
    let scale = 1.0 / m as f64;
    buf.truncate(l);
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Tukey-style taper: unity in the interior, half-cosine roll-off over the
/// outer `fraction` of samples on each side. Applied to broadening functions
/// before the padded Hilbert transform so the window edge is smooth.
pub fn cosine_taper(len: usize, fraction: f64) -> Vec<f64> {
    assert!((0.0..=0.5).contains(&fraction));
    let mut w = vec![1.0; len];
    let ramp = ((len as f64) * fraction).floor() as usize;
    if ramp == 0 {
        return w;
    }
    for i in 0..ramp {
        let s = 0.5 * (1.0 - (std::f64::consts::PI * (i as f64 + 1.0) / (ramp as f64 + 1.0)).cos());
        w[i] = s;
        w[len - 1 - i] = s;
    }
    w
}
