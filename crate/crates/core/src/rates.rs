//! Closed-form and semi-analytic rate results used as oracles by the solvers.
//!
//! Three levels of approximation, all for decoupled or weakly coupled bands:
//!
//! * [`decoupled_band_current`] — exact steady current of a single
//!   source/drain-driven band, `J = (gamma/2) / (1 + (gamma/2t)^2)`. The
//!   result is independent of the chain length.
//! * [`covariance_steady`] — exact single-particle covariance matrix
//!   `M_jk = <c_k^dag c_j>` of the same quadratic model at any `N`, from the
//!   linear stationarity condition `-i[h, M] + G - {G + L, M}/2 = 0` with
//!   injection `G = gamma_in |1><1|` and extraction `L = gamma_out |N><N|`.
//! * `meanfield_*` — the factorized two-site rate equations for both bands
//!   plus a local photon-mediated transfer channel of rate `4 gamma_c`
//!   (`t1 = 0`, `gamma1 = gamma2`, resonant cavity). Populations `n_{alpha j}`
//!   and the upper-band bond coherence `c = Im <c_21^dag c_22>` obey
//!
//!   ```text
//!   d n11 = gamma (1 - n11) + 4 gc n21 (1 - n11)
//!   d n21 = gamma (1 - n21) - 2 t2 c
//!   d n22 = -gamma n22 + 2 t2 c - 4 gc n22 (1 - n12)
//!   d n12 = -gamma n12 + 4 gc n22 (1 - n12)
//!   d c   = -gamma c + t2 (n21 - n22)   [- 2 gc (2 - n11 - n12) c]
//!   ```
//!
//!   with `gc = g^2/kappa` and the bracketed coherence damping optional.
//!   The steady current is `J = 2 t2 c = gamma (n12 + n22)` and obeys
//!   `c (gamma^2 + 2 t2^2 (1 + phi)) = t2 gamma` with the population ratio
//!   `phi = (4 gc n22 + gamma) / (4 gc (n22 + 1) + gamma) <= 1`, so any
//!   `gc > 0` enhances the current when the damping term is dropped.
//!
//! [`delta_j_perturbative`] expands that enhancement to first order in
//! `gc/gamma`.

use ndarray::Array2;

use crate::error::CoreError;
use crate::linalg;
use crate::{C64, Result};

/// Steady current and drain-site population of one lead-driven band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoupledCurrent {
    /// Current in units of e = 1 (divide by gamma for the usual J/(e gamma)).
    pub j: f64,
    /// Population of the drain site, n_N = J/gamma; the source site carries
    /// 1 - n_N.
    pub edge_population: f64,
}

/// Exact steady current of a single band driven by a source at site 1 and a
/// drain at site N, both at rate `gamma`. Independent of N; `t = 0` gives 0.
pub fn decoupled_band_current(t: f64, gamma: f64) -> DecoupledCurrent {
    let edge = 2.0 * t * t / (4.0 * t * t + gamma * gamma);
    DecoupledCurrent { j: gamma * edge, edge_population: edge }
}

/// Steady covariance matrix `M_jk = <c_k^dag c_j>` of an `n`-site band with
/// hopping `t`, injection `gamma_in` at site 1 and extraction `gamma_out` at
/// site n. Solves the n^2 x n^2 linear stationarity system directly.
pub fn covariance_steady(
    n: usize,
    t: f64,
    gamma_in: f64,
    gamma_out: f64,
) -> Result<Array2<C64>> {
    if n == 0 || gamma_in <= 0.0 || gamma_out <= 0.0 {
        return Err(CoreError::InvalidParams(
            "covariance solve needs n >= 1 and positive lead rates".into(),
        ));
    }
    let dim = n * n;
    let mut a = vec![C64::new(0.0, 0.0); dim * dim];
    let mut b = vec![C64::new(0.0, 0.0); dim];
    let hop = |i: usize, j: usize| -> f64 {
        if i.abs_diff(j) == 1 { -t } else { 0.0 }
    };
    // Diagonal rate matrix R = G + L; only sites 0 and n-1 are dressed.
    let rate = |i: usize| -> f64 {
        let mut r = 0.0;
        if i == 0 {
            r += gamma_in;
        }
        if i == n - 1 {
            r += gamma_out;
        }
        r
    };
    for j in 0..n {
        for k in 0..n {
            let row = j * n + k;
            // -i sum_l (h_jl M_lk - M_jl h_lk) - (R_j + R_k)/2 M_jk = -G_jk
            for l in 0..n {
                a[row * dim + (l * n + k)] += C64::new(0.0, -hop(j, l));
                a[row * dim + (j * n + l)] += C64::new(0.0, hop(l, k));
            }
            a[row * dim + row] += C64::new(-0.5 * (rate(j) + rate(k)), 0.0);
            if j == 0 && k == 0 {
                b[row] = C64::new(-gamma_in, 0.0);
            }
        }
    }
    let piv = linalg::lu_factor(&mut a, dim).ok_or_else(|| {
        CoreError::DegenerateNullSpace("singular covariance stationarity system".into())
    })?;
    linalg::lu_solve(&a, &piv, dim, &mut b);
    Ok(Array2::from_shape_fn((n, n), |(j, k)| b[j * n + k]))
}

/// Symmetrized current carried by a covariance matrix from
/// [`covariance_steady`]: (injection into site 1 + extraction from site n)/2.
pub fn covariance_current(m: &Array2<C64>, gamma_in: f64, gamma_out: f64) -> f64 {
    let n = m.nrows();
    let j_source = gamma_in * (1.0 - m[[0, 0]].re);
    let j_drain = gamma_out * m[[n - 1, n - 1]].re;
    0.5 * (j_source + j_drain)
}

/// Factorized two-site rate-equation state. `c` is the upper-band bond
/// coherence Im<c_21^dag c_22> (proportional to the local current); `phi` is
/// the algebraic population ratio n22/(n12 + n22) in (0, 1], carried along
/// for diagnostics and left at zero in derivative vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateState {
    pub n11: f64,
    pub n21: f64,
    pub n22: f64,
    pub n12: f64,
    pub c: f64,
    pub phi: f64,
}

/// Time derivative of the factorized rate equations. With
/// `damp_coherence` the photon-mediated transfer also damps the bond
/// coherence by `2 gamma_c (2 - n11 - n12) c`.
pub fn meanfield_rhs(
    s: &RateState,
    gamma: f64,
    t2: f64,
    gamma_c: f64,
    damp_coherence: bool,
) -> RateState {
    let transfer1 = 4.0 * gamma_c * s.n21 * (1.0 - s.n11);
    let transfer2 = 4.0 * gamma_c * s.n22 * (1.0 - s.n12);
    let mut dc = -gamma * s.c + t2 * (s.n21 - s.n22);
    if damp_coherence {
        dc -= 2.0 * gamma_c * (2.0 - s.n11 - s.n12) * s.c;
    }
    RateState {
        n11: gamma * (1.0 - s.n11) + transfer1,
        n21: gamma * (1.0 - s.n21) - 2.0 * t2 * s.c,
        n22: -gamma * s.n22 + 2.0 * t2 * s.c - transfer2,
        n12: -gamma * s.n12 + transfer2,
        c: dc,
        phi: 0.0,
    }
}

/// Steady state of the factorized rate equations by bisection on the bond
/// coherence. The residual of the coherence equation is monotone on
/// `c in [0, gamma/(2 t2)]` with a sign change, all populations following
/// algebraically from c (n11 = 1 exactly; n22 from its quadratic branch).
pub fn meanfield_steady(
    gamma: f64,
    t2: f64,
    gamma_c: f64,
    damp_coherence: bool,
) -> Result<RateState> {
    if gamma <= 0.0 || t2 < 0.0 || gamma_c < 0.0 {
        return Err(CoreError::InvalidParams(
            "rate equations need gamma > 0, t2 >= 0, gamma_c >= 0".into(),
        ));
    }
    let phi_of = |n22: f64| (4.0 * gamma_c * n22 + gamma) / (4.0 * gamma_c * (n22 + 1.0) + gamma);
    if t2 == 0.0 {
        return Ok(RateState { n11: 1.0, n21: 1.0, n22: 0.0, n12: 0.0, c: 0.0, phi: phi_of(0.0) });
    }
    // Populations at a trial coherence; s = n12 + n22 is the transferred
    // fraction, n22 the positive root of its own stationarity quadratic.
    let split = |c: f64| -> (f64, f64) {
        let s = 2.0 * t2 * c / gamma;
        let n22 = if gamma_c == 0.0 {
            s
        } else {
            let b = gamma + 4.0 * gamma_c * (1.0 - s);
            (-b + (b * b + 16.0 * gamma_c * s * gamma).sqrt()) / (8.0 * gamma_c)
        };
        (s, n22)
    };
    let residual = |c: f64| -> f64 {
        let (s, n22) = split(c);
        let n12 = s - n22;
        let mut r = gamma * c - t2 * (1.0 - s - n22);
        if damp_coherence {
            r += 2.0 * gamma_c * (1.0 - n12) * c;
        }
        r
    };
    let (mut lo, mut hi) = (0.0_f64, gamma / (2.0 * t2));
    // r(0) = -t2 < 0 and r at s = 1 is positive; bisect to machine precision.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    if residual(c).abs() > 1e-9 * t2 {
        return Err(CoreError::NotConverged {
            iterations: 200,
            residual: residual(c).abs(),
            tol: 1e-9 * t2,
        });
    }
    let (s, n22) = split(c);
    let state =
        RateState { n11: 1.0, n21: 1.0 - s, n22, n12: s - n22, c, phi: phi_of(n22) };
    if !damp_coherence && gamma_c > 0.0 {
        // phi < 1 guarantees enhancement over the decoupled upper band.
        let j0 = decoupled_band_current(t2, gamma).j;
        if 2.0 * t2 * c < j0 * (1.0 - 1e-12) {
            return Err(CoreError::ConsistencyViolation(format!(
                "undamped transfer must not reduce the current: J = {:.6e} < J0 = {:.6e}",
                2.0 * t2 * c,
                j0
            )));
        }
    }
    Ok(state)
}

/// Steady current and population ratio phi of the factorized rate equations.
pub fn meanfield_current(
    gamma: f64,
    t2: f64,
    gamma_c: f64,
    damp_coherence: bool,
) -> Result<(f64, f64)> {
    let s = meanfield_steady(gamma, t2, gamma_c, damp_coherence)?;
    Ok((2.0 * t2 * s.c, s.phi))
}

/// First-order relative current enhancement from the factorized rate
/// equations.
#[derive(Debug, Clone)]
pub struct PerturbativeEnhancement {
    /// 2 (t2^2 / (t2^2 + gamma^2/4)) (gamma_c / gamma).
    pub full: f64,
    /// Wide-band limit t2 >> gamma: 2 gamma_c / gamma.
    pub simplified: f64,
    /// Set when gamma_c/gamma is too large for the first-order expansion.
    pub warning: Option<String>,
}

/// Expand the steady current to first order in gamma_c/gamma.
pub fn delta_j_perturbative(t2: f64, gamma: f64, gamma_c: f64) -> PerturbativeEnhancement {
    let cooperativity = gamma_c / gamma;
    let full = 2.0 * (t2 * t2 / (t2 * t2 + 0.25 * gamma * gamma)) * cooperativity;
    let warning = (cooperativity > 0.3).then(|| {
        format!(
            "first-order enhancement unreliable at gamma_c/gamma = {cooperativity:.2} > 0.3"
        )
    });
    PerturbativeEnhancement { full, simplified: 2.0 * cooperativity, warning }
}
