//! Steady states of a block generator: direct null-space solve and RK4
//! relaxation.
//!
//! The null solve replaces the generator row of one diagonal pair with the
//! trace functional and solves L x = e against the constraint Tr x = 1.
//! If the generator still drops rank after that single constraint, the
//! stationary state is not unique and the solve reports it instead of
//! silently picking a vector.
//!
//! RK4 relaxation integrates rho_dot = L rho from a physical initial state,
//! re-symmetrizing after every step; it is the fallback for blocks too
//! large to factor densely. Fourth order in dt; the generator's trace
//! annihilation keeps the trace exact up to roundoff.

use crate::linalg::{lu_factor, lu_solve};
use crate::qme::liouville::BlockGenerator;
use crate::{C64, CoreError, Result};

/// Largest block the dense LU path accepts: 4000^2 complex entries is
/// 256 MB, and the factorization stays in the tens of seconds.
pub const MAX_DENSE_BLOCK: usize = 4000;

#[derive(Debug, Clone)]
pub struct SteadyOutcome {
    pub x: Vec<C64>,
    /// max |L x| at the returned state.
    pub residual: f64,
    /// RK4 steps taken (zero for the direct solve).
    pub iterations: usize,
}

/// Direct trace-constrained solve of L x = 0, Tr x = 1.
pub fn steady_state_null(gen: &BlockGenerator) -> Result<SteadyOutcome> {
    let m = gen.sector.len();
    if m > MAX_DENSE_BLOCK {
        return Err(CoreError::Unsupported(format!(
            "dense null-space solve on a block of {m} pairs (cap {MAX_DENSE_BLOCK}); \
             use the RK4 relaxation path"
        )));
    }
    if gen.sector.diagonal.is_empty() {
        return Err(CoreError::ConsistencyViolation(
            "steady-state solve needs the diagonal (trace-carrying) block".into(),
        ));
    }
    let zero = C64::new(0.0, 0.0);
    let mut dense = vec![zero; m * m];
    for (c, col) in gen.op.cols.iter().enumerate() {
        for &(r, v) in col {
            dense[r * m + c] += v;
        }
    }
    // Trade one redundant stationarity row for the normalization.
    let r0 = gen.sector.diagonal[0];
    dense[r0 * m..(r0 + 1) * m].fill(zero);
    for &d in &gen.sector.diagonal {
        dense[r0 * m + d] = C64::new(1.0, 0.0);
    }
    let piv = lu_factor(&mut dense, m).ok_or_else(|| {
        CoreError::DegenerateNullSpace(
            "generator is singular even with the trace constraint imposed; \
             more than one stationary state"
                .into(),
        )
    })?;
    let mut x = vec![zero; m];
    x[r0] = C64::new(1.0, 0.0);
    lu_solve(&dense, &piv, m, &mut x);
    gen.sector.hermitize(&mut x);
    let tr = gen.sector.trace(&x);
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-8 {
        return Err(CoreError::DegenerateNullSpace(format!(
            "trace constraint not satisfied after solve (Tr = {tr}); \
             stationary state ill-determined"
        )));
    }
    let residual = gen.residual(&x);
    let tol = 1e-8 * gen.scale.max(1e-12);
    if residual > tol {
        return Err(CoreError::DegenerateNullSpace(format!(
            "stationarity residual {residual:.3e} exceeds {tol:.3e}; \
             null space is numerically degenerate"
        )));
    }
    Ok(SteadyOutcome { x, residual, iterations: 0 })
}

/// One classical RK4 step x <- x + dt/6 (k1 + 2 k2 + 2 k3 + k4) using the
/// caller's scratch buffers.
pub fn rk4_step(gen: &BlockGenerator, x: &mut [C64], dt: f64, scratch: &mut Rk4Scratch) {
    let m = x.len();
    let Rk4Scratch { k1, k2, k3, k4, tmp } = scratch;
    gen.apply_into(x, k1);
    for i in 0..m {
        tmp[i] = x[i] + 0.5 * dt * k1[i];
    }
    gen.apply_into(tmp, k2);
    for i in 0..m {
        tmp[i] = x[i] + 0.5 * dt * k2[i];
    }
    gen.apply_into(tmp, k3);
    for i in 0..m {
        tmp[i] = x[i] + dt * k3[i];
    }
    gen.apply_into(tmp, k4);
    let w = dt / 6.0;
    for i in 0..m {
        x[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

#[derive(Debug, Clone)]
pub struct Rk4Scratch {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4Scratch {
    pub fn new(m: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); m];
        Self { k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), tmp: z }
    }
}

/// Relaxes x0 under the generator until max |L x| < steady_tol or t_max.
///
/// The state is re-hermitized every step (a no-op outside delta = 0
/// blocks) and the trace is watched when the initial state carries one.
pub fn evolve_to_steady(
    gen: &BlockGenerator,
    x0: Vec<C64>,
    dt: f64,
    t_max: f64,
    steady_tol: f64,
) -> Result<SteadyOutcome> {
    if dt <= 0.0 || !dt.is_finite() {
        return Err(CoreError::InvalidParams(format!("bad RK4 step dt = {dt}")));
    }
    let m = gen.sector.len();
    let mut x = x0;
    let mut scratch = Rk4Scratch::new(m);
    let track_trace = (gen.sector.trace(&x) - C64::new(1.0, 0.0)).norm() < 1e-9;
    let steps = (t_max / dt).ceil() as usize;
    let check_every = 25usize;
    let mut residual = f64::INFINITY;
    for step in 1..=steps {
        rk4_step(gen, &mut x, dt, &mut scratch);
        gen.sector.hermitize(&mut x);
        if track_trace {
            let drift = (gen.sector.trace(&x) - C64::new(1.0, 0.0)).norm();
            if drift > 1e-6 {
                return Err(CoreError::StepTooLarge(format!(
                    "trace drifted by {drift:.3e} after {step} steps of dt = {dt}; \
                     reduce the step"
                )));
            }
        }
        if step % check_every == 0 || step == steps {
            residual = gen.residual(&x);
            if !residual.is_finite() {
                return Err(CoreError::StepTooLarge(format!(
                    "evolution diverged after {step} steps of dt = {dt}"
                )));
            }
            if residual < steady_tol {
                return Ok(SteadyOutcome { x, residual, iterations: step });
            }
        }
    }
    Err(CoreError::NotConverged { iterations: steps, residual, tol: steady_tol })
}
