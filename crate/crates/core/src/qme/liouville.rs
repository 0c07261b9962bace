//! Vectorized Lindblad generator restricted to conserved-label blocks.
//!
//! rho_dot = -i[H, rho] + sum_m w_m D[A_m] rho,
//! D[A] rho = -{A+A, rho} + 2 A rho A+.
//!
//! Vectorized over outer products |i><j|, every term connects pairs whose
//! conserved labels (electron number q, excitation number e = N_2 + a+a)
//! differ by a fixed offset: H conserves both labels and each jump shifts
//! the row and column labels identically. The generator is therefore block
//! diagonal over the pair offset (q_i - q_j, e_i - e_j). The steady state
//! lives in the (0, 0) block; photon emission and absorption correlators
//! regress in (0, -1) and (0, +1). With counter-rotating light-matter
//! terms only the charge offset survives and blocks carry delta_q alone.
//!
//! Working per block shrinks the steady-state solve from dim^2 unknowns to
//! the block size (e.g. 3096 instead of 65536 for three sites with up to
//! three photons), which is what makes a dense null-space solve practical.

use std::collections::HashMap;

use ndarray::Array2;

use crate::fock::{ManyBodyBasis, SparseOp};
use crate::{C64, CoreError, Result};

/// Hamiltonian plus weighted jump operators: the master equation data.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    pub h: SparseOp,
    /// (A, w) entries contribute w * D[A] to the generator.
    pub jumps: Vec<(SparseOp, f64)>,
}

/// One conserved-label block of density-matrix index pairs.
#[derive(Debug, Clone)]
pub struct PairSector {
    pub delta_q: i64,
    /// None blocks on charge alone (needed once counter-rotating terms
    /// break excitation conservation).
    pub delta_e: Option<i64>,
    pub pairs: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
    /// Positions of diagonal pairs (i, i); empty unless delta = 0.
    pub diagonal: Vec<usize>,
    /// Position of the mirrored pair (j, i); filled only for delta = 0
    /// blocks, where the block is closed under conjugate transposition.
    pub transpose: Vec<usize>,
}

impl PairSector {
    pub fn build(basis: &ManyBodyBasis, delta_q: i64, delta_e: Option<i64>) -> Self {
        let dim = basis.dim();
        let labels: Vec<(u32, u32)> = (0..dim).map(|i| basis.labels(i)).collect();
        let mut pairs = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                if labels[i].0 as i64 - labels[j].0 as i64 != delta_q {
                    continue;
                }
                if let Some(de) = delta_e {
                    if labels[i].1 as i64 - labels[j].1 as i64 != de {
                        continue;
                    }
                }
                pairs.push((i, j));
            }
        }
        let index: HashMap<(usize, usize), usize> =
            pairs.iter().enumerate().map(|(p, &ij)| (ij, p)).collect();
        let diagonal: Vec<usize> =
            pairs.iter().enumerate().filter(|(_, &(i, j))| i == j).map(|(p, _)| p).collect();
        let self_adjoint = delta_q == 0 && delta_e.unwrap_or(0) == 0;
        let transpose = if self_adjoint {
            pairs.iter().map(|&(i, j)| index[&(j, i)]).collect()
        } else {
            Vec::new()
        };
        Self { delta_q, delta_e, pairs, index, diagonal, transpose }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        self.index.get(&(i, j)).copied()
    }

    /// Tr rho for block coefficients x.
    pub fn trace(&self, x: &[C64]) -> C64 {
        self.diagonal.iter().map(|&p| x[p]).sum()
    }

    /// rho <- (rho + rho+)/2 in place; no-op outside delta = 0 blocks.
    pub fn hermitize(&self, x: &mut [C64]) {
        if self.transpose.is_empty() {
            return;
        }
        for p in 0..x.len() {
            let q = self.transpose[p];
            if q < p {
                continue;
            }
            let avg = 0.5 * (x[p] + x[q].conj());
            x[p] = avg;
            x[q] = avg.conj();
        }
    }

    /// Tr(O rho) = sum_{ij} O_ij rho_ji.
    pub fn expectation(&self, x: &[C64], obs: &SparseOp) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (j, col) in obs.cols.iter().enumerate() {
            for &(i, v) in col {
                if let Some(p) = self.position(j, i) {
                    acc += v * x[p];
                }
            }
        }
        acc
    }

    /// Pure-state block coefficients for rho = |s><s|.
    pub fn pure_state(&self, state: usize) -> Result<Vec<C64>> {
        let p = self.position(state, state).ok_or_else(|| {
            CoreError::ConsistencyViolation(
                "initial pure state does not live in this block".into(),
            )
        })?;
        let mut x = vec![C64::new(0.0, 0.0); self.len()];
        x[p] = C64::new(1.0, 0.0);
        Ok(x)
    }

    /// Expands block coefficients into the dense density matrix.
    pub fn densify(&self, x: &[C64], dim: usize) -> Array2<C64> {
        let mut rho = Array2::from_elem((dim, dim), C64::new(0.0, 0.0));
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            rho[[i, j]] = x[p];
        }
        rho
    }

    /// y = A rho as coefficients of the target block.
    pub fn map_left(&self, a: &SparseOp, x: &[C64], target: &PairSector) -> Result<Vec<C64>> {
        let mut y = vec![C64::new(0.0, 0.0); target.len()];
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            if x[p] == C64::new(0.0, 0.0) {
                continue;
            }
            for &(i2, v) in &a.cols[i] {
                let q = target.position(i2, j).ok_or_else(out_of_block)?;
                y[q] += v * x[p];
            }
        }
        Ok(y)
    }

    /// y = rho A as coefficients of the target block.
    pub fn map_right(&self, a: &SparseOp, x: &[C64], target: &PairSector) -> Result<Vec<C64>> {
        // Row j of A read through the columns of A+.
        let adag = a.dagger();
        let mut y = vec![C64::new(0.0, 0.0); target.len()];
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            if x[p] == C64::new(0.0, 0.0) {
                continue;
            }
            for &(j2, w) in &adag.cols[j] {
                let q = target.position(i, j2).ok_or_else(out_of_block)?;
                y[q] += w.conj() * x[p];
            }
        }
        Ok(y)
    }
}

fn out_of_block() -> CoreError {
    CoreError::ConsistencyViolation(
        "operator maps outside the target label block; blocking labels do not \
         match the model's conserved quantities"
            .into(),
    )
}

/// The generator restricted to one pair block, stored as a sparse matrix on
/// block coefficients.
#[derive(Debug, Clone)]
pub struct BlockGenerator {
    pub sector: PairSector,
    pub op: SparseOp,
    /// Largest |matrix element|; residuals and tolerances scale with it.
    pub scale: f64,
}

impl BlockGenerator {
    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        self.op.apply_into(x, y);
    }

    pub fn residual(&self, x: &[C64]) -> f64 {
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        self.apply_into(x, &mut y);
        y.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Assembles the generator on one block. Errors with ConsistencyViolation
/// if any model term leaves the block, which signals a mismatch between the
/// blocking labels and the model's actual symmetries.
pub fn build_generator(
    model: &LindbladModel,
    basis: &ManyBodyBasis,
    sector: PairSector,
) -> Result<BlockGenerator> {
    debug_assert!(model.h.is_hermitian(1e-12));
    let m = sector.len();
    if m == 0 {
        return Err(CoreError::ConsistencyViolation("empty pair block".into()));
    }
    let pos = |i: usize, j: usize| sector.position(i, j).ok_or_else(out_of_block);
    let mi = C64::new(0.0, -1.0);
    let pi = C64::new(0.0, 1.0);
    // A+A for each jump, computed once.
    let products: Vec<SparseOp> = model
        .jumps
        .iter()
        .map(|(a, _)| {
            let mut mop = a.dagger().then(a);
            mop.compact();
            mop
        })
        .collect();
    let _ = basis;
    let mut op = SparseOp::zeros(m);
    for (p, &(i, j)) in sector.pairs.iter().enumerate() {
        let mut col: Vec<(usize, C64)> = Vec::new();
        // -i H rho: column i of H feeds rows (i', j).
        for &(i2, h) in &model.h.cols[i] {
            col.push((pos(i2, j)?, mi * h));
        }
        // +i rho H: row j of H is the conjugate of its column (hermitian).
        for &(j2, h) in &model.h.cols[j] {
            col.push((pos(i, j2)?, pi * h.conj()));
        }
        for ((a, w), mop) in model.jumps.iter().zip(&products) {
            let w = C64::new(*w, 0.0);
            for &(i2, v) in &mop.cols[i] {
                col.push((pos(i2, j)?, -w * v));
            }
            for &(j2, v) in &mop.cols[j] {
                col.push((pos(i, j2)?, -w * v.conj()));
            }
            // 2 A rho A+ couples the full outer product of columns.
            for &(i2, av) in &a.cols[i] {
                for &(j2, bv) in &a.cols[j] {
                    col.push((pos(i2, j2)?, 2.0 * w * av * bv.conj()));
                }
            }
        }
        op.cols[p] = col;
    }
    op.compact();
    let scale = op
        .cols
        .iter()
        .flat_map(|c| c.iter())
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max);
    Ok(BlockGenerator { sector, op, scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;
    use crate::qme::hamiltonian::{build_hamiltonian, Coupling};
    use approx::assert_abs_diff_eq;

    fn test_params() -> SystemParams {
        SystemParams {
            n_sites: 2,
            t1: 0.01,
            t2: 0.02,
            gamma1: 0.05,
            gamma2: 0.05,
            omega1: -0.5,
            omega2: 0.5,
            omega_c: 1.0,
            kappa: 0.1,
            g: 0.08,
        }
    }

    fn lead_jumps(basis: &ManyBodyBasis, p: &SystemParams) -> Vec<(SparseOp, f64)> {
        let n = basis.n_sites;
        let mut jumps = Vec::new();
        for band in 0..2 {
            jumps.push((basis.create(band, 0), 0.5 * p.gamma(band)));
            jumps.push((basis.annihilate(band, n - 1), 0.5 * p.gamma(band)));
        }
        jumps.push((basis.photon_annihilate(), 0.5 * p.kappa));
        jumps
    }

    fn xorshift(state: &mut u64) -> f64 {
        *state ^= *state << 13;
        *state ^= *state >> 7;
        *state ^= *state << 17;
        (*state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }

    #[test]
    fn generator_annihilates_the_trace_on_random_states() {
        let p = test_params();
        let basis = ManyBodyBasis::new(2, 1, false).unwrap();
        let h = build_hamiltonian(&p, &basis, Coupling::Rwa).unwrap();
        let model = LindbladModel { h, jumps: lead_jumps(&basis, &p) };
        let sector = PairSector::build(&basis, 0, Some(0));
        let gen = build_generator(&model, &basis, sector).unwrap();
        let m = gen.sector.len();
        let mut state = 0x9E3779B97F4A7C15_u64;
        for _ in 0..10 {
            let mut x: Vec<C64> =
                (0..m).map(|_| C64::new(xorshift(&mut state), xorshift(&mut state))).collect();
            gen.sector.hermitize(&mut x);
            // Shift the diagonal so the trace is exactly one.
            let tr = gen.sector.trace(&x);
            let shift = (C64::new(1.0, 0.0) - tr) / gen.sector.diagonal.len() as f64;
            for &d in &gen.sector.diagonal {
                x[d] += shift;
            }
            let mut y = vec![C64::new(0.0, 0.0); m];
            gen.apply_into(&x, &mut y);
            assert_abs_diff_eq!(gen.sector.trace(&y).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn photon_occupation_decays_at_rate_kappa() {
        // Pure photon damping: d<n>/dt = Tr(n L rho) = -kappa <n>.
        let basis = ManyBodyBasis::new(1, 2, false).unwrap();
        let kappa = 0.3;
        let model = LindbladModel {
            h: basis.photon_number(),
            jumps: vec![(basis.photon_annihilate(), 0.5 * kappa)],
        };
        let sector = PairSector::build(&basis, 0, Some(2));
        // delta_e = 2 holds no diagonal pairs; the physical block is 0.
        assert!(sector.diagonal.is_empty());
        let sector = PairSector::build(&basis, 0, Some(0));
        let gen = build_generator(&model, &basis, sector).unwrap();
        let x = gen.sector.pure_state(basis.index(0, 2)).unwrap();
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        gen.apply_into(&x, &mut y);
        let ndot = gen.sector.expectation(&y, &basis.photon_number());
        assert_abs_diff_eq!(ndot.re, -kappa * 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(ndot.im, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn blocking_labels_must_match_model_symmetry() {
        let p = test_params();
        let basis = ManyBodyBasis::new(2, 1, false).unwrap();
        let h_cr = build_hamiltonian(&p, &basis, Coupling::CounterRotating).unwrap();
        let model = LindbladModel { h: h_cr, jumps: lead_jumps(&basis, &p) };
        // Excitation-resolved blocking breaks for counter-rotating terms...
        let fine = PairSector::build(&basis, 0, Some(0));
        assert!(matches!(
            build_generator(&model, &basis, fine),
            Err(CoreError::ConsistencyViolation(_))
        ));
        // ...while charge-only blocking closes.
        let coarse = PairSector::build(&basis, 0, None);
        assert!(build_generator(&model, &basis, coarse).is_ok());
    }

    #[test]
    fn operator_maps_shift_blocks_as_labeled() {
        let basis = ManyBodyBasis::new(1, 2, false).unwrap();
        let steady = PairSector::build(&basis, 0, Some(0));
        let minus = PairSector::build(&basis, 0, Some(-1));
        let a = basis.photon_annihilate();
        // rho = |p=1><p=1| (electron vacuum), a rho lands on |0><1|.
        let x = steady.pure_state(basis.index(0, 1)).unwrap();
        let y = steady.map_left(&a, &x, &minus).unwrap();
        let q = minus.position(basis.index(0, 0), basis.index(0, 1)).unwrap();
        assert_abs_diff_eq!((y[q] - C64::new(1.0, 0.0)).norm(), 0.0, epsilon = 1e-14);
        // rho a lands on |1><2| with amplitude sqrt(2).
        let z = steady.map_right(&a, &x, &minus).unwrap();
        let r = minus.position(basis.index(0, 1), basis.index(0, 2)).unwrap();
        assert_abs_diff_eq!((z[r] - C64::new(2f64.sqrt(), 0.0)).norm(), 0.0, epsilon = 1e-14);
    }
}
