//! Occupation-number bases and sparse many-body operators for the
//! chain-plus-cavity Hilbert space.
//!
//! The 2N fermionic modes are ordered band-0 sites first (modes 0..N-1),
//! then band-1 sites (modes N..2N-1); Jordan-Wigner strings count the
//! occupied modes below the acted-on one in this order. The photon register
//! is the trailing tensor factor, so a joint basis index decomposes as
//! i = mask * (n_max + 1) + p with mask the 2N-bit electron occupation.
//!
//! Truncating the photon ladder at n_max breaks [a, a^dag] = 1 only in the
//! (n_max, n_max) element, where it evaluates to -n_max. Cutoff artifacts
//! are therefore assessed by comparing observables at successive n_max, not
//! by inspecting the commutator.
//!
//! The hardcore variant keeps the same occupation labels but drops the
//! strings, turning each electron mode into an independent two-level boson.
//! Contrasting the two statistics isolates which transport features are
//! genuinely fermionic.

use ndarray::Array2;

use crate::{C64, CoreError, Result};

/// Occupation-number basis for 2 * n_sites fermionic (or hardcore-boson)
/// modes, optionally tensored with a truncated photon ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ManyBodyBasis {
    pub n_sites: usize,
    /// Highest photon number kept; 0 when the basis has no photon factor.
    pub n_max: usize,
    pub hardcore: bool,
    pub has_photon: bool,
}

impl ManyBodyBasis {
    /// Electrons plus a photon register truncated at n_max quanta.
    pub fn new(n_sites: usize, n_max: usize, hardcore: bool) -> Result<Self> {
        Self::check_sites(n_sites)?;
        if n_max < 1 {
            return Err(CoreError::CutoffTooSmall(
                "photon register needs n_max >= 1 to hold any quantum".into(),
            ));
        }
        Ok(Self { n_sites, n_max, hardcore, has_photon: true })
    }

    /// Electron-only basis (photon factor already traced or eliminated).
    pub fn electrons_only(n_sites: usize, hardcore: bool) -> Result<Self> {
        Self::check_sites(n_sites)?;
        Ok(Self { n_sites, n_max: 0, hardcore, has_photon: false })
    }

    fn check_sites(n_sites: usize) -> Result<()> {
        if n_sites < 1 {
            return Err(CoreError::InvalidParams("n_sites must be >= 1".into()));
        }
        if n_sites > 8 {
            return Err(CoreError::Unsupported(format!(
                "dense many-body treatment of n_sites = {n_sites} (4^N scaling); \
                 use the Green-function solver for long chains"
            )));
        }
        Ok(())
    }

    pub fn n_modes(&self) -> usize {
        2 * self.n_sites
    }

    pub fn electron_dim(&self) -> usize {
        1 << self.n_modes()
    }

    pub fn photon_dim(&self) -> usize {
        if self.has_photon { self.n_max + 1 } else { 1 }
    }

    pub fn dim(&self) -> usize {
        self.electron_dim() * self.photon_dim()
    }

    /// Mode index of (band, site), both 0-based; band-0 block comes first.
    pub fn mode(&self, band: usize, site: usize) -> usize {
        debug_assert!(band < 2 && site < self.n_sites);
        band * self.n_sites + site
    }

    pub fn index(&self, mask: usize, photons: usize) -> usize {
        debug_assert!(photons < self.photon_dim());
        mask * self.photon_dim() + photons
    }

    /// Splits a joint index into (electron occupation mask, photon number).
    pub fn split(&self, i: usize) -> (usize, usize) {
        (i / self.photon_dim(), i % self.photon_dim())
    }

    /// Conserved labels (q, e): total electron number and combined
    /// excitation number (band-1 electrons plus photons). Every jump and
    /// rotating-wave Hamiltonian term shifts these by fixed amounts, which
    /// is what lets the master equation split into decoupled blocks.
    pub fn labels(&self, i: usize) -> (u32, u32) {
        let (mask, p) = self.split(i);
        let q = (mask as u64).count_ones();
        let e = ((mask >> self.n_sites) as u64).count_ones() + p as u32;
        (q, e)
    }

    /// Annihilation operator for the electron mode (band, site).
    pub fn annihilate(&self, band: usize, site: usize) -> SparseOp {
        let m = self.mode(band, site);
        let bit = 1usize << m;
        let below = bit - 1;
        let pd = self.photon_dim();
        let mut op = SparseOp::zeros(self.dim());
        for mask in 0..self.electron_dim() {
            if mask & bit == 0 {
                continue;
            }
            let sign = if self.hardcore {
                1.0
            } else if ((mask & below) as u64).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            let out = mask & !bit;
            for p in 0..pd {
                op.cols[self.index(mask, p)].push((self.index(out, p), C64::new(sign, 0.0)));
            }
        }
        op
    }

    pub fn create(&self, band: usize, site: usize) -> SparseOp {
        self.annihilate(band, site).dagger()
    }

    /// Diagonal occupation operator n_{band,site}.
    pub fn number(&self, band: usize, site: usize) -> SparseOp {
        let bit = 1usize << self.mode(band, site);
        let pd = self.photon_dim();
        let mut op = SparseOp::zeros(self.dim());
        for mask in 0..self.electron_dim() {
            if mask & bit == 0 {
                continue;
            }
            for p in 0..pd {
                let i = self.index(mask, p);
                op.cols[i].push((i, C64::new(1.0, 0.0)));
            }
        }
        op
    }

    /// Total electron number in one band.
    pub fn band_number(&self, band: usize) -> SparseOp {
        let mut op = SparseOp::zeros(self.dim());
        for site in 0..self.n_sites {
            op.add_scaled(&self.number(band, site), C64::new(1.0, 0.0));
        }
        op.compact();
        op
    }

    pub fn photon_annihilate(&self) -> SparseOp {
        assert!(self.has_photon, "basis has no photon register");
        let pd = self.photon_dim();
        let mut op = SparseOp::zeros(self.dim());
        for mask in 0..self.electron_dim() {
            for p in 1..pd {
                op.cols[self.index(mask, p)]
                    .push((self.index(mask, p - 1), C64::new((p as f64).sqrt(), 0.0)));
            }
        }
        op
    }

    pub fn photon_create(&self) -> SparseOp {
        self.photon_annihilate().dagger()
    }

    pub fn photon_number(&self) -> SparseOp {
        assert!(self.has_photon, "basis has no photon register");
        let pd = self.photon_dim();
        let mut op = SparseOp::zeros(self.dim());
        for mask in 0..self.electron_dim() {
            for p in 1..pd {
                let i = self.index(mask, p);
                op.cols[i].push((i, C64::new(p as f64, 0.0)));
            }
        }
        op
    }

    /// Local interband lowering s^-_j = c^dag_{0j} c_{1j}: moves one
    /// electron from the upper band to the lower band at site j.
    pub fn local_lowering(&self, site: usize) -> SparseOp {
        let mut op = self.create(0, site).then(&self.annihilate(1, site));
        op.compact();
        op
    }

    /// Collective lowering S^- = sum_j c^dag_{0j} c_{1j}.
    pub fn collective_lowering(&self) -> SparseOp {
        let mut op = SparseOp::zeros(self.dim());
        for site in 0..self.n_sites {
            op.add_scaled(&self.local_lowering(site), C64::new(1.0, 0.0));
        }
        op.compact();
        op
    }
}

/// Sparse complex operator in column-major storage: `cols[c]` lists the
/// nonzero `(row, amplitude)` pairs of column c. Column access is what the
/// superoperator assembly needs (it consumes whole columns of H and of each
/// jump operator), so no row index is kept.
#[derive(Debug, Clone)]
pub struct SparseOp {
    pub dim: usize,
    pub cols: Vec<Vec<(usize, C64)>>,
}

impl SparseOp {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, cols: vec![Vec::new(); dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for (c, col) in op.cols.iter_mut().enumerate() {
            col.push((c, C64::new(1.0, 0.0)));
        }
        op
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut op = Self::zeros(diag.len());
        for (c, &v) in diag.iter().enumerate() {
            if v != C64::new(0.0, 0.0) {
                op.cols[c].push((c, v));
            }
        }
        op
    }

    /// Matrix element (row, col); zero when absent.
    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.cols[col]
            .iter()
            .filter(|(r, _)| *r == row)
            .map(|(_, v)| *v)
            .sum()
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                out.cols[r].push((c, v.conj()));
            }
        }
        out
    }

    /// Matrix product self * rhs.
    pub fn then(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let mut out = Self::zeros(self.dim);
        let mut dense = vec![C64::new(0.0, 0.0); self.dim];
        let mut touched: Vec<usize> = Vec::new();
        for (j, rcol) in rhs.cols.iter().enumerate() {
            for &(k, bkj) in rcol {
                for &(i, aik) in &self.cols[k] {
                    if dense[i] == C64::new(0.0, 0.0) {
                        touched.push(i);
                    }
                    dense[i] += aik * bkj;
                }
            }
            touched.sort_unstable();
            for &i in &touched {
                if dense[i] != C64::new(0.0, 0.0) {
                    out.cols[j].push((i, dense[i]));
                }
                dense[i] = C64::new(0.0, 0.0);
            }
            touched.clear();
        }
        out
    }

    /// self += factor * other, entry lists concatenated (call `compact` to
    /// merge duplicates when the result is reused heavily).
    pub fn add_scaled(&mut self, other: &Self, factor: C64) {
        assert_eq!(self.dim, other.dim);
        if factor == C64::new(0.0, 0.0) {
            return;
        }
        for (dst, src) in self.cols.iter_mut().zip(&other.cols) {
            dst.extend(src.iter().map(|&(r, v)| (r, factor * v)));
        }
    }

    pub fn scale(&mut self, factor: C64) {
        for col in &mut self.cols {
            for (_, v) in col.iter_mut() {
                *v *= factor;
            }
        }
    }

    /// Sorts each column by row and merges duplicate entries, dropping
    /// exact zeros.
    pub fn compact(&mut self) {
        for col in &mut self.cols {
            if col.len() < 2 {
                col.retain(|&(_, v)| v != C64::new(0.0, 0.0));
                continue;
            }
            col.sort_unstable_by_key(|&(r, _)| r);
            let mut merged: Vec<(usize, C64)> = Vec::with_capacity(col.len());
            for &(r, v) in col.iter() {
                match merged.last_mut() {
                    Some((lr, lv)) if *lr == r => *lv += v,
                    _ => merged.push((r, v)),
                }
            }
            merged.retain(|&(_, v)| v != C64::new(0.0, 0.0));
            *col = merged;
        }
    }

    /// y = A x.
    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (c, col) in self.cols.iter().enumerate() {
            let xc = x[c];
            if xc == C64::new(0.0, 0.0) {
                continue;
            }
            for &(r, v) in col {
                y[r] += v * xc;
            }
        }
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let mut out = Array2::from_elem((self.dim, self.dim), C64::new(0.0, 0.0));
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                out[[r, c]] += v;
            }
        }
        out
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.to_dense();
        for i in 0..self.dim {
            for j in 0..=i {
                if (d[[i, j]] - d[[j, i]].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Largest |entry| of self - other, via dense comparison.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let a = self.to_dense();
        let b = other.to_dense();
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}
