//! Self-consistent Keldysh Green's function solver.
//!
//! All propagators live on one uniform frequency grid. Electron functions are
//! N x N matrices in the Bloch basis of each band, stored as (k, k', w)
//! arrays; the photon functions are scalars. The solver iterates
//!
//!   G  ->  Pi = -i g^2 Tr[G^< G^>]          (interband bubble)
//!      ->  D  = [(w^2 - w_c^2)/2w_c - Pi^r]^-1, D^<> = |D^r|^2 Pi^<>
//!      ->  Sigma_I = i g^2 G_other x D      (frequency correlation)
//!      ->  G  = [(w - w_k) - Sigma^r]^-1, G^<> = G^r Sigma^<> G^a
//!
//! with linear mixing until the fixed point is reached. Lead self-energies
//! are frequency independent (wide-band source filling site 1, drain
//! emptying site N), so their retarded parts are exact constants and only
//! the light-matter parts go through the numerical Kramers-Kronig step.

pub mod dyson;
pub mod free;
pub mod observables;
pub mod photon;
pub mod scba;
pub mod selfenergy;

pub use free::Filling;
pub use scba::{solve, NgfSolution, ScbaOptions};

use ndarray::Array3;

use crate::C64;

/// Retarded/lesser/greater set for one electron band, shape (n, n, l) with
/// the frequency axis last (contiguous per matrix element, which is what the
/// FFT correlation step consumes).
pub struct BandBlock {
    pub retarded: Array3<C64>,
    pub lesser: Array3<C64>,
    pub greater: Array3<C64>,
}

impl BandBlock {
    pub fn zeros(n: usize, l: usize) -> Self {
        BandBlock {
            retarded: Array3::zeros((n, n, l)),
            lesser: Array3::zeros((n, n, l)),
            greater: Array3::zeros((n, n, l)),
        }
    }
}

/// Both bands; index 0 = lower band, 1 = upper band.
pub struct ElectronGf {
    pub bands: Vec<BandBlock>,
}

impl ElectronGf {
    pub fn zeros(n: usize, l: usize) -> Self {
        ElectronGf {
            bands: vec![BandBlock::zeros(n, l), BandBlock::zeros(n, l)],
        }
    }
}

/// Scalar photon propagator set on the same grid.
pub struct PhotonGf {
    pub retarded: Vec<C64>,
    pub lesser: Vec<C64>,
    pub greater: Vec<C64>,
}
