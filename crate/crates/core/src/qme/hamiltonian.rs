//! Many-body Hamiltonian on the joint electron-photon Fock space.
//!
//! H = sum_{a,j} w_a n_{a,j} - sum_a t_a sum_{j<N} (c+_{a,j+1} c_{a,j} + h.c.)
//!     + w_c a+ a + H_I
//!
//! with the light-matter term either excitation-conserving,
//!
//!   H_I = g sum_j (c+_{2,j} c_{1,j} a + a+ c+_{1,j} c_{2,j}),
//!
//! or carrying the counter-rotating products as well,
//!
//!   H_I = g sum_j (c+_{2,j} c_{1,j} + c+_{1,j} c_{2,j}) (a + a+).
//!
//! Both couplings commute with the total density n_{1,j} + n_{2,j} at every
//! site: photons move electrons between bands, never along the chain.

use crate::fock::{ManyBodyBasis, SparseOp};
use crate::params::SystemParams;
use crate::{C64, CoreError, Result};

/// Choice of light-matter coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coupling {
    /// Excitation-conserving interaction; the excitation label
    /// e = N_2 + a+a commutes with H.
    #[default]
    Rwa,
    /// Full coupling g (S+ + S-)(a + a+); only total charge survives as a
    /// conserved label.
    CounterRotating,
}

/// Chain part only: band energies, intra-band hopping, lead-free.
pub fn electron_hamiltonian(params: &SystemParams, basis: &ManyBodyBasis) -> SparseOp {
    let one = C64::new(1.0, 0.0);
    let mut h = SparseOp::zeros(basis.dim());
    for band in 0..2 {
        let w0 = params.band_center(band);
        let t = params.hopping(band);
        if w0 != 0.0 {
            for site in 0..basis.n_sites {
                h.add_scaled(&basis.number(band, site), w0 * one);
            }
        }
        if t != 0.0 {
            for site in 0..basis.n_sites - 1 {
                let hop = basis.create(band, site + 1).then(&basis.annihilate(band, site));
                h.add_scaled(&hop, -t * one);
                h.add_scaled(&hop.dagger(), -t * one);
            }
        }
    }
    h.compact();
    h
}

/// Full chain + cavity + interaction Hamiltonian.
pub fn build_hamiltonian(
    params: &SystemParams,
    basis: &ManyBodyBasis,
    coupling: Coupling,
) -> Result<SparseOp> {
    if !basis.has_photon && params.g != 0.0 {
        return Err(CoreError::Unsupported(
            "light-matter coupling needs the photon register; \
             use the electron-only effective model instead"
                .into(),
        ));
    }
    let one = C64::new(1.0, 0.0);
    let mut h = electron_hamiltonian(params, basis);
    if basis.has_photon {
        h.add_scaled(&basis.photon_number(), params.omega_c * one);
        if params.g != 0.0 {
            let a = basis.photon_annihilate();
            match coupling {
                Coupling::Rwa => {
                    for site in 0..basis.n_sites {
                        let term = basis.local_lowering(site).dagger().then(&a);
                        h.add_scaled(&term, params.g * one);
                        h.add_scaled(&term.dagger(), params.g * one);
                    }
                }
                Coupling::CounterRotating => {
                    let mut quad = a.dagger();
                    quad.add_scaled(&a, one);
                    for site in 0..basis.n_sites {
                        let sm = basis.local_lowering(site);
                        let mut x = sm.dagger();
                        x.add_scaled(&sm, one);
                        h.add_scaled(&x.then(&quad), params.g * one);
                    }
                }
            }
        }
    }
    h.compact();
    Ok(h)
}

/// Excitation number R = N_2 + a+a, the generator of the interaction-frame
/// rotation used by the photon correlation solver. Commutes with the
/// excitation-conserving Hamiltonian and with every dissipator.
pub fn excitation_number(basis: &ManyBodyBasis) -> SparseOp {
    let mut r = basis.band_number(1);
    if basis.has_photon {
        r.add_scaled(&basis.photon_number(), C64::new(1.0, 0.0));
    }
    r.compact();
    r
}
