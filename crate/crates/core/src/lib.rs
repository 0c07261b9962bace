//! Steady-state transport of a two-band tight-binding chain whose interband
//! dipole couples to a single lossy cavity mode.
//!
//! The chain has `N` sites and two flat-ish bands (hoppings `t1`, `t2`,
//! centers `omega1 < omega2`). A source lead injects into site 1 of both
//! bands at rate `gamma`, a drain extracts from site `N`, and the cavity
//! (frequency `omega_c`, loss `kappa`) exchanges excitations with the
//! interband transition at vacuum coupling `g`. Units: hbar = e = 1, and all
//! rates/energies are quoted in units of the interband gap
//! `omega21 = omega2 - omega1` (1 by default).
//!
//! Three independent solvers produce the steady state:
//!
//! * [`ngf`] — self-consistent Keldysh Green's functions on a shared
//!   frequency grid (Born approximation for the light-matter self-energies,
//!   exact under the rotating-wave coupling),
//! * [`qme`] — the full Lindblad master equation for electrons + photon,
//! * [`qme_eff`] — the electron-only master equation obtained by adiabatic
//!   elimination of a strongly damped cavity,
//!
//! plus closed-form rate-equation results in [`rates`] used as analytic
//! oracles. [`observables`] extracts currents, spectra, polariton splittings,
//! and real-time spectral functions from any of them.

pub mod bloch;
pub mod conv;
pub mod error;
pub mod fock;
pub mod grid;
pub mod hilbert;
pub mod linalg;
pub mod ngf;
pub mod observables;
pub mod params;
pub mod qme;
pub mod qme_eff;
pub mod rates;

pub use error::CoreError;
pub use params::{DerivedScales, Regime, SystemParams};

/// Shorthand used throughout: double-precision complex numbers.
pub type C64 = num_complex::Complex64;

/// Result alias for fallible core operations.
pub type Result<T> = std::result::Result<T, CoreError>;
