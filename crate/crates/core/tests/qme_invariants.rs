//! Structural identities of the Lindblad solvers: trace preservation along
//! the integrator, positivity of the stationary state, source/drain balance,
//! the site-density conservation law of the light-matter interaction, the
//! band-transfer antisymmetry of the collective dissipator, and photon
//! cutoff convergence.

use fermicav_core::fock::ManyBodyBasis;
use fermicav_core::linalg::hermitian_eigenvalues;
use fermicav_core::params::SystemParams;
use fermicav_core::qme::hamiltonian::{build_hamiltonian, Coupling};
use fermicav_core::qme::liouville::{build_generator, LindbladModel, PairSector};
use fermicav_core::qme::{self, QmeOptions};
use fermicav_core::qme_eff::{build_effective_model, EffectiveOptions, EffectiveRates};
use fermicav_core::C64;

fn base() -> SystemParams {
    SystemParams {
        n_sites: 2,
        t1: 5e-5,
        t2: 5e-3,
        gamma1: 5e-4,
        gamma2: 5e-4,
        omega1: -0.5,
        omega2: 0.5,
        omega_c: 1.0,
        kappa: 0.1,
        g: 2.2e-3,
    }
}

/// Deterministic dense-ish trace-one hermitian block state.
fn seeded_state(sector: &PairSector) -> Vec<C64> {
    let mut x: Vec<C64> = (0..sector.len())
        .map(|i| {
            let t = i as f64 + 1.0;
            C64::new((0.37 * t).sin(), (0.61 * t).cos()) * 0.02
        })
        .collect();
    sector.hermitize(&mut x);
    for (slot, &pos) in sector.diagonal.iter().enumerate() {
        x[pos] += C64::new(0.5 + 0.4 * ((slot as f64) * 0.9).sin(), 0.0);
    }
    let tr = sector.trace(&x);
    for v in x.iter_mut() {
        *v /= tr;
    }
    x
}

#[test]
fn integrator_steps_preserve_the_trace() {
    let p = base();
    let basis = ManyBodyBasis::new(p.n_sites, 2, false).unwrap();
    let h = build_hamiltonian(&p, &basis, Coupling::Rwa).unwrap();
    let jumps = qme::lead_and_loss_jumps(&p, &basis, 0.0);
    let model = LindbladModel { h, jumps };
    let sector = PairSector::build(&basis, 0, Some(0));
    let gen = build_generator(&model, &basis, sector).unwrap();

    let mut x = seeded_state(&gen.sector);
    let dt = 0.02 / 5e-3;
    let mut k1 = vec![C64::new(0.0, 0.0); x.len()];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    for step in 0..200 {
        gen.apply_into(&x, &mut k1);
        for i in 0..x.len() {
            tmp[i] = x[i] + 0.5 * dt * k1[i];
        }
        gen.apply_into(&tmp, &mut k2);
        for i in 0..x.len() {
            tmp[i] = x[i] + 0.5 * dt * k2[i];
        }
        gen.apply_into(&tmp, &mut k3);
        for i in 0..x.len() {
            tmp[i] = x[i] + dt * k3[i];
        }
        gen.apply_into(&tmp, &mut k4);
        for i in 0..x.len() {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let tr = gen.sector.trace(&x);
        assert!(
            (tr - C64::new(1.0, 0.0)).norm() < 1e-10,
            "step {step}: trace drifted to {tr}"
        );
    }
}

#[test]
fn stationary_state_is_positive_and_balances_the_leads() {
    let p = base();
    let sol = qme::solve(&p, &QmeOptions::default()).unwrap();
    let dim = sol.basis.dim();
    let rho = sol.sector.densify(&sol.rho, dim);
    let evs = hermitian_eigenvalues(&rho);
    let min = evs.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min >= -1e-8, "negative population {min:.3e}");
    let trace: f64 = evs.iter().sum();
    assert!((trace - 1.0).abs() < 1e-9);

    let r = &sol.report;
    assert!(
        (r.j_source - r.j_drain).abs() <= 1e-8 * r.j_net.abs().max(1e-300),
        "source {:.8e} vs drain {:.8e}",
        r.j_source,
        r.j_drain
    );
}

#[test]
fn interaction_conserves_the_total_density_on_every_site() {
    let p = base();
    let basis = ManyBodyBasis::new(p.n_sites, 2, false).unwrap();
    for coupling in [Coupling::Rwa, Coupling::CounterRotating] {
        let mut p0 = p;
        p0.g = 0.0;
        let h_full = build_hamiltonian(&p, &basis, coupling).unwrap();
        let h_bare = build_hamiltonian(&p0, &basis, coupling).unwrap();
        let mut h_int = h_full.clone();
        h_int.add_scaled(&h_bare, C64::new(-1.0, 0.0));
        h_int.compact();
        for site in 0..p.n_sites {
            let mut n_site = basis.number(0, site);
            n_site.add_scaled(&basis.number(1, site), C64::new(1.0, 0.0));
            n_site.compact();
            let mut left = h_int.then(&n_site);
            let right = n_site.then(&h_int);
            left.add_scaled(&right, C64::new(-1.0, 0.0));
            left.compact();
            let comm = left.max_diff(&fermicav_core::fock::SparseOp::zeros(basis.dim()));
            assert!(
                comm < 1e-12,
                "site {site}: |[H_int, n_site]| = {comm:.3e} under {coupling:?}"
            );
        }
    }
}

#[test]
fn collective_dissipator_moves_population_between_bands_antisymmetrically() {
    let p = base();
    let (basis, model) = build_effective_model(&p, &EffectiveOptions::default()).unwrap();
    let rates = EffectiveRates::from_params(&p);
    assert!(rates.gamma_c > 0.0);
    // Generator with the transfer jump only: the four lead jumps stripped,
    // H zeroed.
    assert_eq!(model.jumps.len(), 5);
    let transfer_only = LindbladModel {
        h: fermicav_core::fock::SparseOp::zeros(basis.dim()),
        jumps: model.jumps[4..].to_vec(),
    };
    let sector = PairSector::build(&basis, 0, Some(0));
    let gen = build_generator(&transfer_only, &basis, sector).unwrap();
    let x = seeded_state(&gen.sector);
    let mut dx = vec![C64::new(0.0, 0.0); x.len()];
    gen.apply_into(&x, &mut dx);
    let d_n1 = gen.sector.expectation(&dx, &basis.band_number(0)).re;
    let d_n2 = gen.sector.expectation(&dx, &basis.band_number(1)).re;
    assert!(d_n1 > 0.0, "transfer must feed the lower band, got {d_n1:.3e}");
    assert!(
        (d_n1 + d_n2).abs() < 1e-12 * d_n1.abs().max(1e-300),
        "d<N1> = {d_n1:.6e} vs d<N2> = {d_n2:.6e}"
    );
}

#[test]
fn photon_cutoff_is_converged_at_the_default() {
    let p = base();
    let j = |n_max: usize| {
        qme::solve(&p, &QmeOptions { n_max, ..QmeOptions::default() })
            .unwrap()
            .report
            .j_net
    };
    let (j2, j3) = (j(2), j(3));
    assert!(
        (j2 / j3 - 1.0).abs() < 0.01,
        "cutoff drift: n_max=2 gives {j2:.6e}, n_max=3 gives {j3:.6e}"
    );
}
