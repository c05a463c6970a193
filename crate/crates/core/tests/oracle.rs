//! The Gaussian code paths against brute-force truncated Fock-space numbers.

use std::f64::consts::LN_2;

use approx::assert_relative_eq;
use qbm_core::fock::{
    build_fock_hamiltonian, density_log_negativity, density_purity, evolve_dense, gaussian_to_fock,
    pure_state_log_negativity, reduced_density, FockSpace,
};
use qbm_core::gaussian::{
    coherent_state, evolve, log_negativity, propagator, purify, purity, reduce, thermal_state,
};
use qbm_core::model::build_qbm_hamiltonian;
use qbm_core::{BathMode, CouplingSign, GaussianState, ModelParams, Potential};

fn single_oscillator(omega: f64) -> ModelParams {
    // an uncoupled spectator keeps the model well formed
    ModelParams {
        m1: 1.0,
        potential: Potential::Harmonic { omega },
        bath: vec![BathMode {
            mass: 1.0,
            omega: 1.0,
            coupling: 0.0,
        }],
        coupling_sign: CouplingSign::Plus,
    }
}

#[test]
fn coherent_state_follows_the_gaussian_orbit() {
    let params = single_oscillator(1.0);
    let space = FockSpace::for_oscillators(vec![40, 1], &[(1.0, 1.0), (1.0, 1.0)]).unwrap();
    let prop = build_fock_hamiltonian(&params, &space).unwrap().diagonalize();
    let h = build_qbm_hamiltonian(&params).unwrap();
    // |α| = 1.5 at unit widths
    let start = coherent_state(2, 0, 1.5 * 2f64.sqrt(), 0.0, 1.0, 1.0).unwrap();
    let psi0 = gaussian_to_fock(&start, &space).unwrap();
    for t in [0.0, 0.4, 1.3, 2.9, 6.0] {
        let psi = evolve_dense(&psi0, &prop, t).unwrap();
        let expected = evolve(&start, &propagator(&h, t).unwrap()).unwrap();
        let fidelity = psi.fidelity(&gaussian_to_fock(&expected, &space).unwrap());
        assert!(fidelity > 1.0 - 1e-6, "t = {t}: fidelity {fidelity}");
    }
}

#[test]
fn thermal_purity_from_a_purified_state() {
    // ω/2T = 1
    let thermal = thermal_state(&[(1.0, 2.0)], 1.0).unwrap();
    assert_relative_eq!(purity(&thermal).unwrap(), 1f64.tanh(), max_relative = 1e-13);
    let pure = purify(&thermal).unwrap();
    let lengths = [1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()];
    let space = FockSpace::new(vec![60, 60], lengths.to_vec()).unwrap();
    let psi = gaussian_to_fock(&pure, &space).unwrap();
    let rho = reduced_density(&psi, &space, &[0]).unwrap();
    assert_relative_eq!(density_purity(&rho), 1f64.tanh(), epsilon = 1e-10);
}

#[test]
fn two_mode_squeezed_purity_and_negativity() {
    let r = 0.3;
    let tms = GaussianState::two_mode_squeezed(r);
    let space = FockSpace::new(vec![30, 30], vec![1.0, 1.0]).unwrap();
    let psi = gaussian_to_fock(&tms, &space).unwrap();
    let rho = reduced_density(&psi, &space, &[0]).unwrap();
    // reduced state is thermal with σ_xx = cosh(2r)/2
    let reduced = reduce(&tms, &[0]).unwrap();
    assert_relative_eq!(reduced.cov()[(0, 0)], (2.0 * r).cosh() / 2.0, epsilon = 1e-14);
    assert_relative_eq!(density_purity(&rho), purity(&reduced).unwrap(), epsilon = 1e-10);
    let gaussian = log_negativity(&tms, &[0]).unwrap();
    assert_relative_eq!(gaussian, 2.0 * r / LN_2, epsilon = 1e-12);
    let dense = pure_state_log_negativity(&psi, &space, &[0]).unwrap();
    assert_relative_eq!(dense, gaussian, epsilon = 1e-8);
    let full = reduced_density(&psi, &space, &[0, 1]).unwrap();
    assert_relative_eq!(density_log_negativity(&full, &[30, 30], &[0]).unwrap(), gaussian, epsilon = 1e-8);
}

#[test]
fn coupled_pair_reduced_state_and_entanglement() {
    let params = ModelParams {
        m1: 1.0,
        potential: Potential::Harmonic { omega: 1.0 },
        bath: vec![BathMode {
            mass: 1.0,
            omega: 1.3,
            coupling: 0.3,
        }],
        coupling_sign: CouplingSign::Minus,
    };
    let h = build_qbm_hamiltonian(&params).unwrap();
    let space = FockSpace::for_oscillators(vec![30, 18], &[(1.0, 1.0), (1.0, 1.3)]).unwrap();
    let prop = build_fock_hamiltonian(&params, &space).unwrap().diagonalize();
    let start = coherent_state(1, 0, 1.0, 0.5, 1.0, 1.0)
        .unwrap()
        .tensor(&thermal_state(&[(1.0, 1.3)], 0.0).unwrap());
    let psi0 = gaussian_to_fock(&start, &space).unwrap();
    for t in [0.7, 3.1, 9.4] {
        let state = evolve(&start, &propagator(&h, t).unwrap()).unwrap();
        let psi = evolve_dense(&psi0, &prop, t).unwrap();
        let rho = reduced_density(&psi, &space, &[0]).unwrap();
        assert_relative_eq!(
            density_purity(&rho),
            purity(&reduce(&state, &[0]).unwrap()).unwrap(),
            epsilon = 1e-8
        );
        assert_relative_eq!(
            pure_state_log_negativity(&psi, &space, &[0]).unwrap(),
            log_negativity(&state, &[0]).unwrap(),
            epsilon = 1e-6
        );
    }
}
