use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;
use qbm_core::gaussian::{
    coherent_state, evolve, log_negativity, propagator, propagator_normal_modes, purify, purity, reduce,
    thermal_state,
};
use qbm_core::linalg::{symplectic_form, symplectic_residual};
use qbm_core::model::build_qbm_hamiltonian;
use qbm_core::structure::{alternate_structure, cm_relative_map, compose, transform_hamiltonian};
use qbm_core::{BathMode, CouplingSign, GaussianState, ModelParams, Potential, StructureMap};

fn model_strategy(max_bath: usize) -> impl Strategy<Value = ModelParams> {
    let mode = (0.5f64..2.0, 0.4f64..2.5, 0.0f64..1.0).prop_map(|(mass, omega, c)| BathMode {
        mass,
        omega,
        // small enough that the potential block stays positive definite
        coupling: 0.3 * c * mass.sqrt() * omega,
    });
    (
        0.5f64..2.5,
        prop::option::of(0.5f64..2.0),
        prop::collection::vec(mode, 1..=max_bath),
        any::<bool>(),
    )
        .prop_map(|(m1, omega, bath, plus)| ModelParams {
            m1,
            potential: omega.map_or(Potential::Free, |omega| Potential::Harmonic { omega }),
            coupling_sign: if plus { CouplingSign::Plus } else { CouplingSign::Minus },
            bath,
        })
}

fn harmonic_model_strategy(max_bath: usize) -> impl Strategy<Value = ModelParams> {
    (model_strategy(max_bath), 0.7f64..1.8).prop_map(|(mut p, omega)| {
        p.potential = Potential::Harmonic { omega };
        p
    })
}

fn initial_state(params: &ModelParams, x: f64, p: f64, temperature: f64) -> GaussianState {
    let particle = coherent_state(1, 0, x, p, params.m1, 1.0).unwrap();
    let bath: Vec<(f64, f64)> = params.bath.iter().map(|b| (b.mass, b.omega)).collect();
    particle.tensor(&thermal_state(&bath, temperature).unwrap())
}

fn spectrum(h: &qbm_core::QuadraticHamiltonian) -> Vec<f64> {
    let n = h.n_modes();
    let m = symplectic_form(n) * h.matrix();
    let mut ev: Vec<f64> = m
        .map(|v| Complex::new(v, 0.0))
        .eigenvalues()
        .expect("square matrix")
        .iter()
        .map(|z| z.im.abs())
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hamiltonian_read_back_round_trips(params in model_strategy(6)) {
        let h = build_qbm_hamiltonian(&params).unwrap();
        let back = h.read_back().unwrap();
        // masses pass through a reciprocal and frequencies through a square root
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-14 * a.abs().max(b.abs());
        prop_assert!(close(back.m1, params.m1));
        match (back.potential, params.potential) {
            (Potential::Free, Potential::Free) => {}
            (Potential::Harmonic { omega: a }, Potential::Harmonic { omega: b }) => prop_assert!(close(a, b)),
            (a, b) => prop_assert!(false, "{:?} read back as {:?}", b, a),
        }
        prop_assert_eq!(back.bath.len(), params.bath.len());
        for (b, p) in back.bath.iter().zip(&params.bath) {
            prop_assert!(close(b.mass, p.mass) && close(b.omega, p.omega) && close(b.coupling, p.coupling));
        }
        if params.bath.iter().any(|b| b.coupling != 0.0) {
            prop_assert_eq!(back.coupling_sign, params.coupling_sign);
        }
    }

    #[test]
    fn structure_maps_are_canonical(params in model_strategy(8)) {
        let h = build_qbm_hamiltonian(&params).unwrap();
        let cm = cm_relative_map(&params.masses()).unwrap();
        let alt = alternate_structure(&h).unwrap();
        for map in [&cm, &alt.map, &alt.map.inverse(), &compose(&cm, &alt.map).unwrap()] {
            prop_assert!(symplectic_residual(&map.lift()) < 1e-10);
        }
        let back = compose(&alt.map, &alt.map.inverse()).unwrap();
        prop_assert!((back.positions() - DMatrix::identity(h.n_modes(), h.n_modes())).amax() < 1e-10);
    }

    #[test]
    fn structure_map_text_round_trips(params in model_strategy(6)) {
        let h = build_qbm_hamiltonian(&params).unwrap();
        let map = alternate_structure(&h).unwrap().map;
        let back = StructureMap::from_text(&map.to_text()).unwrap();
        prop_assert_eq!(back.positions(), map.positions());
        prop_assert_eq!(back.labels(), map.labels());
    }

    #[test]
    fn frequencies_survive_the_change_of_structure(params in harmonic_model_strategy(5)) {
        let h = build_qbm_hamiltonian(&params).unwrap();
        let alt = alternate_structure(&h).unwrap();
        let before = spectrum(&h);
        let after = spectrum(&alt.hamiltonian);
        let scale = before.iter().copied().fold(1.0, f64::max);
        for (a, b) in before.iter().zip(&after) {
            prop_assert!((a - b).abs() < 1e-8 * scale, "{} vs {}", a, b);
        }
        // the same operator in either coordinates
        let direct = transform_hamiltonian(&h, &alt.map).unwrap();
        prop_assert!((direct.matrix() - alt.hamiltonian.matrix()).amax() < 1e-10);
    }

    #[test]
    fn energy_is_conserved(
        params in model_strategy(5),
        x in -1.5f64..1.5,
        p in -1.0f64..1.0,
        t in 0.0f64..15.0,
        temperature in 0.0f64..2.0,
    ) {
        let h = build_qbm_hamiltonian(&params).unwrap();
        let s0 = initial_state(&params, x, p, temperature);
        let e0 = s0.energy(&h).unwrap();
        let s = propagator(&h, t).unwrap();
        prop_assert!(symplectic_residual(&s) < 1e-10 * s.amax().max(1.0).powi(2));
        let e = evolve(&s0, &s).unwrap().energy(&h).unwrap();
        prop_assert!((e - e0).abs() <= 1e-8 * e0.abs().max(1.0), "{} vs {}", e, e0);
    }

    #[test]
    fn propagator_group_law_and_normal_mode_route(params in harmonic_model_strategy(4), t1 in 0.0f64..6.0, t2 in 0.0f64..6.0) {
        let h = build_qbm_hamiltonian(&params).unwrap();
        let a = propagator(&h, t1).unwrap();
        let b = propagator(&h, t2).unwrap();
        let ab = propagator(&h, t1 + t2).unwrap();
        prop_assert!((&b * &a - &ab).amax() < 1e-8);
        let via_modes = propagator_normal_modes(&h, t1).unwrap();
        prop_assert!((via_modes - a).amax() < 1e-9);
    }

    #[test]
    fn pure_states_have_schmidt_symmetric_purities(
        params in model_strategy(4),
        t in 0.0f64..10.0,
        temperature in 0.0f64..3.0,
        split in 1usize..4,
    ) {
        let h = build_qbm_hamiltonian(&params).unwrap();
        let mixed = initial_state(&params, 0.4, -0.2, temperature);
        let n = mixed.n_modes();
        let global = purify(&mixed).unwrap();
        let s = propagator(&h.with_inert_modes(n), t).unwrap();
        let state = evolve(&global, &s).unwrap();
        prop_assert!((purity(&state).unwrap() - 1.0).abs() < 1e-8);
        let total = state.n_modes();
        let k = split.min(total - 1);
        let a: Vec<usize> = (0..k).collect();
        let b: Vec<usize> = (k..total).collect();
        let pa = purity(&reduce(&state, &a).unwrap()).unwrap();
        let pb = purity(&reduce(&state, &b).unwrap()).unwrap();
        prop_assert!(pa <= 1.0 + 1e-12 && pb <= 1.0 + 1e-12);
        prop_assert!((pa - pb).abs() < 1e-8, "{} vs {}", pa, pb);
        // purification leaves the physical state alone
        let back = reduce(&global, &(0..n).collect::<Vec<_>>()).unwrap();
        prop_assert!((back.cov() - mixed.cov()).amax() < 1e-10);
    }

    #[test]
    fn negativity_ignores_local_operations(r in 0.05f64..1.0, t in 0.0f64..3.0, w1 in 0.5f64..2.0, w2 in 0.5f64..2.0) {
        let tms = GaussianState::two_mode_squeezed(r);
        let e0 = log_negativity(&tms, &[0]).unwrap();
        prop_assert!((e0 - 2.0 * r / std::f64::consts::LN_2).abs() < 1e-10);
        // independent rotations and squeezers on each side
        let local = ModelParams {
            m1: 1.0,
            potential: Potential::Harmonic { omega: w1 },
            bath: vec![BathMode { mass: 2.0, omega: w2, coupling: 0.0 }],
            coupling_sign: CouplingSign::Plus,
        };
        let s = propagator(&build_qbm_hamiltonian(&local).unwrap(), t).unwrap();
        let squeeze = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.7, 1.0, 1.0 / 1.7, 1.0]));
        let moved = evolve(&evolve(&tms, &s).unwrap(), &squeeze).unwrap();
        prop_assert!((log_negativity(&moved, &[0]).unwrap() - e0).abs() < 1e-8);
    }
}
