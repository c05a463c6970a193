use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qbm_bench::ohmic_model;
use qbm_core::experiments::{run_pod, uniform_times, InitialState, ScenarioConfig, StructureKind};
use qbm_core::fock::{build_fock_hamiltonian, FockSpace};
use qbm_core::gaussian::{propagator, propagator_normal_modes};
use qbm_core::model::build_qbm_hamiltonian;
use qbm_core::structure::alternate_structure;

fn propagators(c: &mut Criterion) {
    let mut group = c.benchmark_group("propagator");
    for n in [8, 32] {
        let h = build_qbm_hamiltonian(&ohmic_model(n)).unwrap();
        group.bench_with_input(BenchmarkId::new("pade", n), &h, |b, h| {
            b.iter(|| propagator(h, black_box(7.5)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("normal_modes", n), &h, |b, h| {
            b.iter(|| propagator_normal_modes(h, black_box(7.5)).unwrap())
        });
    }
    group.finish();
}

fn structures(c: &mut Criterion) {
    let mut group = c.benchmark_group("alternate_structure");
    for n in [10, 50] {
        let h = build_qbm_hamiltonian(&ohmic_model(n)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| {
            b.iter(|| alternate_structure(black_box(h)).unwrap())
        });
    }
    group.finish();
}

fn fock(c: &mut Criterion) {
    let params = ohmic_model(1);
    let space = FockSpace::for_oscillators(vec![30, 16], &[(1.0, 1.0), (1.0, params.bath[0].omega)]).unwrap();
    let h = build_fock_hamiltonian(&params, &space).unwrap();
    c.bench_function("fock_diagonalize_480", |b| b.iter(|| black_box(&h).diagonalize()));
}

fn pod(c: &mut Criterion) {
    let cfg = ScenarioConfig {
        model: ohmic_model(8),
        initial: InitialState {
            temperature: 2.0,
            ..InitialState::default()
        },
        times: uniform_times(20.0, 81),
        purified: true,
        structure: StructureKind::Alternate,
    };
    c.bench_function("run_pod_n8_purified", |b| b.iter(|| run_pod(black_box(&cfg)).unwrap()));
}

criterion_group!(benches, propagators, structures, fock, pod);
criterion_main!(benches);
