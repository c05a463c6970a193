//! Shared fixtures for the benchmarks.

use qbm_core::model::discretize_bath;
use qbm_core::{BathSpec, CouplingSign, GridScheme, ModelParams, Potential};

/// Harmonic particle coupled to an `n`-mode Ohmic bath.
pub fn ohmic_model(n: usize) -> ModelParams {
    let spec = BathSpec {
        n_modes: n,
        gamma: 0.2,
        cutoff: 5.0,
        scheme: GridScheme::LinearGrid,
    };
    ModelParams {
        m1: 1.0,
        potential: Potential::Harmonic { omega: 1.0 },
        bath: discretize_bath(&spec, 1.0).expect("valid bath"),
        coupling_sign: CouplingSign::Plus,
    }
}
