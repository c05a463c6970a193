//! Particle + harmonic bath Hamiltonians with bilinear position coupling.
//!
//! Units have ħ = 1. Phase-space vectors are ordered `(x_1..x_n, p_1..p_n)`
//! and a quadratic Hamiltonian is stored as the symmetric matrix `K` with
//! `H = ½ zᵀ K z`. Mode 0 is the particle, modes `1..=N` are the bath.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{check_dim, Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    Free,
    Harmonic { omega: f64 },
}

/// Sign in front of the `x_1 Σ κ_i x_2i` interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingSign {
    #[default]
    Plus,
    Minus,
}

impl CouplingSign {
    pub fn factor(self) -> f64 {
        match self {
            CouplingSign::Plus => 1.0,
            CouplingSign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathMode {
    pub mass: f64,
    pub omega: f64,
    pub coupling: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub m1: f64,
    pub potential: Potential,
    pub bath: Vec<BathMode>,
    pub coupling_sign: CouplingSign,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        positive("m1", self.m1)?;
        if let Potential::Harmonic { omega } = self.potential {
            positive("omega", omega)?;
        }
        if self.bath.is_empty() {
            return Err(Error::domain("bath", "at least one bath mode is required"));
        }
        for (i, mode) in self.bath.iter().enumerate() {
            positive(&format!("bath[{i}].mass"), mode.mass)?;
            positive(&format!("bath[{i}].omega"), mode.omega)?;
            if !mode.coupling.is_finite() {
                return Err(Error::domain(format!("bath[{i}].coupling"), "must be finite"));
            }
        }
        Ok(())
    }

    pub fn n_bath(&self) -> usize {
        self.bath.len()
    }

    /// Masses of all `N + 1` modes, particle first.
    pub fn masses(&self) -> Vec<f64> {
        std::iter::once(self.m1)
            .chain(self.bath.iter().map(|b| b.mass))
            .collect()
    }

    pub fn with_couplings_scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for b in &mut out.bath {
            b.coupling *= factor;
        }
        out
    }
}

fn positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(field, format!("must be strictly positive, got {value}")))
    }
}

/// `H = ½ zᵀ K z` over `n_modes` canonical pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    n_modes: usize,
    k: DMatrix<f64>,
}

impl QuadraticHamiltonian {
    pub fn new(k: DMatrix<f64>) -> Result<Self> {
        if k.nrows() != k.ncols() || k.nrows() % 2 != 0 || k.nrows() == 0 {
            return Err(Error::Dimension {
                expected: 2 * (k.nrows() / 2).max(1),
                found: k.ncols(),
            });
        }
        for i in 0..k.nrows() {
            for j in 0..i {
                if (k[(i, j)] - k[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::domain(
                        "K",
                        format!("not symmetric at ({i}, {j}): {} vs {}", k[(i, j)], k[(j, i)]),
                    ));
                }
            }
        }
        Ok(Self {
            n_modes: k.nrows() / 2,
            k,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.k
    }

    /// Position–position block.
    pub fn potential_block(&self) -> DMatrix<f64> {
        let n = self.n_modes;
        self.k.view((0, 0), (n, n)).into_owned()
    }

    /// Momentum–momentum block (the inverse mass matrix for point transformations).
    pub fn kinetic_block(&self) -> DMatrix<f64> {
        let n = self.n_modes;
        self.k.view((n, n), (n, n)).into_owned()
    }

    /// Position–momentum block.
    pub fn mixed_block(&self) -> DMatrix<f64> {
        let n = self.n_modes;
        self.k.view((0, n), (n, n)).into_owned()
    }

    /// Appends `extra` dynamically inert modes (zero rows and columns).
    pub fn with_inert_modes(&self, extra: usize) -> Self {
        let n = self.n_modes;
        let m = n + extra;
        let mut k = DMatrix::zeros(2 * m, 2 * m);
        for (bi, oi) in [(0, 0), (n, m)] {
            for (bj, oj) in [(0, 0), (n, m)] {
                k.view_mut((oi, oj), (n, n))
                    .copy_from(&self.k.view((bi, bj), (n, n)));
            }
        }
        Self { n_modes: m, k }
    }

    /// Smallest eigenvalue of the position–position block.
    pub fn min_potential_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.potential_block())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Recovers the particle + bath parameters from `K`.
    ///
    /// Fails when `K` does not have the particle + bath sparsity pattern. With
    /// every coupling zero the sign cannot be recovered and reads back as `Plus`.
    pub fn read_back(&self) -> Result<ModelParams> {
        let n = self.n_modes;
        if n < 2 {
            return Err(Error::domain("K", "needs a particle and at least one bath mode"));
        }
        let k = &self.k;
        let structural = |field: &str| Error::domain(field, "not of particle + bath form");
        for i in 0..n {
            for j in 0..n {
                if k[(i, n + j)] != 0.0 {
                    return Err(structural("K_xp"));
                }
                if i != j && k[(n + i, n + j)] != 0.0 {
                    return Err(structural("K_pp"));
                }
                if i != j && i != 0 && j != 0 && k[(i, j)] != 0.0 {
                    return Err(structural("K_xx"));
                }
            }
        }
        let m1 = 1.0 / k[(n, n)];
        let potential = if k[(0, 0)] == 0.0 {
            Potential::Free
        } else {
            Potential::Harmonic {
                omega: (k[(0, 0)] / m1).sqrt(),
            }
        };
        let coupling_sign = if (1..n).any(|i| k[(0, i)] < 0.0) {
            CouplingSign::Minus
        } else {
            CouplingSign::Plus
        };
        let bath = (1..n)
            .map(|i| {
                let mass = 1.0 / k[(n + i, n + i)];
                BathMode {
                    mass,
                    omega: (k[(i, i)] / mass).sqrt(),
                    coupling: k[(0, i)] * coupling_sign.factor(),
                }
            })
            .collect();
        let params = ModelParams {
            m1,
            potential,
            bath,
            coupling_sign,
        };
        params.validate()?;
        Ok(params)
    }
}

/// Assembles `K` for the particle + harmonic bath Hamiltonian
/// `p₁²/2m₁ + V(x₁) + Σ (p²/2m + m ω² x²/2) ± x₁ Σ κ x`.
///
/// The interaction sits symmetrically at `K[x₁, x_i] = K[x_i, x₁] = ±κ_i`, which
/// is what `½ zᵀ K z` needs to reproduce `±κ_i x₁ x_i` exactly.
pub fn build_qbm_hamiltonian(params: &ModelParams) -> Result<QuadraticHamiltonian> {
    params.validate()?;
    let n = params.n_bath() + 1;
    let mut k = DMatrix::zeros(2 * n, 2 * n);
    k[(n, n)] = 1.0 / params.m1;
    if let Potential::Harmonic { omega } = params.potential {
        k[(0, 0)] = params.m1 * omega * omega;
    }
    let sign = params.coupling_sign.factor();
    for (i, mode) in params.bath.iter().enumerate() {
        let j = i + 1;
        k[(n + j, n + j)] = 1.0 / mode.mass;
        k[(j, j)] = mode.mass * mode.omega * mode.omega;
        k[(0, j)] = sign * mode.coupling;
        k[(j, 0)] = sign * mode.coupling;
    }
    let h = QuadraticHamiltonian::new(k)?;
    let lowest = h.min_potential_eigenvalue();
    if lowest < 0.0 {
        log::warn!(
            "potential block is indefinite (lowest eigenvalue {lowest:.3e}); dynamics will be unstable"
        );
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridScheme {
    /// `ω_i = i Λ / N`.
    #[default]
    LinearGrid,
    /// Geometric grid from `Λ / N` up to `Λ`.
    LogGrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub n_modes: usize,
    pub gamma: f64,
    pub cutoff: f64,
    pub scheme: GridScheme,
}

impl BathSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_modes == 0 {
            return Err(Error::domain("n", "at least one bath mode is required"));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::domain("gamma", format!("must be non-negative, got {}", self.gamma)));
        }
        positive("cutoff", self.cutoff)
    }

    /// Grid frequencies in `(0, Λ]` with the spacing attributed to each point.
    pub fn grid(&self) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        let n = self.n_modes;
        let lambda = self.cutoff;
        let points: Vec<f64> = match self.scheme {
            GridScheme::LinearGrid => (1..=n).map(|i| i as f64 * lambda / n as f64).collect(),
            GridScheme::LogGrid => {
                if n == 1 {
                    vec![lambda]
                } else {
                    let lo = lambda / n as f64;
                    let ratio = (lambda / lo).powf(1.0 / (n - 1) as f64);
                    (0..n)
                        .map(|i| if i == n - 1 { lambda } else { lo * ratio.powi(i as i32) })
                        .collect()
                }
            }
        };
        // each point owns the interval back to its left neighbour (0 for the first)
        let spacing = points
            .iter()
            .enumerate()
            .map(|(i, &w)| if i == 0 { w } else { w - points[i - 1] });
        Ok(points.iter().copied().zip(spacing).collect())
    }
}

/// Samples an Ohmic spectral density `J(ω) = m γ ω` on the chosen grid:
/// `κ_i² = (2/π) m γ ω_i² Δω_i`.
pub fn discretize_bath(spec: &BathSpec, mass: f64) -> Result<Vec<BathMode>> {
    positive("mass", mass)?;
    Ok(spec
        .grid()?
        .into_iter()
        .map(|(omega, dw)| BathMode {
            mass,
            omega,
            coupling: (2.0 / PI * mass * spec.gamma * omega * omega * dw).sqrt(),
        })
        .collect())
}

/// Checks `K` against the dimension of a phase-space object.
pub(crate) fn check_modes(h: &QuadraticHamiltonian, n_modes: usize) -> Result<()> {
    check_dim(h.n_modes(), n_modes)
}
