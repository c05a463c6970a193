//! Gaussian states and their exact dynamics under quadratic Hamiltonians.
//!
//! Covariances follow `σ_ij = ½⟨{Δz_i, Δz_j}⟩` with ħ = 1, so the vacuum of a
//! unit-mass, unit-frequency mode is `½ I` and purity is `1 / (2ⁿ √det σ)`.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    expm, phase_indices, select, select_vec, symmetrize, symplectic_eigenvalues, symplectic_form,
    williamson,
};
use crate::model::{check_modes, QuadraticHamiltonian};

pub type Complex64 = Complex<f64>;

/// Tolerance on the uncertainty relation `σ + (i/2)Ω ≥ 0`.
pub const UNCERTAINTY_TOL: f64 = 1e-10;
/// Symplectic eigenvalues within this of ½ count as pure.
pub const PURITY_TOL: f64 = 1e-8;
/// Covariance determinants below this are treated as singular.
pub const DET_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, mut cov: DMatrix<f64>) -> Result<Self> {
        let dim = cov.nrows();
        if dim == 0 || dim % 2 != 0 || cov.ncols() != dim {
            return Err(Error::Dimension {
                expected: 2 * (dim / 2).max(1),
                found: cov.ncols(),
            });
        }
        check_dim(dim, mean.len())?;
        if !cov.iter().chain(mean.iter()).all(|v| v.is_finite()) {
            return Err(Error::State("non-finite moments".into()));
        }
        let scale = cov.amax().max(1.0);
        if (&cov - cov.transpose()).amax() > 1e-10 * scale {
            return Err(Error::State("covariance is not symmetric".into()));
        }
        symmetrize(&mut cov);
        let state = Self { mean, cov };
        let lowest = state.uncertainty_margin();
        if lowest < -UNCERTAINTY_TOL * scale {
            return Err(Error::State(format!(
                "covariance violates the uncertainty relation (lowest eigenvalue {lowest:.3e})"
            )));
        }
        Ok(state)
    }

    pub(crate) fn from_parts_unchecked(mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        Self { mean, cov }
    }

    /// Unit-width vacuum on `n` modes.
    pub fn vacuum(n: usize) -> Self {
        Self {
            mean: DVector::zeros(2 * n),
            cov: DMatrix::identity(2 * n, 2 * n) * 0.5,
        }
    }

    /// Two-mode squeezed vacuum with squeezing `r` on modes (0, 1).
    pub fn two_mode_squeezed(r: f64) -> Self {
        let (c, s) = ((2.0 * r).cosh() * 0.5, (2.0 * r).sinh() * 0.5);
        let cov = DMatrix::from_row_slice(
            4,
            4,
            &[c, s, 0.0, 0.0, s, c, 0.0, 0.0, 0.0, 0.0, c, -s, 0.0, 0.0, -s, c],
        );
        Self {
            mean: DVector::zeros(4),
            cov,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Lowest eigenvalue of the Hermitian matrix `σ + (i/2)Ω`.
    pub fn uncertainty_margin(&self) -> f64 {
        let omega = symplectic_form(self.n_modes());
        let herm = DMatrix::from_fn(self.cov.nrows(), self.cov.ncols(), |i, j| {
            Complex64::new(self.cov[(i, j)], 0.5 * omega[(i, j)])
        });
        SymmetricEigen::new(herm).eigenvalues.min()
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues(&self.cov)
    }

    pub fn is_pure(&self) -> bool {
        self.symplectic_eigenvalues()
            .map(|nus| nus.iter().all(|nu| (nu - 0.5).abs() < PURITY_TOL))
            .unwrap_or(false)
    }

    /// Tensor product `self ⊗ other`, modes of `self` first.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let (n, m) = (self.n_modes(), other.n_modes());
        let total = n + m;
        let mut mean = DVector::zeros(2 * total);
        let mut cov = DMatrix::zeros(2 * total, 2 * total);
        let a_idx = phase_indices(&(0..n).collect::<Vec<_>>(), total);
        let b_idx = phase_indices(&(n..total).collect::<Vec<_>>(), total);
        for (src, idx) in [(self, &a_idx), (other, &b_idx)] {
            for (a, &i) in idx.iter().enumerate() {
                mean[i] = src.mean[a];
                for (b, &j) in idx.iter().enumerate() {
                    cov[(i, j)] = src.cov[(a, b)];
                }
            }
        }
        GaussianState { mean, cov }
    }

    /// Adds `delta` to the mean.
    pub fn displaced(&self, delta: &DVector<f64>) -> Result<GaussianState> {
        check_dim(self.mean.len(), delta.len())?;
        Ok(GaussianState {
            mean: &self.mean + delta,
            cov: self.cov.clone(),
        })
    }

    /// Quadratic-form expectation `⟨½ zᵀ K z⟩ = ½(tr(Kσ) + mᵀKm)`.
    pub fn energy(&self, h: &QuadraticHamiltonian) -> Result<f64> {
        check_modes(h, self.n_modes())?;
        let k = h.matrix();
        Ok(0.5 * ((k * &self.cov).trace() + self.mean.dot(&(k * &self.mean))))
    }

    /// Position marginal of one mode as `(mean, variance)`.
    pub fn position_marginal(&self, mode: usize) -> Result<(f64, f64)> {
        if mode >= self.n_modes() {
            return Err(Error::Modes(format!("mode {mode} out of range")));
        }
        Ok((self.mean[mode], self.cov[(mode, mode)]))
    }
}

/// Coherent state of `mode` centered at `(x, p)` with the ground-state widths
/// of an oscillator of mass `width_mass` and frequency `width_freq`; other
/// modes in the unit vacuum.
pub fn coherent_state(
    n: usize,
    mode: usize,
    x: f64,
    p: f64,
    width_mass: f64,
    width_freq: f64,
) -> Result<GaussianState> {
    if mode >= n {
        return Err(Error::Modes(format!("mode {mode} out of range for {n} modes")));
    }
    if !(width_mass > 0.0 && width_freq > 0.0) {
        return Err(Error::domain("width", "mass and frequency must be positive"));
    }
    let mut state = GaussianState::vacuum(n);
    state.mean[mode] = x;
    state.mean[n + mode] = p;
    let mw = width_mass * width_freq;
    state.cov[(mode, mode)] = 0.5 / mw;
    state.cov[(n + mode, n + mode)] = 0.5 * mw;
    Ok(state)
}

/// Product of thermal states of oscillators `(mass, frequency)` at temperature `temperature`.
pub fn thermal_state(modes: &[(f64, f64)], temperature: f64) -> Result<GaussianState> {
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(Error::domain("temperature", format!("must be non-negative, got {temperature}")));
    }
    if modes.is_empty() {
        return Err(Error::Modes("no modes".into()));
    }
    let n = modes.len();
    let mut state = GaussianState::vacuum(n);
    for (i, &(m, w)) in modes.iter().enumerate() {
        if !(m > 0.0 && w > 0.0) {
            return Err(Error::domain("modes", "mass and frequency must be positive"));
        }
        let occupation = if temperature == 0.0 {
            1.0
        } else {
            1.0 / (w / (2.0 * temperature)).tanh()
        };
        state.cov[(i, i)] = occupation / (2.0 * m * w);
        state.cov[(n + i, n + i)] = occupation * m * w / 2.0;
    }
    Ok(state)
}

/// Pure state on `2n` modes whose first `n` modes reproduce `state`.
///
/// Each Williamson mode with symplectic eigenvalue `ν` is paired with an
/// ancilla in a two-mode squeezed state with `cosh 2r = 2ν`.
pub fn purify(state: &GaussianState) -> Result<GaussianState> {
    let n = state.n_modes();
    let (s, nus) = williamson(&state.cov)?;
    let total = 2 * n;
    let mut cov = DMatrix::zeros(2 * total, 2 * total);
    for (k, &nu) in nus.iter().enumerate() {
        // √ turns roundoff above ½ into spurious correlations
        let nu = if nu - 0.5 < 1e-12 { 0.5 } else { nu };
        let c = ((nu - 0.5) * (nu + 0.5)).sqrt();
        let (xs, xa, ps, pa) = (k, n + k, total + k, total + n + k);
        cov[(xs, xs)] = nu;
        cov[(xa, xa)] = nu;
        cov[(ps, ps)] = nu;
        cov[(pa, pa)] = nu;
        cov[(xs, xa)] = c;
        cov[(xa, xs)] = c;
        cov[(ps, pa)] = -c;
        cov[(pa, ps)] = -c;
    }
    let sys: Vec<usize> = (0..n).collect();
    let lift = crate::linalg::embed_symplectic(&s, &sys, total);
    let mut cov = &lift * cov * lift.transpose();
    symmetrize(&mut cov);
    let mut mean = DVector::zeros(2 * total);
    for i in 0..n {
        mean[i] = state.mean[i];
        mean[total + i] = state.mean[n + i];
    }
    Ok(GaussianState { mean, cov })
}

/// `S(t) = exp(Ω K t)` by scaling-and-squaring Padé.
pub fn propagator(h: &QuadraticHamiltonian, t: f64) -> Result<DMatrix<f64>> {
    let generator = symplectic_form(h.n_modes()) * h.matrix() * t;
    expm(&generator)
}

/// `S(t)` from the symplectic normal form of `K` (`K` must be positive definite).
///
/// With `K = W D Wᵀ`, each normal mode rotates at its own frequency and
/// `S(t) = W⁻ᵀ R(t) Wᵀ`.
pub fn propagator_normal_modes(h: &QuadraticHamiltonian, t: f64) -> Result<DMatrix<f64>> {
    let n = h.n_modes();
    let (w, freqs) = williamson(h.matrix())?;
    let omega = symplectic_form(n);
    let w_inv_t = &omega * &w * omega.transpose();
    let mut rot = DMatrix::zeros(2 * n, 2 * n);
    for (k, f) in freqs.iter().enumerate() {
        let (s, c) = (f * t).sin_cos();
        rot[(k, k)] = c;
        rot[(n + k, n + k)] = c;
        rot[(k, n + k)] = s;
        rot[(n + k, k)] = -s;
    }
    Ok(w_inv_t * rot * w.transpose())
}

/// Anything transformed by a phase-space symplectic matrix.
pub trait Evolve: Sized {
    fn evolve(&self, s: &DMatrix<f64>) -> Result<Self>;
}

impl Evolve for GaussianState {
    fn evolve(&self, s: &DMatrix<f64>) -> Result<Self> {
        check_dim(self.mean.len(), s.nrows())?;
        check_dim(self.mean.len(), s.ncols())?;
        let mut cov = s * &self.cov * s.transpose();
        symmetrize(&mut cov);
        Ok(GaussianState {
            mean: s * &self.mean,
            cov,
        })
    }
}

pub fn evolve<T: Evolve>(state: &T, s: &DMatrix<f64>) -> Result<T> {
    state.evolve(s)
}

fn check_modes_list(modes: &[usize], n: usize) -> Result<()> {
    if modes.is_empty() {
        return Err(Error::Modes("empty mode set".into()));
    }
    let mut seen = vec![false; n];
    for &m in modes {
        if m >= n {
            return Err(Error::Modes(format!("mode {m} out of range for {n} modes")));
        }
        if std::mem::replace(&mut seen[m], true) {
            return Err(Error::Modes(format!("mode {m} listed twice")));
        }
    }
    Ok(())
}

pub fn complement(modes: &[usize], n: usize) -> Vec<usize> {
    (0..n).filter(|i| !modes.contains(i)).collect()
}

/// Partial trace: keeps the moments of `keep`, in the order given.
pub fn reduce(state: &GaussianState, keep: &[usize]) -> Result<GaussianState> {
    let n = state.n_modes();
    check_modes_list(keep, n)?;
    let idx = phase_indices(keep, n);
    Ok(GaussianState {
        mean: select_vec(&state.mean, &idx),
        cov: select(&state.cov, &idx, &idx),
    })
}

fn checked_det(cov: &DMatrix<f64>) -> Result<f64> {
    let det = cov
        .clone()
        .cholesky()
        .map(|c| c.l().diagonal().iter().map(|d| d * d).product::<f64>())
        .ok_or_else(|| Error::Conditioning("covariance is not positive definite".into()))?;
    if !(det >= DET_FLOOR) || !det.is_finite() {
        return Err(Error::Conditioning(format!("covariance determinant {det:.3e} out of range")));
    }
    Ok(det)
}

/// `μ = 1 / (2ⁿ √det σ)`.
pub fn purity(state: &GaussianState) -> Result<f64> {
    let det = checked_det(&state.cov)?;
    let n = state.n_modes() as i32;
    Ok(1.0 / (2f64.powi(n) * det.sqrt()))
}

/// Logarithmic negativity (base 2) across `party_a | rest`.
pub fn log_negativity(state: &GaussianState, party_a: &[usize]) -> Result<f64> {
    let n = state.n_modes();
    check_modes_list(party_a, n)?;
    if party_a.len() == n {
        return Err(Error::Modes("party A must be a proper subset".into()));
    }
    let mut flipped = state.cov.clone();
    for &a in party_a {
        let p = n + a;
        for j in 0..2 * n {
            flipped[(p, j)] = -flipped[(p, j)];
        }
        for i in 0..2 * n {
            flipped[(i, p)] = -flipped[(i, p)];
        }
    }
    let nus = symplectic_eigenvalues(&flipped)?;
    Ok(nus
        .iter()
        .map(|nu| (-(2.0 * nu).log2()).max(0.0))
        .sum())
}

fn require_pure(state: &GaussianState, what: &str) -> Result<()> {
    if state.is_pure() {
        Ok(())
    } else {
        Err(Error::State(format!("{what} must be a pure state")))
    }
}

/// `⟨a|b⟩` for pure Gaussian states.
///
/// The magnitude follows from `|⟨a|b⟩|² = exp(−½ δᵀ(σa+σb)⁻¹δ) / √det(σa+σb)`
/// with `δ = m_b − m_a`. The phase is `½ m_aᵀ Ω m_b`, the phase picked up by
/// displacement operators when both states are displaced copies of one
/// reference state; for unequal covariances it is a convention.
pub fn overlap(a: &GaussianState, b: &GaussianState) -> Result<Complex64> {
    check_dim(a.mean.len(), b.mean.len())?;
    require_pure(a, "overlap argument")?;
    require_pure(b, "overlap argument")?;
    Ok(overlap_unchecked(a, b))
}

fn overlap_unchecked(a: &GaussianState, b: &GaussianState) -> Complex64 {
    let sum = &a.cov + &b.cov;
    let delta = &b.mean - &a.mean;
    let chol = sum.clone().cholesky().expect("sum of covariances is positive definite");
    let det: f64 = chol.l().diagonal().iter().map(|d| d * d).product();
    let quad = delta.dot(&chol.solve(&delta));
    let magnitude = ((-0.5 * quad).exp() / det.sqrt()).sqrt();
    let omega = symplectic_form(a.n_modes());
    let phase = 0.5 * a.mean.dot(&(omega * &b.mean));
    Complex64::from_polar(magnitude, phase)
}

/// Pure Gaussian branches `Σ c_k |m_k; σ⟩` sharing one covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct CatState {
    branches: Vec<(Complex64, DVector<f64>)>,
    cov: DMatrix<f64>,
}

impl CatState {
    /// Validates the branches and rescales the amplitudes to unit norm.
    pub fn normalized(branches: Vec<(Complex64, DVector<f64>)>, cov: DMatrix<f64>) -> Result<Self> {
        let cat = Self::build(branches, cov)?;
        let norm = cat.norm_squared();
        if !(norm > 0.0) {
            return Err(Error::State("branches cancel to the zero vector".into()));
        }
        let scale = norm.sqrt().recip();
        let branches = cat
            .branches
            .into_iter()
            .map(|(c, m)| (c * scale, m))
            .collect();
        Ok(Self {
            branches,
            cov: cat.cov,
        })
    }

    /// Like [`CatState::normalized`] but requires the amplitudes to be normalized already.
    pub fn new(branches: Vec<(Complex64, DVector<f64>)>, cov: DMatrix<f64>) -> Result<Self> {
        let cat = Self::build(branches, cov)?;
        let norm = cat.norm_squared();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::State(format!("cat state norm is {norm}, expected 1")));
        }
        Ok(cat)
    }

    fn build(branches: Vec<(Complex64, DVector<f64>)>, cov: DMatrix<f64>) -> Result<Self> {
        if branches.len() < 2 {
            return Err(Error::State("a cat state needs at least two branches".into()));
        }
        let base = GaussianState::new(branches[0].1.clone(), cov)?;
        require_pure(&base, "shared branch covariance")?;
        for (_, m) in &branches {
            check_dim(base.mean.len(), m.len())?;
        }
        Ok(Self {
            branches,
            cov: base.cov,
        })
    }

    /// Equal-weight two-branch superposition of `base` displaced by `±offset / 2`.
    pub fn two_branch(base: &GaussianState, offset: &DVector<f64>) -> Result<Self> {
        let half = offset * 0.5;
        Self::normalized(
            vec![
                (Complex64::new(1.0, 0.0), &base.mean + &half),
                (Complex64::new(1.0, 0.0), &base.mean - &half),
            ],
            base.cov.clone(),
        )
    }

    pub fn branches(&self) -> &[(Complex64, DVector<f64>)] {
        &self.branches
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn n_modes(&self) -> usize {
        self.cov.nrows() / 2
    }

    pub fn branch_state(&self, k: usize) -> GaussianState {
        GaussianState::from_parts_unchecked(self.branches[k].1.clone(), self.cov.clone())
    }

    pub fn norm_squared(&self) -> f64 {
        let states: Vec<GaussianState> = (0..self.branches.len()).map(|k| self.branch_state(k)).collect();
        let mut total = Complex64::new(0.0, 0.0);
        for (j, (cj, _)) in self.branches.iter().enumerate() {
            for (k, (ck, _)) in self.branches.iter().enumerate() {
                total += cj.conj() * ck * overlap_unchecked(&states[j], &states[k]);
            }
        }
        total.re
    }
}

impl Evolve for CatState {
    fn evolve(&self, s: &DMatrix<f64>) -> Result<Self> {
        check_dim(self.cov.nrows(), s.nrows())?;
        check_dim(self.cov.nrows(), s.ncols())?;
        let mut cov = s * &self.cov * s.transpose();
        symmetrize(&mut cov);
        Ok(Self {
            branches: self.branches.iter().map(|(c, m)| (*c, s * m)).collect(),
            cov,
        })
    }
}

/// Environment-induced suppression of the interference between two branches.
///
/// The system (complement of `env`) coherence operator `tr_E |ψ₁⟩⟨ψ₂|` has
/// characteristic function `χ(ξ)`; this returns `max_ξ |χ(ξ)|`. For branches
/// of product form `|φ_k⟩|ε_k⟩` this is exactly `|⟨ε₁|ε₂⟩|`. With `Q = ΩσΩᵀ`
/// and `δ` the branch mean difference, the maximum is
/// `exp(−½ δ_Eᵀ [(Q⁻¹)_EE]⁻¹ δ_E)`.
pub fn decoherence_factor(cat: &CatState, env: &[usize]) -> Result<f64> {
    if cat.branches.len() != 2 {
        return Err(Error::State(format!(
            "decoherence factor needs exactly two branches, got {}",
            cat.branches.len()
        )));
    }
    let n = cat.n_modes();
    check_modes_list(env, n)?;
    let base = cat.branch_state(0);
    require_pure(&base, "global state")?;
    let chol = cat
        .cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Conditioning("branch covariance is singular".into()))?;
    let omega = symplectic_form(n);
    let q_inv = &omega * chol.inverse() * omega.transpose();
    let idx = phase_indices(env, n);
    let z = select(&q_inv, &idx, &idx);
    let delta = &cat.branches[0].1 - &cat.branches[1].1;
    let delta_e = select_vec(&delta, &idx);
    let z_chol = z
        .cholesky()
        .ok_or_else(|| Error::Conditioning("environment block is singular".into()))?;
    let quad = delta_e.dot(&z_chol.solve(&delta_e));
    Ok((-0.5 * quad).exp())
}

/// State of `rest` after projecting `modes` onto the pure Gaussian `outcome`.
///
/// Returns the normalized conditional state of the complementary modes (in
/// ascending order): `σ' = σ_BB − σ_BA (σ_AA + σ_o)⁻¹ σ_AB`,
/// `m' = m_B + σ_BA (σ_AA + σ_o)⁻¹ (m_o − m_A)`.
pub fn condition_on(
    state: &GaussianState,
    modes: &[usize],
    outcome: &GaussianState,
) -> Result<GaussianState> {
    let n = state.n_modes();
    check_modes_list(modes, n)?;
    check_dim(modes.len(), outcome.n_modes())?;
    let rest = complement(modes, n);
    if rest.is_empty() {
        return Err(Error::Modes("nothing left after conditioning".into()));
    }
    let a = phase_indices(modes, n);
    let b = phase_indices(&rest, n);
    let sum = select(&state.cov, &a, &a) + &outcome.cov;
    let chol = sum
        .cholesky()
        .ok_or_else(|| Error::Conditioning("singular conditioning block".into()))?;
    let s_ba = select(&state.cov, &b, &a);
    let gain = chol.solve(&s_ba.transpose()).transpose();
    let mut cov = select(&state.cov, &b, &b) - &gain * s_ba.transpose();
    symmetrize(&mut cov);
    let mean = select_vec(&state.mean, &b) + &gain * (&outcome.mean - select_vec(&state.mean, &a));
    Ok(GaussianState { mean, cov })
}

/// Inserts `inner` (on `inner_modes`) and `outer` (the remaining modes, ascending)
/// into one state on `inner_modes.len() + outer.n_modes()` modes. Assumes a product.
pub fn assemble_product(
    inner: &GaussianState,
    inner_modes: &[usize],
    outer: &GaussianState,
) -> Result<GaussianState> {
    let n = inner.n_modes() + outer.n_modes();
    check_modes_list(inner_modes, n)?;
    check_dim(inner.n_modes(), inner_modes.len())?;
    let rest = complement(inner_modes, n);
    let mut mean = DVector::zeros(2 * n);
    let mut cov = DMatrix::zeros(2 * n, 2 * n);
    for (src, modes) in [(inner, inner_modes.to_vec()), (outer, rest)] {
        let idx = phase_indices(&modes, n);
        for (a, &i) in idx.iter().enumerate() {
            mean[i] = src.mean[a];
            for (b, &j) in idx.iter().enumerate() {
                cov[(i, j)] = src.cov[(a, b)];
            }
        }
    }
    Ok(GaussianState { mean, cov })
}
