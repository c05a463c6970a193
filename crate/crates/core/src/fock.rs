//! Brute-force truncated Fock-space model used to cross-check the Gaussian
//! machinery on small instances.
//!
//! Each mode `i` has a number basis `|0⟩..|c_i − 1⟩` with ladder operators
//! defined against a reference length `ℓ_i`: `x = ℓ(a + a†)/√2`,
//! `p = i(a† − a)/(√2 ℓ)`. Basis index `Σ n_i stride_i` puts mode 0 most
//! significant. Nothing here depends on the phase-space code paths.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::model::{ModelParams, Potential};

type C64 = Complex<f64>;

pub const DEFAULT_DIM_CAP: usize = 20_000;
/// Largest tolerated norm lost to truncation when importing a Gaussian state.
pub const TRUNCATION_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FockSpace {
    cutoffs: Vec<usize>,
    lengths: Vec<f64>,
    strides: Vec<usize>,
    dim: usize,
}

impl FockSpace {
    /// `cutoffs[i]` basis states for mode `i`, reference length `lengths[i]`.
    pub fn new(cutoffs: Vec<usize>, lengths: Vec<f64>) -> Result<Self> {
        Self::with_cap(cutoffs, lengths, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(cutoffs: Vec<usize>, lengths: Vec<f64>, cap: usize) -> Result<Self> {
        if cutoffs.is_empty() || cutoffs.len() != lengths.len() {
            return Err(Error::Dimension {
                expected: cutoffs.len().max(1),
                found: lengths.len(),
            });
        }
        if cutoffs.iter().any(|&c| c == 0) {
            return Err(Error::domain("cutoff", "every mode needs at least one level"));
        }
        if lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::domain("length", "reference lengths must be positive"));
        }
        let dim = cutoffs
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c))
            .unwrap_or(usize::MAX);
        if dim > cap {
            return Err(Error::FockCap { dim, cap });
        }
        let mut strides = vec![1; cutoffs.len()];
        for i in (0..cutoffs.len() - 1).rev() {
            strides[i] = strides[i + 1] * cutoffs[i + 1];
        }
        Ok(Self {
            cutoffs,
            lengths,
            strides,
            dim,
        })
    }

    /// Basis matched to oscillators `(mass, frequency)`: `ℓ = 1/√(mω)`.
    pub fn for_oscillators(cutoffs: Vec<usize>, oscillators: &[(f64, f64)]) -> Result<Self> {
        let lengths = oscillators.iter().map(|(m, w)| 1.0 / (m * w).sqrt()).collect();
        Self::new(cutoffs, lengths)
    }

    pub fn n_modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Same lengths, every cutoff raised by `extra`.
    pub fn enlarged(&self, extra: usize) -> Result<Self> {
        Self::new(
            self.cutoffs.iter().map(|c| c + extra).collect(),
            self.lengths.clone(),
        )
    }

    fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % self.cutoffs[mode]
    }

    fn occupations(&self, mut index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.n_modes()];
        for i in 0..self.n_modes() {
            occ[i] = index / self.strides[i];
            index %= self.strides[i];
        }
        occ
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    amplitudes: DVector<C64>,
}

impl FockState {
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm_squared();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::State(format!("Fock state norm is {norm}, expected 1")));
        }
        Ok(Self { amplitudes })
    }

    pub fn basis(space: &FockSpace, occupations: &[usize]) -> Result<Self> {
        if occupations.len() != space.n_modes() {
            return Err(Error::Dimension {
                expected: space.n_modes(),
                found: occupations.len(),
            });
        }
        let mut index = 0;
        for (i, &n) in occupations.iter().enumerate() {
            if n >= space.cutoffs[i] {
                return Err(Error::Modes(format!("occupation {n} exceeds cutoff of mode {i}")));
            }
            index += n * space.strides[i];
        }
        let mut amplitudes = DVector::zeros(space.dim);
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &FockState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }
}

fn ladder(c: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(c, c);
    for n in 1..c {
        a[(n - 1, n)] = (n as f64).sqrt();
    }
    a
}

/// Exact single-mode matrix elements of `a²` (upper) restricted to the cutoff.
fn ladder_sq(c: usize) -> DMatrix<f64> {
    let mut a2 = DMatrix::zeros(c, c);
    for n in 2..c {
        a2[(n - 2, n)] = ((n * (n - 1)) as f64).sqrt();
    }
    a2
}

fn number(c: usize) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_fn(c, |n, _| n as f64))
}

/// Single-mode operators with exact truncated matrix elements.
struct ModeOps {
    x: DMatrix<f64>,
    /// `−i p`, real
    p_imag: DMatrix<f64>,
    x2: DMatrix<f64>,
    p2: DMatrix<f64>,
    /// `−i · ½{x, p}`, real
    xp_sym_imag: DMatrix<f64>,
}

impl ModeOps {
    fn new(c: usize, len: f64) -> Self {
        let a = ladder(c);
        let ad = a.transpose();
        let a2 = ladder_sq(c);
        let ad2 = a2.transpose();
        let ident = DMatrix::<f64>::identity(c, c);
        let num = number(c);
        let s2 = std::f64::consts::SQRT_2;
        Self {
            x: (&a + &ad) * (len / s2),
            p_imag: (&ad - &a) / (s2 * len),
            x2: (&a2 + &ad2 + &num * 2.0 + &ident) * (len * len / 2.0),
            p2: (&num * 2.0 + &ident - &a2 - &ad2) / (2.0 * len * len),
            xp_sym_imag: (&ad2 - &a2) * 0.5,
        }
    }
}

/// Dense Hermitian (here real symmetric) Hamiltonian on a Fock space.
#[derive(Debug, Clone)]
pub struct FockHamiltonian {
    space: FockSpace,
    matrix: DMatrix<f64>,
}

impl FockHamiltonian {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn diagonalize(&self) -> SpectralPropagator {
        let eig = SymmetricEigen::new(self.matrix.clone());
        SpectralPropagator {
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
        }
    }
}

fn add_local(h: &mut DMatrix<f64>, space: &FockSpace, mode: usize, op: &DMatrix<f64>, coeff: f64) {
    let stride = space.strides[mode] as isize;
    for i in 0..space.dim {
        let n = space.occupation(i, mode);
        for m in 0..space.cutoffs[mode] {
            let v = op[(n, m)];
            if v != 0.0 {
                let j = (i as isize + (m as isize - n as isize) * stride) as usize;
                h[(i, j)] += coeff * v;
            }
        }
    }
}

fn add_pair(
    h: &mut DMatrix<f64>,
    space: &FockSpace,
    (ma, op_a): (usize, &DMatrix<f64>),
    (mb, op_b): (usize, &DMatrix<f64>),
    coeff: f64,
) {
    let (sa, sb) = (space.strides[ma] as isize, space.strides[mb] as isize);
    for i in 0..space.dim {
        let na = space.occupation(i, ma);
        let nb = space.occupation(i, mb);
        for ka in 0..space.cutoffs[ma] {
            let va = op_a[(na, ka)];
            if va == 0.0 {
                continue;
            }
            for kb in 0..space.cutoffs[mb] {
                let vb = op_b[(nb, kb)];
                if vb != 0.0 {
                    let j = (i as isize
                        + (ka as isize - na as isize) * sa
                        + (kb as isize - nb as isize) * sb) as usize;
                    h[(i, j)] += coeff * va * vb;
                }
            }
        }
    }
}

/// The particle + bath Hamiltonian assembled term by term from ladder operators.
pub fn build_fock_hamiltonian(params: &ModelParams, space: &FockSpace) -> Result<FockHamiltonian> {
    params.validate()?;
    let n = params.n_bath() + 1;
    if space.n_modes() != n {
        return Err(Error::Dimension {
            expected: n,
            found: space.n_modes(),
        });
    }
    let ops: Vec<ModeOps> = (0..n)
        .map(|i| ModeOps::new(space.cutoffs[i], space.lengths[i]))
        .collect();
    let mut h = DMatrix::zeros(space.dim, space.dim);
    add_local(&mut h, space, 0, &ops[0].p2, 0.5 / params.m1);
    if let Potential::Harmonic { omega } = params.potential {
        add_local(&mut h, space, 0, &ops[0].x2, 0.5 * params.m1 * omega * omega);
    }
    let sign = params.coupling_sign.factor();
    for (k, mode) in params.bath.iter().enumerate() {
        let i = k + 1;
        add_local(&mut h, space, i, &ops[i].p2, 0.5 / mode.mass);
        add_local(&mut h, space, i, &ops[i].x2, 0.5 * mode.mass * mode.omega * mode.omega);
        if mode.coupling != 0.0 {
            add_pair(&mut h, space, (0, &ops[0].x), (i, &ops[i].x), sign * mode.coupling);
        }
    }
    // exact symmetry: every term above is a real symmetric operator
    let sym = (&h + h.transpose()) * 0.5;
    Ok(FockHamiltonian {
        space: space.clone(),
        matrix: sym,
    })
}

/// `exp(−iHt)` through the full eigendecomposition of `H`.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl SpectralPropagator {
    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }
}

pub fn evolve_dense(psi: &FockState, prop: &SpectralPropagator, t: f64) -> Result<FockState> {
    let dim = prop.vectors.nrows();
    if psi.amplitudes.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            found: psi.amplitudes.len(),
        });
    }
    let re = psi.amplitudes.map(|c| c.re);
    let im = psi.amplitudes.map(|c| c.im);
    let vt = prop.vectors.transpose();
    let (cr, ci) = (&vt * re, &vt * im);
    let mut rotated_re = DVector::zeros(dim);
    let mut rotated_im = DVector::zeros(dim);
    for k in 0..dim {
        let (s, c) = (-prop.energies[k] * t).sin_cos();
        rotated_re[k] = c * cr[k] - s * ci[k];
        rotated_im[k] = s * cr[k] + c * ci[k];
    }
    let out_re = &prop.vectors * rotated_re;
    let out_im = &prop.vectors * rotated_im;
    Ok(FockState {
        amplitudes: DVector::from_fn(dim, |i, _| C64::new(out_re[i], out_im[i])),
    })
}

fn check_modes(space: &FockSpace, modes: &[usize]) -> Result<()> {
    if modes.is_empty() {
        return Err(Error::Modes("empty mode set".into()));
    }
    for (k, &m) in modes.iter().enumerate() {
        if m >= space.n_modes() {
            return Err(Error::Modes(format!("mode {m} out of range")));
        }
        if modes[..k].contains(&m) {
            return Err(Error::Modes(format!("mode {m} listed twice")));
        }
    }
    Ok(())
}

/// Rearranges amplitudes into a `dim(keep) × dim(rest)` matrix.
fn split_matrix(psi: &FockState, space: &FockSpace, keep: &[usize]) -> DMatrix<C64> {
    let rest: Vec<usize> = (0..space.n_modes()).filter(|m| !keep.contains(m)).collect();
    let dk: usize = keep.iter().map(|&m| space.cutoffs[m]).product();
    let dr: usize = rest.iter().map(|&m| space.cutoffs[m]).product();
    let mut out = DMatrix::zeros(dk, dr);
    for i in 0..space.dim {
        let occ = space.occupations(i);
        let row = keep.iter().fold(0, |acc, &m| acc * space.cutoffs[m] + occ[m]);
        let col = rest.iter().fold(0, |acc, &m| acc * space.cutoffs[m] + occ[m]);
        out[(row, col)] = psi.amplitudes[i];
    }
    out
}

/// Reduced density matrix of `keep` (row index ordered as in `keep`).
pub fn reduced_density(psi: &FockState, space: &FockSpace, keep: &[usize]) -> Result<DMatrix<C64>> {
    check_modes(space, keep)?;
    if psi.amplitudes.len() != space.dim {
        return Err(Error::Dimension {
            expected: space.dim,
            found: psi.amplitudes.len(),
        });
    }
    let m = split_matrix(psi, space, keep);
    let rho = &m * m.adjoint();
    Ok((&rho + rho.adjoint()) * C64::new(0.5, 0.0))
}

pub fn density_purity(rho: &DMatrix<C64>) -> f64 {
    rho.iter().map(|c| c.norm_sqr()).sum()
}

/// Logarithmic negativity of a pure state across `keep | rest`, from its Schmidt spectrum.
pub fn pure_state_log_negativity(psi: &FockState, space: &FockSpace, keep: &[usize]) -> Result<f64> {
    let rho = reduced_density(psi, space, keep)?;
    let eig = SymmetricEigen::new(rho);
    let sum_sqrt: f64 = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum();
    Ok(2.0 * sum_sqrt.log2())
}

/// Logarithmic negativity of a density matrix on modes with `cutoffs`,
/// partially transposing the modes in `party_a`.
pub fn density_log_negativity(rho: &DMatrix<C64>, cutoffs: &[usize], party_a: &[usize]) -> Result<f64> {
    let dim: usize = cutoffs.iter().product();
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::Dimension {
            expected: dim,
            found: rho.nrows(),
        });
    }
    let space = FockSpace::with_cap(cutoffs.to_vec(), vec![1.0; cutoffs.len()], usize::MAX)?;
    check_modes(&space, party_a)?;
    let mut pt = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let oi = space.occupations(i);
        for j in 0..dim {
            let oj = space.occupations(j);
            let (mut a, mut b) = (oi.clone(), oj.clone());
            for &m in party_a {
                std::mem::swap(&mut a[m], &mut b[m]);
            }
            let ia: usize = a.iter().zip(&space.strides).map(|(n, s)| n * s).sum();
            let ib: usize = b.iter().zip(&space.strides).map(|(n, s)| n * s).sum();
            pt[(ia, ib)] = rho[(i, j)];
        }
    }
    let trace_norm: f64 = SymmetricEigen::new(pt).eigenvalues.iter().map(|l| l.abs()).sum();
    Ok(trace_norm.log2())
}

fn apply_local(psi: &DVector<C64>, space: &FockSpace, mode: usize, op: &DMatrix<C64>) -> DVector<C64> {
    let stride = space.strides[mode] as isize;
    let mut out = DVector::zeros(psi.len());
    for i in 0..space.dim {
        let n = space.occupation(i, mode);
        for m in 0..space.cutoffs[mode] {
            let v = op[(n, m)];
            if v != C64::new(0.0, 0.0) {
                let j = (i as isize + (m as isize - n as isize) * stride) as usize;
                out[i] += v * psi[j];
            }
        }
    }
    out
}

/// First and second moments `(mean, σ)` of the listed modes in the
/// `(x.., p..)` ordering, with `σ = ½⟨{Δz, Δz}⟩`.
pub fn moments(psi: &FockState, space: &FockSpace, modes: &[usize]) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_modes(space, modes)?;
    let k = modes.len();
    let i_unit = C64::new(0.0, 1.0);
    let ops: Vec<ModeOps> = modes
        .iter()
        .map(|&m| ModeOps::new(space.cutoffs[m], space.lengths[m]))
        .collect();
    let real = |m: &DMatrix<f64>| m.map(|v| C64::new(v, 0.0));
    let imag = |m: &DMatrix<f64>| m.map(|v| i_unit * v);
    let psi_v = &psi.amplitudes;
    let expect = |v: &DVector<C64>| psi_v.dotc(v).re;
    // z_a ψ for every quadrature
    let mut applied: Vec<DVector<C64>> = Vec::with_capacity(2 * k);
    for (a, &m) in modes.iter().enumerate() {
        applied.push(apply_local(psi_v, space, m, &real(&ops[a].x)));
    }
    for (a, &m) in modes.iter().enumerate() {
        applied.push(apply_local(psi_v, space, m, &imag(&ops[a].p_imag)));
    }
    let mean = DVector::from_fn(2 * k, |r, _| expect(&applied[r]));
    let mut second = DMatrix::zeros(2 * k, 2 * k);
    for r in 0..2 * k {
        for c in r..2 * k {
            let (ma, mb) = (r % k, c % k);
            let value = if ma == mb {
                let o = &ops[ma];
                let op = match (r < k, c < k) {
                    (true, true) => real(&o.x2),
                    (false, false) => real(&o.p2),
                    _ => imag(&o.xp_sym_imag),
                };
                expect(&apply_local(psi_v, space, modes[ma], &op))
            } else {
                applied[r].dotc(&applied[c]).re
            };
            second[(r, c)] = value;
            second[(c, r)] = value;
        }
    }
    let cov = second - &mean * mean.transpose();
    Ok((mean, cov))
}

/// Number-basis amplitudes of a pure Gaussian state, up to a global phase.
///
/// The state is written as `C exp(½ a†ᵀ B a† + γᵀ a†)|0⟩` and the amplitudes
/// follow from the ladder recursion
/// `ψ(n + e_k) = (γ_k ψ(n) + Σ_j B_kj √n_j ψ(n − e_j)) / √(n_k + 1)`.
pub fn gaussian_to_fock(state: &GaussianState, space: &FockSpace) -> Result<FockState> {
    let n = space.n_modes();
    if state.n_modes() != n {
        return Err(Error::Dimension {
            expected: n,
            found: state.n_modes(),
        });
    }
    if !state.is_pure() {
        return Err(Error::State("only pure Gaussian states have a Fock expansion here".into()));
    }
    let len = &space.lengths;
    let mean = state.mean();
    let cov = state.cov();
    // dimensionless quadratures y = x/ℓ, q = pℓ
    let y_bar = DVector::from_fn(n, |i, _| mean[i] / len[i]);
    let q_bar = DVector::from_fn(n, |i, _| mean[n + i] * len[i]);
    let sxx = DMatrix::from_fn(n, n, |i, j| cov[(i, j)] / (len[i] * len[j]));
    let sxp = DMatrix::from_fn(n, n, |i, j| cov[(i, n + j)] * len[j] / len[i]);
    let sxx_inv = sxx
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Conditioning("singular position covariance".into()))?;
    // ψ(y) ∝ exp(−½ (y−ȳ)ᵀ Γ (y−ȳ) + i q̄ᵀ y)
    let gamma_re = &sxx_inv * 0.5;
    let gamma_im = -(&sxx_inv * &sxp);
    let gamma = DMatrix::from_fn(n, n, |i, j| {
        C64::new(
            0.5 * (gamma_re[(i, j)] + gamma_re[(j, i)]),
            0.5 * (gamma_im[(i, j)] + gamma_im[(j, i)]),
        )
    });
    let ident = DMatrix::<C64>::identity(n, n);
    let plus = &ident + &gamma;
    let plus_inv = plus
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Conditioning("singular Gaussian form".into()))?;
    let b = (&ident - &gamma) * &plus_inv;
    let y_c = y_bar.map(|v| C64::new(v, 0.0));
    let drive = &gamma * &y_c + q_bar.map(|v| C64::new(0.0, v));
    let g = (&ident + &b) * &drive / C64::new(std::f64::consts::SQRT_2, 0.0);

    // |⟨0|ψ⟩| from the Gaussian integral of φ₀(y) ψ(y); the π factors cancel
    let det_re = gamma_re.determinant();
    let det_plus = plus.determinant().norm();
    let exponent = (drive.transpose() * &plus_inv * &drive)[(0, 0)] * C64::new(0.5, 0.0)
        - (y_c.transpose() * &gamma * &y_c)[(0, 0)] * C64::new(0.5, 0.0);
    let vac_amp = det_re.sqrt().sqrt() * (2.0f64.powi(n as i32)).sqrt() / det_plus.sqrt()
        * exponent.re.exp();

    let mut amps = DVector::<C64>::zeros(space.dim);
    amps[0] = C64::new(1.0, 0.0);
    for idx in 1..space.dim {
        let occ = space.occupations(idx);
        let k = occ.iter().position(|&o| o > 0).expect("non-vacuum index");
        // idx = prev + e_k
        let prev = idx - space.strides[k];
        let mut value = g[k] * amps[prev];
        for j in 0..n {
            let nj = if j == k { occ[j] - 1 } else { occ[j] };
            if nj > 0 {
                value += b[(k, j)] * (nj as f64).sqrt() * amps[prev - space.strides[j]];
            }
        }
        amps[idx] = value / (occ[k] as f64).sqrt();
    }
    amps *= C64::new(vac_amp, 0.0);
    let norm = amps.norm_squared();
    let deficit = (1.0 - norm).abs();
    if !(deficit <= TRUNCATION_LIMIT) {
        return Err(Error::Truncation {
            deficit,
            limit: TRUNCATION_LIMIT,
        });
    }
    Ok(FockState { amplitudes: amps })
}

/// Exact number-basis matrix elements of the displacement `D(α)`.
pub fn displacement_matrix(c: usize, alpha: C64) -> DMatrix<C64> {
    let x = alpha.norm_sqr();
    let damp = (-0.5 * x).exp();
    let mut d = DMatrix::zeros(c, c);
    for m in 0..c {
        for n in 0..c {
            let (lo, hi) = (m.min(n), m.max(n));
            let order = (hi - lo) as f64;
            let lag = laguerre(lo, order, x);
            let ratio: f64 = ((lo + 1)..=hi).map(|k| (k as f64).sqrt().recip()).product();
            let power = if m >= n {
                alpha.powu((m - n) as u32)
            } else {
                (-alpha.conj()).powu((n - m) as u32)
            };
            d[(m, n)] = power * (ratio * damp * lag);
        }
    }
    d
}

fn laguerre(k: usize, a: f64, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 + a - x);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + a - x) * cur - (jf + a) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `max_ξ |Tr[tr_E(|ψ₁⟩⟨ψ₂|) D(ξ)]|` over displacements of `system`, found by
/// a Nelder–Mead search started at the difference of the branch means.
pub fn dense_decoherence_factor(
    psi1: &FockState,
    psi2: &FockState,
    space: &FockSpace,
    system: usize,
) -> Result<f64> {
    check_modes(space, &[system])?;
    let m1 = split_matrix(psi1, space, &[system]);
    let m2 = split_matrix(psi2, space, &[system]);
    let coherence = &m1 * m2.adjoint();
    let c = space.cutoffs[system];
    let len = space.lengths[system];
    let alpha_of = |psi: &FockState| -> Result<C64> {
        let (mean, _) = moments(psi, space, &[system])?;
        Ok(C64::new(mean[0] / len, mean[1] * len) / std::f64::consts::SQRT_2)
    };
    let start = alpha_of(psi2)? - alpha_of(psi1)?;
    let chi = |u: [f64; 2]| -> f64 {
        let d = displacement_matrix(c, C64::new(u[0], u[1]));
        let mut tr = C64::new(0.0, 0.0);
        for i in 0..c {
            for j in 0..c {
                tr += coherence[(i, j)] * d[(j, i)];
            }
        }
        tr.norm()
    };
    let best = nelder_mead_max(chi, [start.re, start.im], 0.05, 1e-13, 4000);
    Ok(best)
}

fn nelder_mead_max(f: impl Fn([f64; 2]) -> f64, start: [f64; 2], step: f64, tol: f64, max_iter: usize) -> f64 {
    let mut simplex = [
        start,
        [start[0] + step, start[1]],
        [start[0], start[1] + step],
    ];
    let mut values = simplex.map(|p| -f(p));
    for _ in 0..max_iter {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);
        let spread = (values[2] - values[0]).abs();
        let size = simplex
            .iter()
            .map(|p| (p[0] - simplex[0][0]).abs().max((p[1] - simplex[0][1]).abs()))
            .fold(0.0, f64::max);
        if spread < tol && size < 1e-9 {
            break;
        }
        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let along = |t: f64| {
            [
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ]
        };
        let reflected = along(-1.0);
        let fr = -f(reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = -f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = if fr < values[2] { along(-0.5) } else { along(0.5) };
            let fc = -f(contracted);
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = [
                        0.5 * (simplex[0][0] + simplex[i][0]),
                        0.5 * (simplex[0][1] + simplex[i][1]),
                    ];
                    values[i] = -f(simplex[i]);
                }
            }
        }
    }
    -values.iter().copied().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BathMode, CouplingSign};
    use approx::assert_relative_eq;

    fn harmonic_pair(kappa: f64) -> ModelParams {
        ModelParams {
            m1: 1.0,
            potential: Potential::Harmonic { omega: 1.0 },
            bath: vec![BathMode {
                mass: 1.0,
                omega: 1.0,
                coupling: kappa,
            }],
            coupling_sign: CouplingSign::Plus,
        }
    }

    fn coherent_amplitudes(c: usize, alpha: C64) -> DVector<C64> {
        let mut v = DVector::zeros(c);
        let mut fact = 1.0;
        for k in 0..c {
            if k > 0 {
                fact *= k as f64;
            }
            v[k] = alpha.powu(k as u32) * ((-0.5 * alpha.norm_sqr()).exp() / fact.sqrt());
        }
        v
    }

    #[test]
    fn single_oscillator_spectrum() {
        let space = FockSpace::new(vec![10], vec![1.0 / 1.5f64.sqrt()]).unwrap();
        let mut params = harmonic_pair(0.0);
        params.potential = Potential::Harmonic { omega: 1.5 };
        params.bath.clear();
        // single mode: build directly without a bath mode
        let ops = ModeOps::new(10, space.lengths[0]);
        let mut h = DMatrix::zeros(10, 10);
        add_local(&mut h, &space, 0, &ops.p2, 0.5);
        add_local(&mut h, &space, 0, &ops.x2, 0.5 * 1.5 * 1.5);
        let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (k, e) in ev.iter().take(9).enumerate() {
            assert_relative_eq!(*e, 1.5 * (k as f64 + 0.5), epsilon = 1e-8);
        }
    }

    #[test]
    fn uncoupled_spectrum_is_sum_of_oscillators() {
        let mut p = harmonic_pair(0.0);
        p.bath[0].omega = 1.7;
        let space = FockSpace::for_oscillators(vec![6, 6], &[(1.0, 1.0), (1.0, 1.7)]).unwrap();
        let h = build_fock_hamiltonian(&p, &space).unwrap();
        let mut ev: Vec<f64> = h.diagonalize().energies().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let mut expected: Vec<f64> = (0..6)
            .flat_map(|a| (0..6).map(move |b| a as f64 + 0.5 + 1.7 * (b as f64 + 0.5)))
            .collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&expected) {
            assert_relative_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn weak_coupling_ground_energy() {
        let kappa = 0.05;
        let space = FockSpace::for_oscillators(vec![12, 12], &[(1.0, 1.0), (1.0, 1.0)]).unwrap();
        let h = build_fock_hamiltonian(&harmonic_pair(kappa), &space).unwrap();
        let e0 = h.diagonalize().energies().min();
        // second order: E₀ ≈ 1 − κ²/(8 m² ω³)
        let shift = e0 - 1.0;
        assert_relative_eq!(shift, -kappa * kappa / 8.0, max_relative = 0.05);
        // exact: normal-mode frequencies √(1 ± κ)
        let exact = 0.5 * ((1.0 + kappa).sqrt() + (1.0 - kappa).sqrt());
        assert_relative_eq!(e0, exact, epsilon = 1e-10);
    }

    #[test]
    fn hamiltonian_is_symmetric_and_capped() {
        let space = FockSpace::for_oscillators(vec![5, 7], &[(1.0, 1.0), (2.0, 0.5)]).unwrap();
        let h = build_fock_hamiltonian(&harmonic_pair(0.3), &space).unwrap();
        assert!((h.matrix() - h.matrix().transpose()).amax() < 1e-12);
        assert!(matches!(
            FockSpace::new(vec![200, 200], vec![1.0, 1.0]),
            Err(Error::FockCap { .. })
        ));
        let wrong = FockSpace::new(vec![5], vec![1.0]).unwrap();
        assert!(build_fock_hamiltonian(&harmonic_pair(0.3), &wrong).is_err());
    }

    #[test]
    fn evolution_basics() {
        let space = FockSpace::for_oscillators(vec![8, 8], &[(1.0, 1.0), (1.0, 1.0)]).unwrap();
        let h = build_fock_hamiltonian(&harmonic_pair(0.2), &space).unwrap();
        let prop = h.diagonalize();
        let psi = FockState::basis(&space, &[1, 0]).unwrap();
        let same = evolve_dense(&psi, &prop, 0.0).unwrap();
        assert!((same.amplitudes() - psi.amplitudes()).camax() < 1e-12);
        let later = evolve_dense(&psi, &prop, 3.3).unwrap();
        assert_relative_eq!(later.norm(), 1.0, epsilon = 1e-10);
        // an eigenstate only picks up a phase
        let ground = DVector::from_fn(space.dim(), |i, _| C64::new(prop.vectors[(i, 0)], 0.0));
        let g = FockState::new(ground).unwrap();
        let g_t = evolve_dense(&g, &prop, 5.0).unwrap();
        for (a, b) in g.amplitudes().iter().zip(g_t.amplitudes().iter()) {
            assert!((a.norm() - b.norm()).abs() < 1e-10);
        }
        let small = FockState::basis(&FockSpace::new(vec![3], vec![1.0]).unwrap(), &[0]).unwrap();
        assert!(evolve_dense(&small, &prop, 1.0).is_err());
    }

    #[test]
    fn vacuum_and_coherent_import() {
        let space = FockSpace::new(vec![30], vec![1.0]).unwrap();
        let vac = gaussian_to_fock(&GaussianState::vacuum(1), &space).unwrap();
        assert!((vac.amplitudes()[0] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(vac.amplitudes().iter().skip(1).all(|a| a.norm() < 1e-14));
        // α = 1 ⇔ (x, p) = (√2, 0) for unit widths
        let coh = crate::gaussian::coherent_state(1, 0, 2f64.sqrt(), 0.0, 1.0, 1.0).unwrap();
        let psi = gaussian_to_fock(&coh, &space).unwrap();
        let expected = coherent_amplitudes(30, C64::new(1.0, 0.0));
        let phase = psi.amplitudes()[0] / expected[0];
        assert!((psi.amplitudes() - &expected * phase).camax() < 1e-12);
    }

    #[test]
    fn squeezed_vacuum_has_even_parity() {
        let r: f64 = 0.2;
        let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![
            0.5 * (-2.0 * r).exp(),
            0.5 * (2.0 * r).exp(),
        ]));
        let sq = GaussianState::new(DVector::zeros(2), cov).unwrap();
        let psi = gaussian_to_fock(&sq, &FockSpace::new(vec![40], vec![1.0]).unwrap()).unwrap();
        for (k, a) in psi.amplitudes().iter().enumerate() {
            if k % 2 == 1 {
                assert!(a.norm() < 1e-15);
            }
        }
        // ⟨0|S(r)|0⟩ = 1/√cosh r
        assert_relative_eq!(psi.amplitudes()[0].norm(), 1.0 / r.cosh().sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn truncation_loss_is_reported() {
        let far = crate::gaussian::coherent_state(1, 0, 6.0, 0.0, 1.0, 1.0).unwrap();
        let err = gaussian_to_fock(&far, &FockSpace::new(vec![10], vec![1.0]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
        let mixed = crate::gaussian::thermal_state(&[(1.0, 1.0)], 1.0).unwrap();
        assert!(gaussian_to_fock(&mixed, &FockSpace::new(vec![10], vec![1.0]).unwrap()).is_err());
    }

    #[test]
    fn reduced_density_product_and_entangled() {
        let space = FockSpace::new(vec![4, 4], vec![1.0, 1.0]).unwrap();
        let prod = FockState::basis(&space, &[2, 1]).unwrap();
        let rho = reduced_density(&prod, &space, &[0]).unwrap();
        assert_relative_eq!(density_purity(&rho), 1.0, epsilon = 1e-14);
        let eig = SymmetricEigen::new(rho.clone());
        assert_eq!(eig.eigenvalues.iter().filter(|l| l.abs() > 1e-12).count(), 1);
        // (|0,1⟩ + |1,0⟩)/√2
        let mut amps = DVector::zeros(16);
        amps[1] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[4] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let bell = FockState::new(amps).unwrap();
        let rho = reduced_density(&bell, &space, &[1]).unwrap();
        assert_relative_eq!(density_purity(&rho), 0.5, epsilon = 1e-14);
        assert_relative_eq!(rho.trace().re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(pure_state_log_negativity(&bell, &space, &[0]).unwrap(), 1.0, epsilon = 1e-12);
        assert!(reduced_density(&bell, &space, &[2]).is_err());
        assert!(reduced_density(&bell, &space, &[]).is_err());
    }

    #[test]
    fn displacement_matrix_properties() {
        let alpha = C64::new(0.7, -0.4);
        let d = displacement_matrix(40, alpha);
        let col0 = d.column(0).into_owned();
        assert!((col0 - coherent_amplitudes(40, alpha)).camax() < 1e-14);
        // D(α)† = D(−α)
        let dm = displacement_matrix(40, -alpha);
        assert!((d.adjoint().view((0, 0), (20, 20)) - dm.view((0, 0), (20, 20))).camax() < 1e-13);
    }

    #[test]
    fn moments_of_coherent_state() {
        let space = FockSpace::new(vec![30], vec![0.8]).unwrap();
        let coh = crate::gaussian::coherent_state(1, 0, 0.9, -0.6, 1.0 / 0.64, 1.0).unwrap();
        let psi = gaussian_to_fock(&coh, &space).unwrap();
        let (mean, cov) = moments(&psi, &space, &[0]).unwrap();
        assert!((mean - coh.mean()).amax() < 1e-10);
        assert!((cov - coh.cov()).amax() < 1e-10);
    }
}
