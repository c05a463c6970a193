//! Linear canonical point transformations between tensor-product structures.
//!
//! A [`StructureMap`] changes positions as `x' = T x` and momenta as
//! `p' = T⁻ᵀ p`, so its phase-space lift `S = T ⊕ T⁻ᵀ` is always symplectic.
//! The alternate structure `S' + E'` is built from the center of mass of all
//! particles plus relative coordinates, followed by a normal-mode rotation of
//! the relative block.

use std::cmp::Ordering;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::symmetric_fn;
use crate::model::QuadraticHamiltonian;

/// Minimum `|det T|` for a map to count as invertible.
pub const DET_TOL: f64 = 1e-12;
/// Entries below this magnitude count as zero in irreducibility checks.
pub const DENSITY_TOL: f64 = 1e-12;
/// Relative off-diagonal magnitude below which modes count as decoupled.
pub const DECOUPLING_TOL: f64 = 1e-10;

pub const TEXT_HEADER: &str = "# qbm-structures v1 structure-map";

#[derive(Debug, Clone, PartialEq)]
pub struct StructureMap {
    t: DMatrix<f64>,
    t_inv: DMatrix<f64>,
    labels: Vec<String>,
}

impl StructureMap {
    pub fn new(t: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        let n = t.nrows();
        if n == 0 || n != t.ncols() {
            return Err(Error::Dimension {
                expected: n,
                found: t.ncols(),
            });
        }
        if labels.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: labels.len(),
            });
        }
        let det = t.determinant();
        if !(det.abs() > DET_TOL) {
            return Err(Error::Conditioning(format!(
                "structure map is not invertible (det = {det:.3e})"
            )));
        }
        let t_inv = t
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Conditioning("structure map inversion failed".into()))?;
        Ok(Self { t, t_inv, labels })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            t: DMatrix::identity(n, n),
            t_inv: DMatrix::identity(n, n),
            labels: (0..n).map(|i| format!("q{i}")).collect(),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.t.nrows()
    }

    /// Position map `T` (`x' = T x`).
    pub fn positions(&self) -> &DMatrix<f64> {
        &self.t
    }

    pub fn positions_inverse(&self) -> &DMatrix<f64> {
        &self.t_inv
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_modes() {
            return Err(Error::Dimension {
                expected: self.n_modes(),
                found: labels.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    /// Symplectic lift `T ⊕ T⁻ᵀ`.
    pub fn lift(&self) -> DMatrix<f64> {
        block_diag(&self.t, &self.t_inv.transpose())
    }

    /// Inverse lift `T⁻¹ ⊕ Tᵀ`.
    pub fn lift_inverse(&self) -> DMatrix<f64> {
        block_diag(&self.t_inv, &self.t.transpose())
    }

    pub fn inverse(&self) -> Self {
        Self {
            t: self.t_inv.clone(),
            t_inv: self.t.clone(),
            labels: (0..self.n_modes()).map(|i| format!("q{i}")).collect(),
        }
    }

    /// Extends the map with `extra` untouched modes appended at the end.
    pub fn with_spectator_modes(&self, extra: usize) -> Self {
        let n = self.n_modes();
        let grow = |m: &DMatrix<f64>| {
            let mut out = DMatrix::identity(n + extra, n + extra);
            out.view_mut((0, 0), (n, n)).copy_from(m);
            out
        };
        let mut labels = self.labels.clone();
        labels.extend((0..extra).map(|i| format!("a{i}")));
        Self {
            t: grow(&self.t),
            t_inv: grow(&self.t_inv),
            labels,
        }
    }

    /// Plain-text form: header line, mode count, labels, then `T` row-major.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let n = self.n_modes();
        let _ = writeln!(out, "{TEXT_HEADER}");
        let _ = writeln!(out, "modes {n}");
        let _ = writeln!(out, "labels {}", self.labels.join(" "));
        for row in self.t.row_iter() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, what: &str| Error::domain(format!("line {line}"), what.to_string());
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, l)) if l == TEXT_HEADER => {}
            Some((i, _)) => return Err(bad(i, "missing structure-map header")),
            None => return Err(bad(1, "empty input")),
        }
        let (i, modes_line) = lines.next().ok_or_else(|| bad(2, "missing `modes` line"))?;
        let n: usize = modes_line
            .strip_prefix("modes ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| bad(i, "expected `modes <count>`"))?;
        let (i, labels_line) = lines.next().ok_or_else(|| bad(3, "missing `labels` line"))?;
        let labels: Vec<String> = labels_line
            .strip_prefix("labels")
            .ok_or_else(|| bad(i, "expected `labels ...`"))?
            .split_whitespace()
            .map(str::to_string)
            .collect();
        let mut values = Vec::with_capacity(n * n);
        for _ in 0..n {
            let (i, row) = lines.next().ok_or_else(|| bad(0, "too few matrix rows"))?;
            let parsed: std::result::Result<Vec<f64>, _> =
                row.split_whitespace().map(str::parse::<f64>).collect();
            let parsed = parsed.map_err(|_| bad(i, "malformed number"))?;
            if parsed.len() != n {
                return Err(bad(i, "wrong number of columns"));
            }
            values.extend(parsed);
        }
        if let Some((i, _)) = lines.next() {
            return Err(bad(i, "trailing content after matrix"));
        }
        Self::new(DMatrix::from_row_slice(n, n, &values), labels)
    }
}

fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (n, n)).copy_from(b);
    out
}

/// Choice of the independent relative coordinates accompanying the center of mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RelativeBasis {
    /// `r_k = x_0 − x_k`: every bath particle relative to the particle.
    /// Kinetic energy picks up momentum cross-terms (mass polarization).
    #[default]
    ParticleAnchored,
    /// `r_k = X_{cm}(x_0..x_{k−1}) − x_k`: diagonal kinetic energy.
    Jacobi,
}

/// Center of mass plus relative coordinates, with the default relative basis.
pub fn cm_relative_map(masses: &[f64]) -> Result<StructureMap> {
    cm_relative_map_with(masses, RelativeBasis::default())
}

pub fn cm_relative_map_with(masses: &[f64], basis: RelativeBasis) -> Result<StructureMap> {
    if masses.len() < 2 {
        return Err(Error::domain("masses", "need at least two particles"));
    }
    for (i, &m) in masses.iter().enumerate() {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::domain(
                format!("masses[{i}]"),
                format!("must be strictly positive, got {m}"),
            ));
        }
    }
    let n = masses.len();
    let total: f64 = masses.iter().sum();
    let mut t = DMatrix::zeros(n, n);
    for (j, &m) in masses.iter().enumerate() {
        t[(0, j)] = m / total;
    }
    match basis {
        RelativeBasis::ParticleAnchored => {
            for k in 1..n {
                t[(k, 0)] = 1.0;
                t[(k, k)] = -1.0;
            }
        }
        RelativeBasis::Jacobi => {
            let mut cluster = 0.0;
            for k in 1..n {
                cluster += masses[k - 1];
                for j in 0..k {
                    t[(k, j)] = masses[j] / cluster;
                }
                t[(k, k)] = -1.0;
            }
        }
    }
    let labels = std::iter::once("CM".to_string())
        .chain((1..n).map(|k| format!("R{k}")))
        .collect();
    StructureMap::new(t, labels)
}

/// `K' = S⁻ᵀ K S⁻¹`: the same operator written in the new coordinates.
pub fn transform_hamiltonian(
    h: &QuadraticHamiltonian,
    map: &StructureMap,
) -> Result<QuadraticHamiltonian> {
    if h.n_modes() != map.n_modes() {
        return Err(Error::Dimension {
            expected: h.n_modes(),
            found: map.n_modes(),
        });
    }
    let inv = map.lift_inverse();
    let mut k = inv.transpose() * h.matrix() * inv;
    crate::linalg::symmetrize(&mut k);
    QuadraticHamiltonian::new(k)
}

/// `b ∘ a`: apply `a` first, then `b`.
pub fn compose(a: &StructureMap, b: &StructureMap) -> Result<StructureMap> {
    if a.n_modes() != b.n_modes() {
        return Err(Error::Dimension {
            expected: a.n_modes(),
            found: b.n_modes(),
        });
    }
    Ok(StructureMap {
        t: &b.t * &a.t,
        t_inv: &a.t_inv * &b.t_inv,
        labels: b.labels.clone(),
    })
}

/// Normal-mode coordinates for the oscillators in `block`.
///
/// Inside the block the new positions are unit-mass normal coordinates
/// `x'' = Uᵀ G^{-1/2} x'`, where `G` is the block's inverse-mass matrix and
/// `U` diagonalizes `G^{1/2} V G^{1/2}`. Modes are ordered by ascending
/// squared frequency, ties broken lexicographically on eigenvector entries
/// after fixing the first nonzero entry positive. Outside the block the map
/// is the identity.
pub fn normal_mode_map(h: &QuadraticHamiltonian, block: &[usize]) -> Result<StructureMap> {
    Ok(normal_modes(h, block)?.0)
}

/// Like [`normal_mode_map`] but also returns the squared normal-mode frequencies.
pub fn normal_modes(h: &QuadraticHamiltonian, block: &[usize]) -> Result<(StructureMap, Vec<f64>)> {
    let n = h.n_modes();
    validate_block(block, n)?;
    let k = h.matrix();
    let b = block.len();
    let g = DMatrix::from_fn(b, b, |i, j| k[(n + block[i], n + block[j])]);
    let v = DMatrix::from_fn(b, b, |i, j| k[(block[i], block[j])]);
    let scale = k.amax().max(f64::MIN_POSITIVE);
    for &i in block {
        for &j in block {
            if k[(i, n + j)].abs() > 1e-12 * scale {
                return Err(Error::domain(
                    "block",
                    "position–momentum coupling inside the block is not supported",
                ));
            }
        }
    }
    let g_eig = SymmetricEigen::new(g.clone());
    let g_min = g_eig.eigenvalues.min();
    if !(g_min > 0.0) {
        return Err(Error::domain(
            "block",
            format!("kinetic block is not positive definite (lowest eigenvalue {g_min:.3e})"),
        ));
    }
    let g_half = symmetric_fn(&g, f64::sqrt);
    let g_inv_half = symmetric_fn(&g, |x| x.sqrt().recip());
    let mut w = &g_half * &v * &g_half;
    crate::linalg::symmetrize(&mut w);
    let eig = SymmetricEigen::new(w);

    let mut columns: Vec<(f64, Vec<f64>)> = (0..b)
        .map(|c| {
            let mut vec: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
            if let Some(first) = vec.iter().find(|x| x.abs() > 1e-12) {
                if *first < 0.0 {
                    vec.iter_mut().for_each(|x| *x = -*x);
                }
            }
            (eig.eigenvalues[c], vec)
        })
        .collect();
    let tie = 1e-12 * eig.eigenvalues.amax().max(1.0);
    columns.sort_by(|a, b| {
        if (a.0 - b.0).abs() > tie {
            a.0.total_cmp(&b.0)
        } else {
            a.1.iter()
                .zip(&b.1)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        }
    });
    let u = DMatrix::from_fn(b, b, |i, c| columns[c].1[i]);
    let t_block = u.transpose() * g_inv_half;

    let mut t = DMatrix::identity(n, n);
    for (a, &i) in block.iter().enumerate() {
        for (c, &j) in block.iter().enumerate() {
            t[(i, j)] = t_block[(a, c)];
        }
    }
    let mut labels: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    for (a, &i) in block.iter().enumerate() {
        labels[i] = format!("N{}", a + 1);
    }
    let freqs = columns.iter().map(|c| c.0).collect();
    Ok((StructureMap::new(t, labels)?, freqs))
}

fn validate_block(block: &[usize], n: usize) -> Result<()> {
    if block.is_empty() {
        return Err(Error::Modes("empty mode block".into()));
    }
    let mut seen = vec![false; n];
    for &i in block {
        if i >= n {
            return Err(Error::Modes(format!("mode {i} out of range for {n} modes")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::Modes(format!("mode {i} listed twice")));
        }
    }
    Ok(())
}

/// The alternate `S' + E'` structure: center of mass of all modes, then
/// normal modes of the relative block. Masses are read from the (diagonal)
/// kinetic block of `h`.
#[derive(Debug, Clone)]
pub struct AlternateStructure {
    pub map: StructureMap,
    pub hamiltonian: QuadraticHamiltonian,
    /// Squared frequencies of the `E'` normal modes (unit masses).
    pub env_frequencies_sq: Vec<f64>,
}

pub fn alternate_structure(h: &QuadraticHamiltonian) -> Result<AlternateStructure> {
    alternate_structure_with(h, RelativeBasis::default())
}

pub fn alternate_structure_with(
    h: &QuadraticHamiltonian,
    basis: RelativeBasis,
) -> Result<AlternateStructure> {
    let n = h.n_modes();
    let kin = h.kinetic_block();
    let scale = kin.amax();
    for i in 0..n {
        for j in 0..n {
            if i != j && kin[(i, j)].abs() > 1e-14 * scale {
                return Err(Error::domain("K_pp", "kinetic block must be diagonal"));
            }
        }
    }
    let masses: Vec<f64> = (0..n).map(|i| 1.0 / kin[(i, i)]).collect();
    let cm = cm_relative_map_with(&masses, basis)?;
    let h_cm = transform_hamiltonian(h, &cm)?;
    let block: Vec<usize> = (1..n).collect();
    let (nm, env_frequencies_sq) = normal_modes(&h_cm, &block)?;
    let labels = std::iter::once("S'".to_string())
        .chain((1..n).map(|a| format!("E'{a}")))
        .collect();
    let map = compose(&cm, &nm)?.with_labels(labels)?;
    let hamiltonian = transform_hamiltonian(h, &map)?;
    Ok(AlternateStructure {
        map,
        hamiltonian,
        env_frequencies_sq,
    })
}

/// Structural comparison of a transformed Hamiltonian against the
/// "one central mode position-coupled to uncoupled oscillators" form, with
/// mode 0 as the central system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemBathForm {
    /// Largest `|K|` entry coupling the system to anything other than bath positions
    /// through its position, or to anything at all through its momentum.
    pub system_leak: f64,
    /// Largest off-diagonal entry among bath blocks relative to the largest diagonal entry.
    pub bath_offdiag_rel: f64,
    /// Coefficient of `X²` in `½ zᵀ K z` convention, i.e. `K[0,0]`.
    pub system_potential: f64,
}

impl SystemBathForm {
    pub fn of(h: &QuadraticHamiltonian) -> Self {
        let n = h.n_modes();
        let k = h.matrix();
        let mut system_leak: f64 = k[(0, n)].abs();
        for j in 1..n {
            system_leak = system_leak
                .max(k[(0, n + j)].abs())
                .max(k[(n, j)].abs())
                .max(k[(n, n + j)].abs());
        }
        let mut diag: f64 = 0.0;
        let mut offdiag: f64 = 0.0;
        for i in 1..n {
            diag = diag.max(k[(i, i)].abs()).max(k[(n + i, n + i)].abs());
            offdiag = offdiag.max(k[(i, n + i)].abs());
            for j in 1..n {
                offdiag = offdiag.max(k[(i, n + j)].abs());
                if i != j {
                    offdiag = offdiag.max(k[(i, j)].abs()).max(k[(n + i, n + j)].abs());
                }
            }
        }
        Self {
            system_leak,
            bath_offdiag_rel: if diag > 0.0 { offdiag / diag } else { offdiag },
            system_potential: k[(0, 0)],
        }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.bath_offdiag_rel < tol && self.system_potential > 0.0 && self.system_leak_ok(tol)
    }

    fn system_leak_ok(&self, tol: f64) -> bool {
        self.system_leak < tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrreducibilityReport {
    /// Fraction of entries above tolerance in each row of `T`.
    pub row_density: Vec<f64>,
    /// Same for `T⁻¹`.
    pub inverse_row_density: Vec<f64>,
    /// Smallest `|entry|` over `T` and `T⁻¹`.
    pub min_abs_coefficient: f64,
    /// For each new block, the indices of the old blocks it draws on.
    pub block_support: Vec<Vec<usize>>,
    pub is_irreducible: bool,
}

/// Every new coordinate a combination of all old ones, and vice versa.
pub fn irreducibility_report(
    map: &StructureMap,
    split_old: &[Vec<usize>],
    split_new: &[Vec<usize>],
) -> Result<IrreducibilityReport> {
    let n = map.n_modes();
    let old_of = partition_owner(split_old, n, "split_old")?;
    partition_owner(split_new, n, "split_new")?;
    let density = |m: &DMatrix<f64>| -> Vec<f64> {
        m.row_iter()
            .map(|r| r.iter().filter(|v| v.abs() > DENSITY_TOL).count() as f64 / n as f64)
            .collect()
    };
    let row_density = density(map.positions());
    let inverse_row_density = density(map.positions_inverse());
    let min_abs_coefficient = map
        .positions()
        .iter()
        .chain(map.positions_inverse().iter())
        .map(|v| v.abs())
        .fold(f64::INFINITY, f64::min);
    let block_support = split_new
        .iter()
        .map(|block| {
            let mut touched: Vec<usize> = block
                .iter()
                .flat_map(|&r| {
                    (0..n).filter(move |&c| map.positions()[(r, c)].abs() > DENSITY_TOL)
                })
                .map(|c| old_of[c])
                .collect();
            touched.sort_unstable();
            touched.dedup();
            touched
        })
        .collect();
    let is_irreducible = min_abs_coefficient > DENSITY_TOL;
    Ok(IrreducibilityReport {
        row_density,
        inverse_row_density,
        min_abs_coefficient,
        block_support,
        is_irreducible,
    })
}

fn partition_owner(split: &[Vec<usize>], n: usize, name: &str) -> Result<Vec<usize>> {
    let mut owner = vec![usize::MAX; n];
    for (b, block) in split.iter().enumerate() {
        if block.is_empty() {
            return Err(Error::Modes(format!("{name}: block {b} is empty")));
        }
        for &i in block {
            if i >= n {
                return Err(Error::Modes(format!("{name}: mode {i} out of range")));
            }
            if owner[i] != usize::MAX {
                return Err(Error::Modes(format!("{name}: mode {i} appears twice")));
            }
            owner[i] = b;
        }
    }
    if let Some(missing) = owner.iter().position(|&o| o == usize::MAX) {
        return Err(Error::Modes(format!("{name}: mode {missing} not covered")));
    }
    Ok(owner)
}
