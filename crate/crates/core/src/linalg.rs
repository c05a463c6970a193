//! Dense linear algebra over phase space: the symplectic form, matrix
//! exponential, symmetric matrix functions and Williamson normal form.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// `Ω = [[0, I], [−I, 0]]` for `n` modes.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        omega[(i, n + i)] = 1.0;
        omega[(n + i, i)] = -1.0;
    }
    omega
}

/// `max |S Ω Sᵀ − Ω|`.
pub fn symplectic_residual(s: &DMatrix<f64>) -> f64 {
    let omega = symplectic_form(s.nrows() / 2);
    (s * &omega * s.transpose() - omega).amax()
}

/// Phase-space row indices of `modes`: their positions, then their momenta.
pub fn phase_indices(modes: &[usize], n_modes: usize) -> Vec<usize> {
    modes
        .iter()
        .copied()
        .chain(modes.iter().map(|m| m + n_modes))
        .collect()
}

pub fn select(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub fn select_vec(v: &DVector<f64>, rows: &[usize]) -> DVector<f64> {
    DVector::from_fn(rows.len(), |i, _| v[rows[i]])
}

/// Lifts a symplectic matrix acting on `modes` into the full `n_modes` phase
/// space, acting as the identity everywhere else.
pub fn embed_symplectic(s: &DMatrix<f64>, modes: &[usize], n_modes: usize) -> DMatrix<f64> {
    let idx = phase_indices(modes, n_modes);
    let mut full = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            full[(i, j)] = s[(a, b)];
        }
    }
    full
}

/// Applies `f` to the eigenvalues of a symmetric matrix.
pub fn symmetric_fn(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

pub fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// `exp(A)` by scaling and squaring with the degree-13 Padé approximant.
pub fn expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Dimension {
            expected: n,
            found: a.ncols(),
        });
    }
    if !a.iter().all(|v| v.is_finite()) {
        return Err(Error::Conditioning("matrix exponential of a non-finite matrix".into()));
    }
    let norm = one_norm(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * 2f64.powi(-squarings);
    let b = &PADE13;
    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &ident * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &ident * b[0];
    let mut r = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .ok_or_else(|| Error::Conditioning("singular Padé denominator".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if !r.iter().all(|v| v.is_finite()) {
        return Err(Error::Conditioning("matrix exponential overflowed".into()));
    }
    Ok(r)
}

/// Williamson normal form of a positive-definite `2n × 2n` matrix:
/// `M = S · diag(ν, ν) · Sᵀ` with `S` symplectic and `ν` sorted ascending.
pub fn williamson(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let dim = m.nrows();
    if dim % 2 != 0 || dim != m.ncols() {
        return Err(Error::Dimension {
            expected: 2 * (dim / 2),
            found: dim,
        });
    }
    let n = dim / 2;
    let eig = SymmetricEigen::new(m.clone());
    let lowest = eig.eigenvalues.min();
    if !(lowest > 0.0) {
        return Err(Error::Conditioning(format!(
            "Williamson form needs a positive-definite matrix (lowest eigenvalue {lowest:.3e})"
        )));
    }
    let sqrt = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    // A = M^{1/2} Ω M^{1/2} is antisymmetric; AᵀA has each ν² twice
    let a = &sqrt * symplectic_form(n) * &sqrt;
    let ata = a.transpose() * &a;
    let ata_eig = SymmetricEigen::new(ata);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| ata_eig.eigenvalues[i].total_cmp(&ata_eig.eigenvalues[j]));

    let mut us: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut vs: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut nus = Vec::with_capacity(n);
    for &col in &order {
        if us.len() == n {
            break;
        }
        let mut u: DVector<f64> = ata_eig.eigenvectors.column(col).into_owned();
        for w in us.iter().chain(vs.iter()) {
            let proj = w.dot(&u);
            u.axpy(-proj, w, 1.0);
        }
        let norm = u.norm();
        if norm < 1e-6 {
            continue;
        }
        u /= norm;
        let au = &a * &u;
        let nu = au.norm();
        if !(nu > 0.0) {
            return Err(Error::Conditioning("degenerate symplectic spectrum".into()));
        }
        vs.push(au / nu);
        us.push(u);
        nus.push(nu);
    }
    if us.len() != n {
        return Err(Error::Conditioning("failed to pair symplectic eigenvectors".into()));
    }
    // O = [v | u] gives Oᵀ A O = [[0, D], [−D, 0]]
    let mut o = DMatrix::zeros(dim, dim);
    for k in 0..n {
        o.set_column(k, &vs[k]);
        o.set_column(n + k, &us[k]);
    }
    let scale = DVector::from_fn(dim, |i, _| nus[i % n].sqrt().recip());
    let s = sqrt * o * DMatrix::from_diagonal(&scale);
    Ok((s, nus))
}

/// Symplectic eigenvalues of a positive-definite matrix, ascending.
pub fn symplectic_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = m.nrows();
    if dim % 2 != 0 || dim != m.ncols() {
        return Err(Error::Dimension {
            expected: 2 * (dim / 2),
            found: dim,
        });
    }
    let eig = SymmetricEigen::new(m.clone());
    let lowest = eig.eigenvalues.min();
    if !(lowest > 0.0) {
        return Err(Error::Conditioning(format!(
            "symplectic spectrum needs a positive-definite matrix (lowest eigenvalue {lowest:.3e})"
        )));
    }
    let sqrt = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let a = &sqrt * symplectic_form(dim / 2) * &sqrt;
    let mut sq: Vec<f64> = SymmetricEigen::new(a.transpose() * &a)
        .eigenvalues
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .collect();
    sq.sort_by(f64::total_cmp);
    // eigenvalues come in degenerate pairs
    Ok(sq.chunks(2).map(|c| 0.5 * (c[0] + c[1])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn taylor_exp(a: &DMatrix<f64>) -> DMatrix<f64> {
        // scaled Taylor series, independent of the Padé path
        let s = 10;
        let a = a / 2f64.powi(s);
        let n = a.nrows();
        let mut term = DMatrix::<f64>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &a / k as f64;
            sum += &term;
        }
        for _ in 0..s {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn expm_zero_is_identity() {
        let z = DMatrix::<f64>::zeros(4, 4);
        assert_eq!(expm(&z).unwrap(), DMatrix::identity(4, 4));
    }

    #[test]
    fn expm_rotation() {
        let t = 0.7;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, t, -t, 0.0]);
        let e = expm(&a).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[t.cos(), t.sin(), -t.sin(), t.cos()]);
        assert!((e - expected).amax() < 1e-15);
    }

    #[test]
    fn expm_matches_taylor_and_nalgebra() {
        let a = DMatrix::from_fn(6, 6, |i, j| ((i * 5 + j * 3) % 7) as f64 * 0.9 - 2.5);
        let pade = expm(&a).unwrap();
        let taylor = taylor_exp(&a);
        let reference = a.clone().exp();
        let scale = reference.amax();
        assert!((&pade - &taylor).amax() / scale < 1e-11);
        assert!((&pade - &reference).amax() / scale < 1e-11);
    }

    #[test]
    fn williamson_reconstructs() {
        let base = DMatrix::from_fn(6, 6, |i, j| ((i * 7 + j * 11) % 5) as f64 * 0.1);
        let m = &base * base.transpose() + DMatrix::identity(6, 6) * 0.8;
        let (s, nus) = williamson(&m).unwrap();
        assert!(symplectic_residual(&s) < 1e-10);
        let d = DMatrix::from_diagonal(&DVector::from_fn(6, |i, _| nus[i % 3]));
        assert!((&s * d * s.transpose() - &m).amax() < 1e-10);
        let direct = symplectic_eigenvalues(&m).unwrap();
        for (a, b) in nus.iter().zip(&direct) {
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn williamson_degenerate_spectrum() {
        let m = DMatrix::identity(6, 6) * 0.5;
        let (s, nus) = williamson(&m).unwrap();
        assert!(symplectic_residual(&s) < 1e-12);
        assert!(nus.iter().all(|v| (v - 0.5).abs() < 1e-14));
    }

    #[test]
    fn williamson_rejects_indefinite() {
        let mut m = DMatrix::identity(2, 2);
        m[(0, 0)] = -1.0;
        assert!(matches!(williamson(&m), Err(Error::Conditioning(_))));
    }

    #[test]
    fn embedding_is_symplectic() {
        let t: f64 = 0.3;
        let rot = DMatrix::from_row_slice(2, 2, &[t.cos(), t.sin(), -t.sin(), t.cos()]);
        let full = embed_symplectic(&rot, &[2], 3);
        assert!(symplectic_residual(&full) < 1e-15);
        assert_eq!(full[(2, 5)], t.sin());
        assert_eq!(full[(0, 0)], 1.0);
    }
}
