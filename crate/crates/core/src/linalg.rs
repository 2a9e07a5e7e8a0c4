//! Dense complex linear algebra on top of nalgebra: Hermitian matrix
//! functions, polar and Takagi factorizations.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::{CMatrix, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Frobenius norm.
pub fn frob(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// (M + M†)/2.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// Eigendecomposition of a Hermitian matrix (input is symmetrized first).
pub fn hermitian_eigen(h: &CMatrix) -> (DVector<f64>, CMatrix) {
    let e = SymmetricEigen::new(hermitian_part(h));
    (e.eigenvalues, e.eigenvectors)
}

/// f(H) for Hermitian H.
pub fn hermitian_fn(h: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(h);
    spectral(&vecs, vals.iter().map(|&x| c(f(x))))
}

/// Q diag(d) Q†.
pub fn spectral(q: &CMatrix, d: impl IntoIterator<Item = Complex64>) -> CMatrix {
    let mut scaled = q.clone();
    for (mut col, dk) in scaled.column_iter_mut().zip(d) {
        col *= dk;
    }
    scaled * q.adjoint()
}

/// Extend orthonormal `cols` to a full basis of C^n by Gram-Schmidt against
/// e_0, e_1, … in order.
pub fn complete_basis(cols: &[DVector<Complex64>], n: usize) -> Vec<DVector<Complex64>> {
    let mut out: Vec<DVector<Complex64>> = cols.to_vec();
    for k in 0..n {
        if out.len() == n {
            break;
        }
        let mut v = DVector::from_element(n, ZERO);
        v[k] = ONE;
        // twice is enough
        for _ in 0..2 {
            for u in &out {
                let proj = u.dotc(&v);
                v -= u * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            out.push(v / c(norm));
        }
    }
    out
}

fn orthonormalize(mut v: DVector<Complex64>, basis: &[DVector<Complex64>]) -> DVector<Complex64> {
    for _ in 0..2 {
        for u in basis {
            let proj = u.dotc(&v);
            v -= u * proj;
        }
    }
    let norm = v.norm();
    v / c(norm)
}

/// SVD ξ = W Σ V† with σ descending and null-space columns of W and V both
/// completed against the canonical basis.
#[derive(Debug, Clone)]
pub struct Svd {
    pub w: CMatrix,
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

pub fn svd(xi: &CMatrix) -> Result<Svd> {
    let n = xi.nrows();
    if n != xi.ncols() {
        return Err(Error::InvalidArgument("square matrix expected".into()));
    }
    if xi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    if n == 0 {
        return Ok(Svd { w: CMatrix::zeros(0, 0), sigma: vec![], v: CMatrix::zeros(0, 0) });
    }
    // Eigenvectors of [[0, ξ], [ξ†, 0]] are (w; ±v)/√2 with eigenvalue ±σ.
    // nalgebra's complex SVD can lose several digits on clustered σ; its
    // Hermitian eigensolver does not.
    let aug = CMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, false) => xi[(i, j - n)],
        (false, true) => xi[(j, i - n)].conj(),
        _ => ZERO,
    });
    let (vals, q) = hermitian_eigen(&aug);
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    let smax = vals.max().max(0.0);
    let cutoff = smax * 2.0 * n as f64 * f64::EPSILON;

    let mut wcols: Vec<DVector<Complex64>> = Vec::new();
    let mut vcols: Vec<DVector<Complex64>> = Vec::new();
    let mut sigma = Vec::new();
    for &k in order.iter().take(n) {
        let sk = vals[k];
        if smax == 0.0 || sk <= cutoff {
            break;
        }
        let col = q.column(k);
        let w = col.rows(0, n).into_owned();
        let v = col.rows(n, n).into_owned();
        // tiny σ sit close to −σ, so their halves need re-orthogonalizing
        wcols.push(orthonormalize(w, &wcols));
        vcols.push(orthonormalize(v, &vcols));
        sigma.push(sk);
    }
    let rank = sigma.len();
    sigma.resize(n, 0.0);
    let wcols = complete_basis(&wcols, n);
    let vcols = complete_basis(&vcols, n);
    debug_assert!(rank <= n);
    Ok(Svd { w: CMatrix::from_columns(&wcols), sigma, v: CMatrix::from_columns(&vcols) })
}

/// Left polar decomposition ξ = R e^{iΘ}.
#[derive(Debug, Clone)]
pub struct Polar {
    pub r: CMatrix,
    pub phase: CMatrix,
    pub theta: CMatrix,
    pub svd: Svd,
}

pub fn polar(xi: &CMatrix) -> Result<Polar> {
    let s = svd(xi)?;
    let r = spectral(&s.w, s.sigma.iter().map(|&x| c(x)));
    let phase = &s.w * s.v.adjoint();
    let theta = unitary_log(&phase)?;
    Ok(Polar { r, phase, theta, svd: s })
}

/// Eigendecomposition of a normal matrix; returns (eigenvalues, Q).
///
/// The Hermitian and anti-Hermitian parts of a normal matrix commute, so the
/// eigenvectors of H₁ + cH₂ diagonalize it unless c happens to merge two
/// distinct eigenvalues; a few values of c are tried and the result checked.
/// Complex Schur is the last resort (its QR sweep stalls on symmetric
/// orthogonal inputs, which polar phases often are).
pub fn normal_eigen(m: &CMatrix) -> Result<(Vec<Complex64>, CMatrix)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((vec![], CMatrix::zeros(0, 0)));
    }
    let h1 = hermitian_part(m);
    let h2 = (m - m.adjoint()) * Complex64::new(0.0, -0.5);
    let scale = frob(m).max(f64::MIN_POSITIVE);
    for coef in [0.577_215_664_901_532_9, 1.324_717_957_244_746, -0.267_949_192_431_122_7] {
        let (_, q) = hermitian_eigen(&(&h1 + &h2 * c(coef)));
        let d = q.adjoint() * m * &q;
        let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|ij| d[ij].norm_sqr()).sum();
        if off.sqrt() <= 1e-13 * scale * (n as f64).sqrt() {
            return Ok(((0..n).map(|i| d[(i, i)]).collect(), q));
        }
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Numerical("normal eigendecomposition did not converge".into()))?;
    let (q, t) = schur.unpack();
    Ok((t.diagonal().iter().copied().collect(), q))
}

/// Principal Hermitian logarithm −i·log(U) of a unitary, eigenphases in (−π, π].
pub fn unitary_log(u: &CMatrix) -> Result<CMatrix> {
    let (vals, q) = normal_eigen(u)?;
    let phases = vals.iter().map(|z| {
        let a = z.arg();
        c(if a <= -std::f64::consts::PI { std::f64::consts::PI } else { a })
    });
    Ok(hermitian_part(&spectral(&q, phases)))
}

/// Autonne-Takagi factorization ξ = V Σ Vᵀ of a complex symmetric matrix,
/// σ descending.
#[derive(Debug, Clone)]
pub struct Takagi {
    pub v: CMatrix,
    pub sigma: Vec<f64>,
}

pub fn takagi(xi: &CMatrix) -> Result<Takagi> {
    let n = xi.nrows();
    let scale = max_abs(xi);
    let asym = max_abs(&(xi - xi.transpose()));
    if asym > 1e-10 * scale.max(f64::MIN_POSITIVE) && asym > 0.0 {
        return Err(Error::Domain(format!("Takagi factorization needs a symmetric matrix (asymmetry {asym:.3e})")));
    }
    if n == 0 {
        return Ok(Takagi { v: CMatrix::zeros(0, 0), sigma: vec![] });
    }
    let sym = (xi + xi.transpose()) * c(0.5);
    // ξ conj(u) = σ u with u = x + iy  ⇔  [[A, B], [B, −A]] [x; y] = σ [x; y]
    let emb = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = sym[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) => z.re,
            (false, false) => -z.re,
            _ => z.im,
        }
    });
    let e = SymmetricEigen::new(emb);
    let mut idx: Vec<usize> = (0..2 * n).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[b].total_cmp(&e.eigenvalues[a]).then(a.cmp(&b)));
    let cutoff = scale * 2.0 * n as f64 * f64::EPSILON;
    let mut cols = Vec::new();
    let mut sigma = Vec::new();
    for &k in idx.iter().take(n) {
        let s = e.eigenvalues[k];
        if scale == 0.0 || s <= cutoff {
            break;
        }
        let col = e.eigenvectors.column(k);
        let u = DVector::from_fn(n, |i, _| Complex64::new(col[i], col[i + n]));
        let norm = u.norm();
        cols.push(u / c(norm));
        sigma.push(s);
    }
    sigma.resize(n, 0.0);
    let cols = complete_basis(&cols, n);
    Ok(Takagi { v: CMatrix::from_columns(&cols), sigma })
}

/// ‖ξξ† − ξ†ξ‖_F / ‖ξ‖_F², zero for the zero matrix.
pub fn normality_residual(xi: &CMatrix) -> f64 {
    let n2 = frob(xi).powi(2);
    if n2 == 0.0 {
        return 0.0;
    }
    frob(&(xi * xi.adjoint() - xi.adjoint() * xi)) / n2
}


/// Serde for complex matrices as `{"re": [[row]...], "im": [[row]...]}`.
pub mod serde_cmatrix {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Repr {
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    }

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            m.row_iter().map(|r| r.iter().map(f).collect()).collect()
        };
        Repr { re: rows(|z| z.re), im: rows(|z| z.im) }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        let r = Repr::deserialize(d)?;
        let n = r.re.len();
        let m = r.re.first().map_or(0, Vec::len);
        let ragged = r.im.len() != n || r.re.iter().chain(&r.im).any(|row| row.len() != m);
        if ragged {
            return Err(serde::de::Error::custom("matrix rows have inconsistent lengths"));
        }
        Ok(CMatrix::from_fn(n, m, |i, j| Complex64::new(r.re[i][j], r.im[i][j])))
    }
}

/// Serde for real matrices as a list of rows.
pub mod serde_rmatrix {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(serde::de::Error::custom("matrix rows have inconsistent lengths"));
        }
        Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
    }
}
