//! Brute-force check of the closed forms on a truncated Fock space.
//!
//! The squeezing exponent is built from ladder operators on
//! (n_cut+1)^n_modes basis states, exponentiated onto the vacuum with a
//! step-split Taylor series, and every statistic is read off the resulting
//! state vector directly. Nothing here uses the polar decomposition.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, c};
use crate::squeeze::StateReport;
use crate::{CMatrix, Error, Result};

/// (n_cut+1)^n_modes limit: 9⁶.
pub const DIMENSION_GUARD: usize = 531_441;
pub const MAX_MODES: usize = 6;
pub const MAX_CUT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedFockSpace {
    pub n_modes: usize,
    pub n_cut: usize,
    pub dimension: usize,
}

impl TruncatedFockSpace {
    pub fn new(n_modes: usize, n_cut: usize) -> Result<Self> {
        if n_modes == 0 || n_modes > MAX_MODES {
            return Err(Error::InvalidArgument(format!("n_modes must be in 1..={MAX_MODES}, got {n_modes}")));
        }
        if n_cut == 0 || n_cut > MAX_CUT {
            return Err(Error::InvalidArgument(format!("n_cut must be in 1..={MAX_CUT}, got {n_cut}")));
        }
        let dimension = (n_cut + 1).pow(n_modes as u32);
        if dimension > DIMENSION_GUARD {
            return Err(Error::DimensionGuard { dimension, limit: DIMENSION_GUARD });
        }
        Ok(Self { n_modes, n_cut, dimension })
    }

    fn stride(&self, mode: usize) -> usize {
        (self.n_cut + 1).pow(mode as u32)
    }

    /// Occupation numbers of basis state `index` (mode 0 varies fastest).
    pub fn occupations(&self, mut index: usize) -> Vec<usize> {
        (0..self.n_modes)
            .map(|_| {
                let o = index % (self.n_cut + 1);
                index /= self.n_cut + 1;
                o
            })
            .collect()
    }

    pub fn index_of(&self, occ: &[usize]) -> usize {
        occ.iter().enumerate().map(|(m, &o)| o * self.stride(m)).sum()
    }
}

/// Signal/idler structure of the exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleKind {
    /// Σ ξ*ᵢⱼ aᵢbⱼ − ξᵢⱼ a†ᵢb†ⱼ on 2n modes (a first, then b).
    TwoBeam,
    /// Σ ξ*ᵢⱼ aᵢaⱼ − ξᵢⱼ a†ᵢa†ⱼ on n modes.
    Degenerate,
}

/// coef · aᵢaⱼ (lowering) or coef · a†ᵢa†ⱼ (raising).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticTerm {
    pub coef: Complex64,
    pub i: usize,
    pub j: usize,
    pub raising: bool,
}

/// Matrix-free sparse operator X on a truncated space.
#[derive(Debug, Clone)]
pub struct SparseExponent {
    pub space: TruncatedFockSpace,
    pub terms: Vec<QuadraticTerm>,
    occ: Vec<[u8; MAX_MODES]>,
    strides: [usize; MAX_MODES],
}

impl SparseExponent {
    pub fn new(space: TruncatedFockSpace, terms: Vec<QuadraticTerm>) -> Self {
        let occ = (0..space.dimension)
            .map(|s| {
                let mut o = [0u8; MAX_MODES];
                for (k, v) in space.occupations(s).into_iter().enumerate() {
                    o[k] = v as u8;
                }
                o
            })
            .collect();
        let mut strides = [0; MAX_MODES];
        for (m, st) in strides.iter_mut().enumerate().take(space.n_modes) {
            *st = space.stride(m);
        }
        Self { space, terms, occ, strides }
    }

    /// ⟨row| T |col⟩ for one term, or None if zero.
    fn term_element(&self, t: &QuadraticTerm, row: usize) -> Option<(usize, f64)> {
        let cut = self.space.n_cut as i64;
        let o = &self.occ[row];
        let (ni, nj) = (o[t.i] as i64, o[t.j] as i64);
        let (si, sj) = (self.strides[t.i], self.strides[t.j]);
        if t.raising {
            // |row⟩ = a†ᵢa†ⱼ|col⟩ · factor
            let factor = if t.i == t.j {
                (ni * (ni - 1)) as f64
            } else {
                (ni * nj) as f64
            };
            if factor <= 0.0 {
                return None;
            }
            Some((row - si - sj, factor.sqrt()))
        } else {
            let (fi, fj) = if t.i == t.j { (ni + 2, 0) } else { (ni + 1, nj + 1) };
            if fi > cut || fj > cut {
                return None;
            }
            let factor = if t.i == t.j { ((ni + 1) * (ni + 2)) as f64 } else { ((ni + 1) * (nj + 1)) as f64 };
            Some((row + si + sj, factor.sqrt()))
        }
    }

    /// y = X x.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (row, out) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in &self.terms {
                if let Some((col, f)) = self.term_element(t, row) {
                    acc += t.coef * x[col] * f;
                }
            }
            *out = acc;
        }
    }

    pub fn matrix_element(&self, row: usize, col: usize) -> Complex64 {
        self.terms
            .iter()
            .filter_map(|t| self.term_element(t, row).filter(|(c0, _)| *c0 == col).map(|(_, f)| t.coef * f))
            .sum()
    }

    /// Nonzero entries as (row, col, value), combining terms.
    pub fn triplets(&self) -> Vec<(usize, usize, Complex64)> {
        let mut out = Vec::new();
        for row in 0..self.space.dimension {
            let mut cols: Vec<usize> = self.terms.iter().filter_map(|t| self.term_element(t, row).map(|(c0, _)| c0)).collect();
            cols.sort_unstable();
            cols.dedup();
            for col in cols {
                let v = self.matrix_element(row, col);
                if v != Complex64::new(0.0, 0.0) {
                    out.push((row, col, v));
                }
            }
        }
        out
    }

    fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coef.norm()).sum::<f64>() * self.space.n_cut as f64
    }
}

pub fn build_hamiltonian_exponent(xi: &CMatrix, space: &TruncatedFockSpace, kind: OracleKind) -> Result<SparseExponent> {
    let n = xi.nrows();
    if n != xi.ncols() {
        return Err(Error::InvalidArgument("square ξ expected".into()));
    }
    let needed = match kind {
        OracleKind::TwoBeam => 2 * n,
        OracleKind::Degenerate => n,
    };
    if needed != space.n_modes {
        return Err(Error::InvalidArgument(format!("ξ of size {n} needs {needed} modes, space has {}", space.n_modes)));
    }
    let offset = if kind == OracleKind::TwoBeam { n } else { 0 };
    let mut terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let z = xi[(i, j)];
            if z == Complex64::new(0.0, 0.0) {
                continue;
            }
            terms.push(QuadraticTerm { coef: z.conj(), i, j: j + offset, raising: false });
            terms.push(QuadraticTerm { coef: -z, i, j: j + offset, raising: true });
        }
    }
    Ok(SparseExponent::new(space.clone(), terms))
}

/// e^{X}|0⟩ by a Taylor series on each of m sub-steps.
pub fn evolve_vacuum(op: &SparseExponent) -> Vec<Complex64> {
    let dim = op.space.dimension;
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    psi[0] = c(1.0);
    let steps = (op.norm_bound() / 4.0).ceil().max(1.0) as usize;
    let h = 1.0 / steps as f64;
    let mut term = vec![Complex64::new(0.0, 0.0); dim];
    let mut next = vec![Complex64::new(0.0, 0.0); dim];
    for _ in 0..steps {
        term.copy_from_slice(&psi);
        let mut small = 0;
        for k in 1..200 {
            op.apply(&term, &mut next);
            let scale = h / k as f64;
            let mut norm2 = 0.0;
            for (t, nx) in term.iter_mut().zip(&next) {
                *t = nx * scale;
                norm2 += t.norm_sqr();
            }
            for (p, t) in psi.iter_mut().zip(&term) {
                *p += t;
            }
            small = if norm2.sqrt() < 1e-17 { small + 1 } else { 0 };
            if small == 2 {
                break;
            }
        }
    }
    psi
}

/// Statistics read directly off the truncated state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub kind: OracleKind,
    pub space: TruncatedFockSpace,
    /// ⟨X₁ X₁ᵀ⟩.
    #[serde(with = "linalg::serde_cmatrix")]
    pub var_x1: CMatrix,
    #[serde(with = "linalg::serde_cmatrix")]
    pub var_x2: CMatrix,
    pub scalar_var: (f64, f64),
    /// ½(⟨X₁X₂ᵀ⟩ + ⟨X₂X₁ᵀ⟩ᵀ).
    #[serde(with = "linalg::serde_cmatrix")]
    pub cross_cov_symmetrized: CMatrix,
    /// ⟨a†ᵢ aⱼ⟩.
    #[serde(with = "linalg::serde_cmatrix")]
    pub a_dag_a: CMatrix,
    /// ⟨a†ᵢ b†ⱼ⟩ (two-beam) or ⟨a†ᵢ a†ⱼ⟩ (degenerate).
    #[serde(with = "linalg::serde_cmatrix")]
    pub pair_amplitudes: CMatrix,
    pub nbar_total: f64,
    pub number_variance: f64,
    pub number_covariance: f64,
    /// L2 norm of the amplitude on states with any mode at n_cut.
    pub truncation_bound: f64,
    pub conclusive: bool,
}

/// Runs the oracle. `tolerance` is the largest truncation bound accepted as
/// conclusive.
pub fn vacuum_statistics(xi: &CMatrix, space: &TruncatedFockSpace, kind: OracleKind, tolerance: f64) -> Result<OracleReport> {
    let op = build_hamiltonian_exponent(xi, space, kind)?;
    let psi = evolve_vacuum(&op);
    let n = xi.nrows();
    let modes = space.n_modes;

    let lower = |mode: usize, v: &[Complex64]| -> Vec<Complex64> {
        let stride = space.stride(mode);
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for (s, o) in op.occ.iter().enumerate() {
            let k = o[mode] as usize;
            if k < space.n_cut {
                out[s] = v[s + stride] * ((k + 1) as f64).sqrt();
            }
        }
        out
    };
    let dot = |x: &[Complex64], y: &[Complex64]| -> Complex64 { x.iter().zip(y).map(|(a, b)| a.conj() * b).sum() };

    let phi: Vec<Vec<Complex64>> = (0..modes).map(|k| lower(k, &psi)).collect();
    let g = CMatrix::from_fn(modes, modes, |k, l| dot(&phi[k], &phi[l]));
    let f = CMatrix::from_fn(modes, modes, |k, l| dot(&psi, &lower(k, &phi[l])));

    // ⟨(c_k + ε c†_k)(c_l + ε' c†_l)⟩ from normal-ordered moments
    let pair = |k: usize, l: usize, e1: f64, e2: f64| -> Complex64 {
        let delta = if k == l { 1.0 } else { 0.0 };
        f[(k, l)] + (g[(l, k)] + delta) * e2 + g[(k, l)] * e1 + f[(l, k)].conj() * (e1 * e2)
    };
    let (groups, s): (Vec<Vec<usize>>, f64) = match kind {
        OracleKind::TwoBeam => ((0..n).map(|i| vec![i, i + n]).collect(), 2f64.powf(-1.5)),
        OracleKind::Degenerate => ((0..n).map(|i| vec![i]).collect(), 0.5),
    };
    let block = |i: usize, j: usize, e1: f64, e2: f64| -> Complex64 {
        groups[i].iter().flat_map(|&k| groups[j].iter().map(move |&l| (k, l))).map(|(k, l)| pair(k, l, e1, e2)).sum()
    };
    let minus_i = Complex64::new(0.0, -1.0);
    let var_x1 = CMatrix::from_fn(n, n, |i, j| block(i, j, 1.0, 1.0) * (s * s));
    let var_x2 = CMatrix::from_fn(n, n, |i, j| block(i, j, -1.0, -1.0) * (-s * s));
    let x1x2 = CMatrix::from_fn(n, n, |i, j| block(i, j, 1.0, -1.0) * minus_i * (s * s));
    let x2x1 = CMatrix::from_fn(n, n, |i, j| block(j, i, -1.0, 1.0) * minus_i * (s * s));
    let cross_cov_symmetrized = (x1x2 + x2x1) * c(0.5);

    let a_dag_a = g.view((0, 0), (n, n)).into_owned();
    let pair_amplitudes = match kind {
        OracleKind::TwoBeam => CMatrix::from_fn(n, n, |i, j| f[(j + n, i)].conj()),
        OracleKind::Degenerate => CMatrix::from_fn(n, n, |i, j| f[(j, i)].conj()),
    };

    let mut na = 0.0;
    let mut na2 = 0.0;
    let mut nb = 0.0;
    let mut nanb = 0.0;
    let mut shell = 0.0;
    for (s_idx, o) in op.occ.iter().enumerate() {
        let p = psi[s_idx].norm_sqr();
        let a: f64 = o[..n].iter().map(|&k| k as f64).sum();
        let b: f64 = if kind == OracleKind::TwoBeam { o[n..2 * n].iter().map(|&k| k as f64).sum() } else { a };
        na += p * a;
        na2 += p * a * a;
        nb += p * b;
        nanb += p * a * b;
        if o[..modes].iter().any(|&k| k as usize == space.n_cut) {
            shell += p;
        }
    }
    let truncation_bound = shell.sqrt();
    Ok(OracleReport {
        kind,
        space: space.clone(),
        scalar_var: (linalg::trace(&var_x1).re, linalg::trace(&var_x2).re),
        var_x1,
        var_x2,
        cross_cov_symmetrized,
        a_dag_a,
        pair_amplitudes,
        nbar_total: na,
        number_variance: na2 - na * na,
        number_covariance: nanb - na * nb,
        truncation_bound,
        conclusive: truncation_bound <= tolerance,
    })
}

/// Per-statistic maximum absolute deviation between closed forms and oracle,
/// after mapping the closed-form conventions onto oracle expectation values:
/// cross_cov = 2 × symmetrized covariance, nbar_matrix(i, j) = ⟨a†ⱼaᵢ⟩,
/// pair_matrix = −⟨a†b†⟩.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub deviations: Vec<(String, f64)>,
    pub max_deviation: f64,
    pub truncation_bound: f64,
    pub within_bound: bool,
    pub conclusive: bool,
}

pub fn compare(closed: &StateReport, oracle: &OracleReport) -> Agreement {
    let md = |a: &CMatrix, b: &CMatrix| linalg::max_abs(&(a - b));
    let deviations = vec![
        ("var_x1".to_string(), md(&closed.var_x1, &oracle.var_x1)),
        ("var_x2".to_string(), md(&closed.var_x2, &oracle.var_x2)),
        ("scalar_var_1".to_string(), (closed.scalar_var.0 - oracle.scalar_var.0).abs()),
        ("scalar_var_2".to_string(), (closed.scalar_var.1 - oracle.scalar_var.1).abs()),
        ("cross_cov".to_string(), md(&closed.cross_cov, &(&oracle.cross_cov_symmetrized * c(2.0)))),
        ("nbar_matrix".to_string(), md(&closed.nbar_matrix, &oracle.a_dag_a.transpose())),
        ("nbar_total".to_string(), (closed.nbar_total - oracle.nbar_total).abs()),
        ("number_variance".to_string(), (closed.number_variance - oracle.number_variance).abs()),
        ("number_covariance".to_string(), (closed.number_covariance - oracle.number_covariance).abs()),
        ("pair_matrix".to_string(), md(&closed.pair_matrix, &(-&oracle.pair_amplitudes))),
    ];
    let max_deviation = deviations.iter().map(|d| d.1).fold(0.0, f64::max);
    Agreement {
        max_deviation,
        truncation_bound: oracle.truncation_bound,
        within_bound: max_deviation <= oracle.truncation_bound,
        conclusive: oracle.conclusive,
        deviations,
    }
}

/// Largest n_cut (≤ 8) whose space fits the guard.
pub fn largest_cut(n_modes: usize) -> Option<usize> {
    (1..=MAX_CUT).rev().find(|&k| TruncatedFockSpace::new(n_modes, k).is_ok())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_guard() {
        assert_eq!(TruncatedFockSpace::new(6, 8).unwrap().dimension, 531_441);
        assert!(TruncatedFockSpace::new(7, 1).is_err());
        assert!(TruncatedFockSpace::new(2, 9).is_err());
        let s = TruncatedFockSpace::new(3, 4).unwrap();
        for i in [0, 7, 124] {
            assert_eq!(s.index_of(&s.occupations(i)), i);
        }
    }

    #[test]
    fn zero_exponent_is_zero_operator() {
        let s = TruncatedFockSpace::new(2, 3).unwrap();
        let op = build_hamiltonian_exponent(&CMatrix::zeros(1, 1), &s, OracleKind::TwoBeam).unwrap();
        assert!(op.triplets().is_empty());
    }

    #[test]
    fn single_pair_structure() {
        let r = 0.37;
        let s = TruncatedFockSpace::new(2, 2).unwrap();
        let op = build_hamiltonian_exponent(&CMatrix::from_element(1, 1, c(r)), &s, OracleKind::TwoBeam).unwrap();
        let (vac, one) = (s.index_of(&[0, 0]), s.index_of(&[1, 1]));
        assert_eq!(op.matrix_element(one, vac), c(-r));
        assert_eq!(op.matrix_element(vac, one), c(r));
        let two = s.index_of(&[2, 2]);
        assert!((op.matrix_element(two, one) - c(-2.0 * r)).norm() < 1e-15);
        // only |nn⟩ ↔ |n±1,n±1⟩ couplings
        for (row, col, _) in op.triplets() {
            let (a, b) = (s.occupations(row), s.occupations(col));
            assert_eq!(a[0] as i64 - b[0] as i64, a[1] as i64 - b[1] as i64);
            assert_eq!((a[0] as i64 - b[0] as i64).abs(), 1);
        }
    }

    #[test]
    fn exponent_is_anti_hermitian() {
        let xi = CMatrix::from_row_slice(2, 2, &[Complex64::new(0.3, 0.1), c(0.1), Complex64::new(0.0, 0.2), c(0.25)]);
        for kind in [OracleKind::TwoBeam, OracleKind::Degenerate] {
            let modes = if kind == OracleKind::TwoBeam { 4 } else { 2 };
            let s = TruncatedFockSpace::new(modes, 3).unwrap();
            let op = build_hamiltonian_exponent(&xi, &s, kind).unwrap();
            for (row, col, v) in op.triplets() {
                assert_eq!(op.matrix_element(col, row), -v.conj(), "{row} {col}");
            }
        }
    }

    #[test]
    fn single_mode_mean_photons() {
        let s = TruncatedFockSpace::new(2, 8).unwrap();
        // |8,8⟩ amplitude is sech·tanh⁸ ≈ 1.8e-3
        let rep = vacuum_statistics(&CMatrix::from_element(1, 1, c(0.5)), &s, OracleKind::TwoBeam, 1e-2).unwrap();
        assert!((rep.nbar_total - 0.5f64.sinh().powi(2)).abs() < 1e-4);
        assert!((rep.nbar_total - 0.27154).abs() < 1e-4);
        assert!(rep.conclusive);
    }

    #[test]
    fn vacuum_is_exact() {
        let s = TruncatedFockSpace::new(4, 2).unwrap();
        let rep = vacuum_statistics(&CMatrix::zeros(2, 2), &s, OracleKind::TwoBeam, 1e-3).unwrap();
        assert_eq!(rep.nbar_total, 0.0);
        assert_eq!(rep.truncation_bound, 0.0);
        assert!((rep.var_x1[(0, 0)].re - 0.25).abs() < 1e-16);
        assert!(rep.var_x1[(0, 1)].norm() < 1e-16);
    }
}
