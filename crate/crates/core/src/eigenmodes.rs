//! Eigenmodes of squeezing for normal ξ.
//!
//! A normal ξ = U diag(λᵢe^{iθᵢ}) U† splits the multimode squeezer into
//! independent two-mode squeezers on a′ = U†a, b′ = Uᵀb, each with squeeze
//! parameter λᵢ.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, c, complete_basis, normality_residual};
use crate::squeeze::{SqueezeMatrix, VACUUM_VARIANCE};
use crate::{CMatrix, Error, Result};

/// Normality tolerance used by [`decompose`].
pub const NORMALITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenDecomposition {
    #[serde(with = "linalg::serde_cmatrix")]
    pub u: CMatrix,
    pub lambda: Vec<f64>,
    pub theta_prime: Vec<f64>,
    pub normality_residual: f64,
}

/// (‖ξξ† − ξ†ξ‖_F/‖ξ‖_F² < tol, residual).
pub fn is_normal(xi: &CMatrix, tol: f64) -> Result<(bool, f64)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let r = normality_residual(xi);
    Ok((r < tol, r))
}

fn fix_phase(v: &mut DVector<Complex64>) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(k) = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-12)) {
        let ph = v[k].conj() / v[k].norm();
        *v *= ph;
        v[k] = c(v[k].norm());
    }
}

pub fn decompose(sq: &SqueezeMatrix) -> Result<EigenDecomposition> {
    let xi = sq.xi();
    let (ok, residual) = is_normal(xi, NORMALITY_TOL)?;
    if !ok {
        return Err(Error::NotNormal { residual });
    }
    let n = xi.nrows();
    let (vals, q) = linalg::normal_eigen(xi)?;

    // cluster equal eigenvalues, then rebuild each cluster from the canonical basis
    let scale = vals.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tol = 1e-10 * scale;
    let mut cluster_of = vec![usize::MAX; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if cluster_of[i] != usize::MAX {
            continue;
        }
        let id = clusters.len();
        let members: Vec<usize> = (i..n).filter(|&j| cluster_of[j] == usize::MAX && (vals[j] - vals[i]).norm() <= tol).collect();
        for &j in &members {
            cluster_of[j] = id;
        }
        clusters.push(members);
    }

    let mut pairs: Vec<(Complex64, DVector<Complex64>)> = Vec::with_capacity(n);
    for members in &clusters {
        let mean: Complex64 = members.iter().map(|&j| vals[j]).sum::<Complex64>() / c(members.len() as f64);
        if members.len() == 1 {
            let mut v = q.column(members[0]).into_owned();
            fix_phase(&mut v);
            pairs.push((mean, v));
            continue;
        }
        let cols: Vec<DVector<Complex64>> = members.iter().map(|&j| q.column(j).into_owned()).collect();
        let projector = CMatrix::from_columns(&cols);
        let projector = &projector * projector.adjoint();
        let mut chosen: Vec<DVector<Complex64>> = Vec::new();
        for k in 0..n {
            if chosen.len() == members.len() {
                break;
            }
            let mut v = projector.column(k).into_owned();
            for _ in 0..2 {
                for u in &chosen {
                    let p = u.dotc(&v);
                    v -= u * p;
                }
            }
            let norm = v.norm();
            if norm > 1e-6 {
                chosen.push(v / c(norm));
            }
        }
        // numerically empty projection cannot happen for an orthonormal Q, but stay total
        let chosen = complete_basis(&chosen, n).into_iter().take(members.len());
        for mut v in chosen {
            fix_phase(&mut v);
            pairs.push((mean, v));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pairs[b].0.norm().total_cmp(&pairs[a].0.norm()).then(a.cmp(&b)));
    let cols: Vec<DVector<Complex64>> = order.iter().map(|&k| pairs[k].1.clone()).collect();
    let u = if n == 0 { CMatrix::zeros(0, 0) } else { CMatrix::from_columns(&cols) };
    // eigenvalues re-read from U†ξU so they match the final vectors
    let d = u.adjoint() * xi * &u;
    let lambda = (0..n).map(|i| d[(i, i)].norm()).collect();
    let theta_prime = (0..n).map(|i| if d[(i, i)].norm() > 0.0 { d[(i, i)].arg() } else { 0.0 }).collect();
    Ok(EigenDecomposition { u, lambda, theta_prime, normality_residual: residual })
}

/// Canonical two-mode squeezed-vacuum numbers for one eigenmode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenmodeStats {
    pub lambda: f64,
    pub variance_minus: f64,
    pub variance_plus: f64,
    pub nbar: f64,
    pub theta: f64,
}

impl EigenmodeStats {
    /// Squeezed variance relative to vacuum, e^{−2λ}.
    pub fn normalized_minus(&self) -> f64 {
        self.variance_minus / VACUUM_VARIANCE
    }

    pub fn db_minus(&self) -> f64 {
        10.0 * self.normalized_minus().log10()
    }
}

pub fn eigenmode_report(dec: &EigenDecomposition) -> Vec<EigenmodeStats> {
    dec.lambda
        .iter()
        .zip(&dec.theta_prime)
        .map(|(&l, &theta)| EigenmodeStats {
            lambda: l,
            variance_minus: VACUUM_VARIANCE * (-2.0 * l).exp(),
            variance_plus: VACUUM_VARIANCE * (2.0 * l).exp(),
            nbar: l.sinh().powi(2),
            theta,
        })
        .collect()
}

/// Row k (1-based) of U† as unit-norm pump coefficients.
pub fn eigenmode_pump(dec: &EigenDecomposition, k: usize) -> Result<Vec<Complex64>> {
    let n = dec.u.ncols();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("eigenmode index {k} outside 1..={n}")));
    }
    let row: Vec<Complex64> = dec.u.column(k - 1).iter().map(|z| z.conj()).collect();
    let norm = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(row.into_iter().map(|z| z / norm).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenmodeAmplitudes {
    pub lambda: f64,
    /// sech λ · tanhⁿ λ for n = 0..=n_max.
    pub amplitudes: Vec<f64>,
    /// 1 − Σ|cₙ|² = tanh^{2(n_max+1)} λ.
    pub norm_deficit: f64,
}

pub fn state_coefficients(dec: &EigenDecomposition, n_max: usize) -> Vec<EigenmodeAmplitudes> {
    dec.lambda
        .iter()
        .map(|&l| {
            let (sech, th) = (1.0 / l.cosh(), l.tanh());
            let amplitudes = (0..=n_max).map(|n| sech * th.powi(n as i32)).collect();
            EigenmodeAmplitudes { lambda: l, amplitudes, norm_deficit: th.powi(2 * (n_max as i32 + 1)) }
        })
        .collect()
}

/// ⟨a′†ᵢ b′†ⱼ⟩ in the eigenbasis given the LG-basis matrix ⟨a†ₖ b†ₗ⟩:
/// a′† = Uᵀa†, b′† = U†b†, so the result is Uᵀ P U*.
pub fn to_eigenbasis_pairs(dec: &EigenDecomposition, lg_pairs: &CMatrix) -> CMatrix {
    dec.u.transpose() * lg_pairs * dec.u.conjugate()
}
