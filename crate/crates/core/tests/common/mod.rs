#![allow(dead_code)]

use multimode_squeeze::linalg::c;
use multimode_squeeze::{CMatrix, Complex64};
use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss(r: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u: f64 = r.random::<f64>().max(f64::MIN_POSITIVE);
    let v: f64 = r.random();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

pub fn random_complex(r: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| Complex64::new(gauss(r), gauss(r)))
}

pub fn random_real(r: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| gauss(r))
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

pub fn with_norm(m: CMatrix, norm: f64) -> CMatrix {
    let s = spectral_norm(&m);
    if s == 0.0 { m } else { m * c(norm / s) }
}

/// Complex symmetric ξ with the given spectral norm.
pub fn complex_symmetric(r: &mut ChaCha8Rng, n: usize, norm: f64) -> CMatrix {
    let a = random_complex(r, n);
    with_norm(&a + a.transpose(), norm)
}

pub fn real_orthogonal(r: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    random_real(r, n).qr().q()
}

/// Q diag(d) Qᵀ with real orthogonal Q and complex d: symmetric and normal.
pub fn symmetric_normal(r: &mut ChaCha8Rng, n: usize, norm: f64) -> CMatrix {
    let q = real_orthogonal(r, n).map(c);
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| Complex64::new(gauss(r), gauss(r))));
    with_norm(&q * d * q.transpose(), norm)
}

pub fn real_symmetric(r: &mut ChaCha8Rng, n: usize, norm: f64) -> CMatrix {
    let a = random_real(r, n);
    with_norm((&a + a.transpose()).map(c), norm)
}

/// Real symmetric positive semidefinite: the symmetric members of the
/// Hermitian PSD family.
pub fn real_symmetric_psd(r: &mut ChaCha8Rng, n: usize, norm: f64) -> CMatrix {
    let a = random_real(r, n);
    with_norm((&a * a.transpose()).map(c), norm)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
