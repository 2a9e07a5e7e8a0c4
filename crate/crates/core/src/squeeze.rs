//! Closed-form statistics of the multimode squeezed vacuum.
//!
//! For the two-beam squeezer S(ξ) = exp(b̃ξ†a − ã†ξb†) everything follows from
//! the left polar decomposition ξ = R e^{iΘ}. Matrix functions of R use its
//! eigenbasis (the left singular vectors); functions of R̃ = Rᵀ are transposes.
//! Products are kept in the operand order of the Bogoliubov expressions because
//! R and e^{iΘ} need not commute.
//!
//! These formulas are exact for symmetric ξ (identical signal and idler
//! geometry), which covers every assembled coupling matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupling::InteractionType;
use crate::linalg::{self, c, identity, spectral, trace, Polar};
use crate::modes::{ModeBasis, ModeIndex};
use crate::{CMatrix, Error, Result};

/// Vacuum variance of one joint (two-beam) or single-beam quadrature.
pub const VACUUM_VARIANCE: f64 = 0.25;

/// ξ with its cached polar factors.
#[derive(Debug, Clone)]
pub struct SqueezeMatrix {
    xi: CMatrix,
    basis: ModeBasis,
    interaction: InteractionType,
    polar: Polar,
}

impl SqueezeMatrix {
    pub fn new(xi: CMatrix, basis: ModeBasis, interaction: InteractionType) -> Result<Self> {
        if xi.nrows() != basis.len() || xi.ncols() != basis.len() {
            return Err(Error::InvalidArgument(format!(
                "ξ is {}×{} but the basis has {} modes",
                xi.nrows(),
                xi.ncols(),
                basis.len()
            )));
        }
        let polar = linalg::polar(&xi)?;
        Ok(Self { xi, basis, interaction, polar })
    }

    /// Convenience constructor over a p-only basis (ℓ_max = 0).
    pub fn two_beam(xi: CMatrix) -> Result<Self> {
        let n = xi.nrows() as i64;
        Self::new(xi, ModeBasis::new(0, (n - 1).max(0))?, InteractionType::FullCrosstalk)
    }

    pub fn degenerate(xi: CMatrix) -> Result<Self> {
        let n = xi.nrows() as i64;
        Self::new(xi, ModeBasis::new(0, (n - 1).max(0))?, InteractionType::DegenerateSingleBeam)
    }

    pub fn xi(&self) -> &CMatrix {
        &self.xi
    }

    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    pub fn interaction(&self) -> InteractionType {
        self.interaction
    }

    pub fn dim(&self) -> usize {
        self.xi.nrows()
    }

    pub fn polar_r(&self) -> &CMatrix {
        &self.polar.r
    }

    /// e^{iΘ}.
    pub fn polar_phase(&self) -> &CMatrix {
        &self.polar.phase
    }

    pub fn theta(&self) -> &CMatrix {
        &self.polar.theta
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.polar.svd.sigma
    }

    /// f(R) through the eigenbasis of R.
    pub fn fn_r(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        spectral(&self.polar.svd.w, self.polar.svd.sigma.iter().map(|&s| c(f(s))))
    }

    fn require_two_beam(&self, what: &str) -> Result<()> {
        if self.interaction.is_two_beam() {
            Ok(())
        } else {
            Err(Error::Domain(format!("{what} applies to two-beam interactions; use degenerate_statistics")))
        }
    }
}

/// Returns (R, e^{iΘ}, Θ).
pub fn polar_decompose(xi: &CMatrix) -> Result<(CMatrix, CMatrix, CMatrix)> {
    let p = linalg::polar(xi)?;
    Ok((p.r, p.phase, p.theta))
}

/// Total quadrature variances (v₁, v₂), from the unsimplified trace
/// ¼Tr{cosh²R̃ + sinh²R ∓ (cosh R̃ sinh R e^{iΘ} + sinh R cosh R̃ e^{−iΘ})}.
pub fn scalar_quadrature_variance(sq: &SqueezeMatrix) -> Result<(f64, f64)> {
    sq.require_two_beam("scalar_quadrature_variance")?;
    let ch_t = sq.fn_r(f64::cosh).transpose();
    let sh = sq.fn_r(f64::sinh);
    let p = sq.polar_phase();
    let base = &ch_t * &ch_t + &sh * &sh;
    let cross = &ch_t * &sh * p + &sh * &ch_t * p.adjoint();
    let v1 = 0.25 * trace(&(&base - &cross)).re;
    let v2 = 0.25 * trace(&(&base + &cross)).re;
    Ok((v1, v2))
}

/// Compact form ¼Tr{cosh 2R ∓ sinh 2R cos Θ}; agrees with
/// [`scalar_quadrature_variance`] for symmetric ξ.
pub fn scalar_quadrature_variance_compact(sq: &SqueezeMatrix) -> Result<(f64, f64)> {
    sq.require_two_beam("scalar_quadrature_variance_compact")?;
    let p = sq.polar_phase();
    let cos_theta = (p + p.adjoint()) * c(0.5);
    let ch2 = sq.fn_r(|x| (2.0 * x).cosh());
    let sc = sq.fn_r(|x| (2.0 * x).sinh()) * cos_theta;
    Ok((0.25 * trace(&(&ch2 - &sc)).re, 0.25 * trace(&(&ch2 + &sc)).re))
}

/// V₁,₂ = ⅛[cosh 2R + cosh 2R̃ ∓ (sinh 2R e^{iΘ} + sinh 2R̃ e^{−iΘ̃})].
pub fn quadrature_variance_matrices(sq: &SqueezeMatrix) -> Result<(CMatrix, CMatrix)> {
    sq.require_two_beam("quadrature_variance_matrices")?;
    let ch2 = sq.fn_r(|x| (2.0 * x).cosh());
    let sh2 = sq.fn_r(|x| (2.0 * x).sinh());
    let p = sq.polar_phase();
    let base = &ch2 + ch2.transpose();
    // e^{−iΘ̃} = (e^{−iΘ})ᵀ = conj(e^{iΘ})
    let cross = &sh2 * p + sh2.transpose() * p.conjugate();
    Ok(((&base - &cross) * c(0.125), (&base + &cross) * c(0.125)))
}

/// cov(X₁, X₂) = (i/4)[cosh 2R − cosh 2R̃ + sinh 2R e^{iΘ} − sinh 2R̃ e^{−iΘ̃}].
///
/// This equals ⟨X₁ᵢX₂ⱼ + X₂ⱼX₁ᵢ⟩, i.e. twice the symmetrized covariance; it is
/// the normalization under which V₁V₂ − ¼cov² = I/16 holds with equality.
pub fn cross_covariance(sq: &SqueezeMatrix) -> Result<CMatrix> {
    sq.require_two_beam("cross_covariance")?;
    let ch2 = sq.fn_r(|x| (2.0 * x).cosh());
    let sh2 = sq.fn_r(|x| (2.0 * x).sinh());
    let p = sq.polar_phase();
    let inner = &ch2 - ch2.transpose() + &sh2 * p - sh2.transpose() * p.conjugate();
    Ok(inner * Complex64::new(0.0, 0.25))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotonStatistics {
    /// sinh²R; entry (i, j) is ⟨a†ⱼ aᵢ⟩.
    pub nbar_matrix: CMatrix,
    pub nbar_total: f64,
    pub number_variance: f64,
    pub number_covariance: f64,
}

pub fn photon_statistics(sq: &SqueezeMatrix) -> Result<PhotonStatistics> {
    sq.require_two_beam("photon_statistics")?;
    let nbar_matrix = sq.fn_r(|x| x.sinh().powi(2));
    let nbar_total = trace(&nbar_matrix).re;
    let number_variance = 0.25 * trace(&sq.fn_r(|x| (2.0 * x).sinh().powi(2))).re;
    Ok(PhotonStatistics { nbar_matrix, nbar_total, number_variance, number_covariance: number_variance })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairCreation {
    /// M = ½ e^{−iΘ} sinh 2R.
    pub m: CMatrix,
    /// |Mᵢⱼ| / Σ|Mᵢⱼ| (all zeros for the vacuum).
    pub normalized_modulus: DMatrix<f64>,
}

pub fn normalized_modulus(m: &CMatrix) -> DMatrix<f64> {
    let total: f64 = m.iter().map(|z| z.norm()).sum();
    m.map(|z| if total > 0.0 { z.norm() / total } else { 0.0 })
}

pub fn pair_creation_matrix(sq: &SqueezeMatrix) -> Result<PairCreation> {
    sq.require_two_beam("pair_creation_matrix")?;
    let m = sq.polar_phase().adjoint() * sq.fn_r(|x| (2.0 * x).sinh()) * c(0.5);
    let normalized_modulus = normalized_modulus(&m);
    Ok(PairCreation { m, normalized_modulus })
}

/// Bogoliubov transform on (a, b, a†, b†):
/// a → cosh R a − sinh R e^{iΘ} b†,   b → cosh R b − sinh R e^{iΘ} a†,
/// a† → cosh R̃ a† − sinh R̃ e^{−iΘ̃} b, b† → cosh R̃ b† − sinh R̃ e^{−iΘ̃} a.
pub fn bogoliubov_matrix(sq: &SqueezeMatrix) -> Result<CMatrix> {
    sq.require_two_beam("bogoliubov_matrix")?;
    let n = sq.dim();
    let ch = sq.fn_r(f64::cosh);
    let sh = sq.fn_r(f64::sinh);
    let p = sq.polar_phase();
    let ch_t = ch.transpose();
    let mix = -(&sh * p);
    let mix_t = -(sh.transpose() * p.conjugate());
    let mut b = CMatrix::zeros(4 * n, 4 * n);
    let mut put = |row: usize, col: usize, m: &CMatrix| b.view_mut((row * n, col * n), (n, n)).copy_from(m);
    put(0, 0, &ch);
    put(0, 3, &mix);
    put(1, 1, &ch);
    put(1, 2, &mix);
    put(2, 2, &ch_t);
    put(2, 1, &mix_t);
    put(3, 3, &ch_t);
    put(3, 0, &mix_t);
    Ok(b)
}

/// diag(I₂N, −I₂N).
pub fn commutator_metric(n: usize) -> CMatrix {
    CMatrix::from_fn(4 * n, 4 * n, |i, j| if i != j { c(0.0) } else if i < 2 * n { c(1.0) } else { c(-1.0) })
}

/// Everything the closed forms say about one squeezed state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateReport {
    pub interaction: InteractionType,
    pub modes: Vec<ModeIndex>,
    #[serde(with = "linalg::serde_cmatrix")]
    pub var_x1: CMatrix,
    #[serde(with = "linalg::serde_cmatrix")]
    pub var_x2: CMatrix,
    pub scalar_var: (f64, f64),
    #[serde(with = "linalg::serde_cmatrix")]
    pub cross_cov: CMatrix,
    #[serde(with = "linalg::serde_cmatrix")]
    pub nbar_matrix: CMatrix,
    pub nbar_total: f64,
    pub number_variance: f64,
    pub number_covariance: f64,
    #[serde(with = "linalg::serde_cmatrix")]
    pub pair_matrix: CMatrix,
    #[serde(with = "linalg::serde_rmatrix")]
    pub pair_normalized: DMatrix<f64>,
    /// 10·log₁₀(V₁,ᵢᵢ / ¼).
    pub squeezing_db_per_mode: Vec<f64>,
}

impl StateReport {
    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn position(&self, idx: ModeIndex) -> Option<usize> {
        self.modes.iter().position(|m| *m == idx)
    }
}

fn db_per_mode(v1: &CMatrix) -> Vec<f64> {
    v1.diagonal().iter().map(|v| 10.0 * (v.re / VACUUM_VARIANCE).log10()).collect()
}

/// Full report for a two-beam squeezer.
pub fn two_beam_statistics(sq: &SqueezeMatrix) -> Result<StateReport> {
    sq.require_two_beam("two_beam_statistics")?;
    let (var_x1, var_x2) = quadrature_variance_matrices(sq)?;
    let photons = photon_statistics(sq)?;
    let pair = pair_creation_matrix(sq)?;
    Ok(StateReport {
        interaction: sq.interaction(),
        modes: sq.basis().order().to_vec(),
        squeezing_db_per_mode: db_per_mode(&var_x1),
        scalar_var: scalar_quadrature_variance(sq)?,
        cross_cov: cross_covariance(sq)?,
        var_x1,
        var_x2,
        nbar_matrix: photons.nbar_matrix,
        nbar_total: photons.nbar_total,
        number_variance: photons.number_variance,
        number_covariance: photons.number_covariance,
        pair_matrix: pair.m,
        pair_normalized: pair.normalized_modulus,
    })
}

/// Report for the single-beam squeezer exp(ã ξ† a − ã† ξ a†) with symmetric ξ.
///
/// With the Takagi factorization ξ = VΣVᵀ each Takagi mode is a single-mode
/// squeezed vacuum with parameter ζᵢ = 2σᵢ (both orderings of a pair appear in
/// the exponent). The output operators are a → A a + B a† with
/// A = V cosh Z V†, B = −V sinh Z Vᵀ; quadratures are X₁ = (a + a†)/2,
/// X₂ = (a − a†)/2i, so the vacuum variance is ¼ as for the joint quadratures.
/// `cross_cov` is ⟨X₁ᵢX₂ⱼ + X₂ⱼX₁ᵢ⟩, `pair_matrix` is −⟨a†a†⟩, and
/// `number_covariance` equals the number variance (a single beam).
pub fn degenerate_statistics(sq: &SqueezeMatrix) -> Result<StateReport> {
    if sq.interaction().is_two_beam() {
        return Err(Error::Domain("degenerate_statistics needs a DegenerateSingleBeam interaction".into()));
    }
    let t = linalg::takagi(sq.xi())?;
    let zeta: Vec<f64> = t.sigma.iter().map(|s| 2.0 * s).collect();
    let a = spectral(&t.v, zeta.iter().map(|z| c(z.cosh())));
    let mut vs = t.v.clone();
    for (mut col, z) in vs.column_iter_mut().zip(&zeta) {
        col *= c(-z.sinh());
    }
    let b = &vs * t.v.transpose();
    let f = &a * b.transpose(); // ⟨aᵢ aⱼ⟩
    let g = b.conjugate() * b.transpose(); // ⟨a†ᵢ aⱼ⟩
    let n = sq.dim();
    let id = identity(n);
    let f_re = &f + f.conjugate();
    let normal = &id + &g + g.transpose();
    let var_x1 = (&normal + &f_re) * c(0.25);
    let var_x2 = (&normal - &f_re) * c(0.25);
    let cross_cov = (&f - f.conjugate() + &g - g.transpose()) * Complex64::new(0.0, -0.5);
    let nbar_matrix = g.transpose();
    let nbar_total = trace(&nbar_matrix).re;
    let number_variance: f64 = zeta.iter().map(|z| 0.5 * (2.0 * z).sinh().powi(2)).sum();
    let pair_matrix = -f.conjugate();
    Ok(StateReport {
        interaction: sq.interaction(),
        modes: sq.basis().order().to_vec(),
        squeezing_db_per_mode: db_per_mode(&var_x1),
        scalar_var: (trace(&var_x1).re, trace(&var_x2).re),
        pair_normalized: normalized_modulus(&pair_matrix),
        var_x1,
        var_x2,
        cross_cov,
        nbar_matrix,
        nbar_total,
        number_variance,
        number_covariance: number_variance,
        pair_matrix,
    })
}

/// Dispatches on the interaction type.
pub fn state_report(sq: &SqueezeMatrix) -> Result<StateReport> {
    if sq.interaction().is_two_beam() {
        two_beam_statistics(sq)
    } else {
        degenerate_statistics(sq)
    }
}
