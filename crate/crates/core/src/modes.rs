//! Laguerre-Gauss amplitudes and the canonical mode ordering.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quadrature::gauss_laguerre;
use crate::{Error, Result};

/// LG index: azimuthal `ell`, radial `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub ell: i32,
    pub p: u32,
}

impl ModeIndex {
    pub const fn new(ell: i32, p: u32) -> Self {
        Self { ell, p }
    }

    pub fn abs_ell(&self) -> u32 {
        self.ell.unsigned_abs()
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l={},p={}", self.ell, self.p)
    }
}

/// Modes with |ℓ| ≤ ell_max and p ≤ p_max; ℓ ascending from −ell_max, p fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeBasis {
    ell_max: u32,
    p_max: u32,
    order: Vec<ModeIndex>,
}

impl ModeBasis {
    pub fn new(ell_max: i64, p_max: i64) -> Result<Self> {
        if ell_max < 0 || p_max < 0 {
            return Err(Error::InvalidArgument(format!(
                "basis bounds must be non-negative (ell_max={ell_max}, p_max={p_max})"
            )));
        }
        if ell_max > 1000 || p_max > 1000 {
            return Err(Error::InvalidArgument("basis bounds above 1000 are not supported".into()));
        }
        let (lm, pm) = (ell_max as i32, p_max as u32);
        let order = (-lm..=lm)
            .flat_map(|ell| (0..=pm).map(move |p| ModeIndex { ell, p }))
            .collect();
        Ok(Self { ell_max: lm as u32, p_max: pm, order })
    }

    pub fn ell_max(&self) -> u32 {
        self.ell_max
    }

    pub fn p_max(&self) -> u32 {
        self.p_max
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[ModeIndex] {
        &self.order
    }

    pub fn contains(&self, idx: ModeIndex) -> bool {
        idx.abs_ell() <= self.ell_max && idx.p <= self.p_max
    }

    pub fn position(&self, idx: ModeIndex) -> Option<usize> {
        if !self.contains(idx) {
            return None;
        }
        let block = (idx.ell + self.ell_max as i32) as usize;
        Some(block * (self.p_max as usize + 1) + idx.p as usize)
    }

    pub fn labels(&self) -> Vec<String> {
        self.order.iter().map(ToString::to_string).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct BasisRepr {
    ell_max: u32,
    p_max: u32,
}

impl Serialize for ModeBasis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BasisRepr { ell_max: self.ell_max, p_max: self.p_max }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ModeBasis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = BasisRepr::deserialize(d)?;
        ModeBasis::new(r.ell_max.into(), r.p_max.into()).map_err(serde::de::Error::custom)
    }
}

/// Gaussian beam parameters. `rayleigh_zr` is derived and kept consistent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeamGeometry {
    pub wavelength: f64,
    pub waist_w0: f64,
    pub focus_z: f64,
    pub rayleigh_zr: f64,
}

impl BeamGeometry {
    pub fn new(wavelength: f64, waist_w0: f64, focus_z: f64) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::InvalidArgument(format!("wavelength must be positive, got {wavelength}")));
        }
        if !(waist_w0 > 0.0 && waist_w0.is_finite()) {
            return Err(Error::InvalidArgument(format!("waist_w0 must be positive, got {waist_w0}")));
        }
        if !focus_z.is_finite() {
            return Err(Error::InvalidArgument("focus_z must be finite".into()));
        }
        Ok(Self { wavelength, waist_w0, focus_z, rayleigh_zr: PI * waist_w0 * waist_w0 / wavelength })
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// w(z) with z relative to the focus.
    pub fn width(&self, z: f64) -> f64 {
        let q = z / self.rayleigh_zr;
        self.waist_w0 * (1.0 + q * q).sqrt()
    }

    pub fn gouy(&self, z: f64) -> f64 {
        (z / self.rayleigh_zr).atan()
    }

    /// Coefficient c in the curvature phase exp(−i c r²), z relative to the focus.
    pub fn curvature(&self, z: f64) -> f64 {
        self.wavenumber() * z / (2.0 * (z * z + self.rayleigh_zr * self.rayleigh_zr))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryRepr {
    wavelength: f64,
    waist_w0: f64,
    #[serde(default)]
    focus_z: f64,
    #[serde(default)]
    rayleigh_zr: Option<f64>,
}

impl<'de> Deserialize<'de> for BeamGeometry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = GeometryRepr::deserialize(d)?;
        let g = BeamGeometry::new(r.wavelength, r.waist_w0, r.focus_z).map_err(serde::de::Error::custom)?;
        if let Some(zr) = r.rayleigh_zr {
            if (zr - g.rayleigh_zr).abs() > 1e-12 * g.rayleigh_zr {
                return Err(serde::de::Error::custom(format!(
                    "rayleigh_zr {zr} inconsistent with waist and wavelength ({})",
                    g.rayleigh_zr
                )));
            }
        }
        Ok(g)
    }
}

/// Generalized Laguerre polynomial L_p^α(x) by the three-term recurrence.
pub fn laguerre(p: u32, alpha: f64, x: f64) -> f64 {
    let (mut l0, mut l1) = (1.0, 1.0 + alpha - x);
    if p == 0 {
        return l0;
    }
    for k in 1..p {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0 + alpha - x) * l1 - (kf + alpha) * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// C_{ℓ,p} = sqrt(2 p! / (π (|ℓ|+p)!)).
pub fn normalization(idx: ModeIndex) -> f64 {
    // p!/(|ℓ|+p)! = 1/((p+1)(p+2)…(p+|ℓ|))
    let ratio: f64 = (1..=idx.abs_ell()).map(|k| 1.0 / (idx.p + k) as f64).product();
    (2.0 * ratio / PI).sqrt()
}

/// Everything in u_{ℓ,p} except exp(−r²/w²) and e^{iℓφ}; z relative to focus.
pub fn radial_factor(idx: ModeIndex, r: f64, z: f64, geom: &BeamGeometry) -> Complex64 {
    let w = geom.width(z);
    let x = 2.0 * r * r / (w * w);
    let al = idx.abs_ell();
    let envelope = normalization(idx) / w * x.sqrt().powi(al as i32) * laguerre(idx.p, al as f64, x);
    let phase = (2 * idx.p + al + 1) as f64 * geom.gouy(z) - geom.curvature(z) * r * r;
    Complex64::from_polar(envelope, phase)
}

/// Generalized Laguerre polynomial at a complex argument.
pub fn laguerre_complex(p: u32, alpha: f64, x: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let (mut l0, mut l1) = (one, one * (1.0 + alpha) - x);
    if p == 0 {
        return l0;
    }
    for k in 1..p {
        let kf = k as f64;
        let l2 = (l1 * (2.0 * kf + 1.0 + alpha) - x * l1 - l0 * (kf + alpha)) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// C/w · (√2ρ/w)^{|ℓ|} · L_p^{|ℓ|}(2ρ²/w²): the real-coefficient polynomial part of
/// a mode at width w, continued to complex radius ρ.
pub fn lg_polynomial(idx: ModeIndex, rho: Complex64, w: f64) -> Complex64 {
    let al = idx.abs_ell();
    let x = rho * rho * (2.0 / (w * w));
    (rho * (2f64.sqrt() / w)).powu(al) * laguerre_complex(idx.p, al as f64, x) * (normalization(idx) / w)
}

/// u_{ℓ,p}(r, φ, z), z relative to the focus.
pub fn lg_amplitude(idx: ModeIndex, r: f64, phi: f64, z: f64, geom: &BeamGeometry) -> Complex64 {
    let w = geom.width(z);
    let gauss = (-r * r / (w * w)).exp();
    radial_factor(idx, r, z, geom) * gauss * Complex64::from_polar(1.0, idx.ell as f64 * phi)
}

/// ∫∫ u_a* u_b r dr dφ at fixed z (relative to focus), with node doubling.
pub fn transverse_inner_product(a: ModeIndex, b: ModeIndex, z: f64, geom: &BeamGeometry) -> Result<Complex64> {
    if a.ell != b.ell {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let w = geom.width(z);
    // t = 2r²/w² turns the Gaussian product into e^{-t}; r dr = w²/4 dt
    let eval = |n: usize| {
        let rule = gauss_laguerre(n);
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, wt) in rule.nodes.iter().zip(&rule.weights) {
            let r = w * (t / 2.0).sqrt();
            acc += radial_factor(a, r, z, geom).conj() * radial_factor(b, r, z, geom) * *wt;
        }
        acc * (2.0 * PI * w * w / 4.0)
    };
    let tol = 1e-12;
    let mut n = 16;
    let mut prev = eval(n);
    while n < 512 {
        n *= 2;
        let cur = eval(n);
        let residual = (cur - prev).norm();
        if residual <= tol * cur.norm().max(1.0) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature { residual: (eval(n) - eval(n / 2)).norm(), tolerance: tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom() -> BeamGeometry {
        BeamGeometry::new(0.795, 80.0, 0.0).unwrap()
    }

    #[test]
    fn basis_examples() {
        let b = ModeBasis::new(0, 0).unwrap();
        assert_eq!(b.order(), &[ModeIndex::new(0, 0)]);
        let b = ModeBasis::new(1, 2).unwrap();
        assert_eq!(b.len(), 9);
        assert_eq!(&b.order()[..4], &[ModeIndex::new(-1, 0), ModeIndex::new(-1, 1), ModeIndex::new(-1, 2), ModeIndex::new(0, 0)]);
        let b = ModeBasis::new(2, 1).unwrap();
        assert_eq!(b.len(), 10);
        assert_eq!(b.position(ModeIndex::new(0, 0)), Some(4));
        for (i, m) in b.order().iter().enumerate() {
            assert_eq!(b.position(*m), Some(i));
        }
        assert!(ModeBasis::new(-1, 0).is_err());
        assert!(ModeBasis::new(0, -3).is_err());
    }

    #[test]
    fn amplitude_on_axis() {
        let g = geom();
        let u = lg_amplitude(ModeIndex::new(0, 0), 0.0, 0.3, 0.0, &g);
        assert!((u.re - (2.0 / PI).sqrt() / 80.0).abs() < 1e-16);
        assert_eq!(u.im, 0.0);
        for z in [-1e4, 0.0, 3e4] {
            assert_eq!(lg_amplitude(ModeIndex::new(1, 0), 0.0, 0.0, z, &g).norm(), 0.0);
        }
    }

    #[test]
    fn gouy_phase_at_rayleigh_range() {
        let g = geom();
        let idx = ModeIndex::new(1, 1);
        let r = 1e-3;
        let u0 = radial_factor(idx, r, 0.0, &g);
        let u1 = radial_factor(idx, r, g.rayleigh_zr, &g);
        let ratio = u1 / u0;
        // e^{iπ}, up to the tiny curvature phase at r = 1e-3 μm
        assert!((ratio.arg().abs() - PI).abs() < 1e-6, "{}", ratio.arg());
    }

    #[test]
    fn laguerre_matches_explicit_forms() {
        let x = 0.7;
        assert!((laguerre(2, 0.0, x) - (x * x - 4.0 * x + 2.0) / 2.0).abs() < 1e-15);
        assert!((laguerre(2, 1.0, x) - (x * x / 2.0 - 3.0 * x + 3.0)).abs() < 1e-14);
    }

    #[test]
    fn inner_product_examples() {
        let g = geom();
        let n = transverse_inner_product(ModeIndex::new(0, 0), ModeIndex::new(0, 0), 0.0, &g).unwrap();
        assert!((n - 1.0).norm() < 1e-10);
        let o = transverse_inner_product(ModeIndex::new(1, 0), ModeIndex::new(-1, 0), 0.0, &g).unwrap();
        assert_eq!(o, Complex64::new(0.0, 0.0));
        let o = transverse_inner_product(ModeIndex::new(0, 1), ModeIndex::new(0, 0), 2.0 * g.rayleigh_zr, &g).unwrap();
        assert!(o.norm() < 1e-8);
    }

    #[test]
    fn waist_scaling_invariance() {
        let (g1, s) = (geom(), 1.7);
        let g2 = BeamGeometry::new(0.795, 80.0 * s, 0.0).unwrap();
        let idx = ModeIndex::new(0, 0);
        for (r, zf) in [(10.0, 0.3), (55.0, -1.2), (120.0, 2.0)] {
            let z = zf * g1.rayleigh_zr;
            let a = lg_amplitude(idx, r, 0.0, z, &g1).norm() * g1.width(z);
            let b = lg_amplitude(idx, s * r, 0.0, s * s * z, &g2).norm() * g2.width(s * s * z);
            assert!((a - b).abs() < 1e-12 * a, "{a} {b}");
        }
    }

    #[test]
    fn geometry_serde_checks_rayleigh() {
        let g = BeamGeometry::new(0.405, 200.0, 10.0).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        let back: BeamGeometry = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        let bad = r#"{"wavelength":0.405,"waist_w0":200.0,"focus_z":0.0,"rayleigh_zr":1.0}"#;
        assert!(serde_json::from_str::<BeamGeometry>(bad).is_err());
    }
}
