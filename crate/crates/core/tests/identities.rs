mod common;

use common::*;
use multimode_squeeze::eigenmodes::{decompose, eigenmode_report};
use multimode_squeeze::linalg::{c, frob, identity, trace};
use multimode_squeeze::squeeze::*;
use proptest::prelude::*;

fn arb_xi() -> impl Strategy<Value = (u64, usize, f64)> {
    (any::<u64>(), 1usize..=8, 0.01f64..1.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_of_variance_matrix_is_scalar_variance((seed, n, norm) in arb_xi()) {
        let sq = SqueezeMatrix::two_beam(complex_symmetric(&mut rng(seed), n, norm)).unwrap();
        let (v1, v2) = quadrature_variance_matrices(&sq).unwrap();
        let (s1, s2) = scalar_quadrature_variance(&sq).unwrap();
        prop_assert!((trace(&v1).re - s1).abs() < 1e-10);
        prop_assert!((trace(&v2).re - s2).abs() < 1e-10);
    }

    #[test]
    fn bogoliubov_preserves_commutators((seed, n, norm) in arb_xi()) {
        let sq = SqueezeMatrix::two_beam(complex_symmetric(&mut rng(seed), n, norm)).unwrap();
        let b = bogoliubov_matrix(&sq).unwrap();
        let k = commutator_metric(n);
        prop_assert!(frob(&(&b * &k * b.adjoint() - &k)) < 1e-12);
    }

    #[test]
    fn variance_product_at_least_vacuum((seed, n, norm) in arb_xi()) {
        let sq = SqueezeMatrix::two_beam(complex_symmetric(&mut rng(seed), n, norm)).unwrap();
        let (v1, v2) = quadrature_variance_matrices(&sq).unwrap();
        for i in 0..n {
            prop_assert!(v1[(i, i)].re * v2[(i, i)].re >= 1.0 / 16.0 - 1e-12);
        }
    }

    #[test]
    fn compact_form_matches_for_symmetric_normal((seed, n, norm) in arb_xi()) {
        let sq = SqueezeMatrix::two_beam(symmetric_normal(&mut rng(seed), n, norm)).unwrap();
        let (a1, a2) = scalar_quadrature_variance(&sq).unwrap();
        let (b1, b2) = scalar_quadrature_variance_compact(&sq).unwrap();
        prop_assert!((a1 - b1).abs() < 1e-10 && (a2 - b2).abs() < 1e-10);
    }

    #[test]
    fn real_symmetric_is_minimum_uncertainty((seed, n, norm) in arb_xi()) {
        let sq = SqueezeMatrix::two_beam(real_symmetric(&mut rng(seed), n, norm)).unwrap();
        let (v1, v2) = quadrature_variance_matrices(&sq).unwrap();
        prop_assert!(max_abs(&cross_covariance(&sq).unwrap()) < 1e-12);
        let dev = max_abs(&(&v1 * &v2 - identity(n) * c(1.0 / 16.0)));
        prop_assert!(dev < 1e-12, "{dev:e}, σ = {:?}", sq.singular_values());
    }

    #[test]
    fn eigenmode_variances_match_rotated_variances((seed, n, norm) in arb_xi()) {
        let sq = SqueezeMatrix::two_beam(real_symmetric_psd(&mut rng(seed), n, norm)).unwrap();
        let dec = decompose(&sq).unwrap();
        let (v1, _) = quadrature_variance_matrices(&sq).unwrap();
        let rotated = dec.u.adjoint() * v1 * &dec.u;
        for (i, s) in eigenmode_report(&dec).iter().enumerate() {
            prop_assert!((rotated[(i, i)].re - s.variance_minus).abs() < 1e-10);
        }
    }
}

#[test]
fn psd_variances_are_exponentials_up_to_25_modes() {
    let mut r = rng(7);
    for n in [1, 4, 10, 25] {
        let sq = SqueezeMatrix::two_beam(real_symmetric_psd(&mut r, n, 1.2)).unwrap();
        let (v1, v2) = quadrature_variance_matrices(&sq).unwrap();
        assert!(max_abs(&(&v1 - sq.fn_r(|x| 0.25 * (-2.0 * x).exp()))) < 1e-12);
        assert!(max_abs(&(&v2 - sq.fn_r(|x| 0.25 * (2.0 * x).exp()))) < 1e-12);
    }
}

#[test]
fn mean_photons_and_pairs_are_consistent() {
    let mut r = rng(11);
    let sq = SqueezeMatrix::two_beam(complex_symmetric(&mut r, 6, 0.8)).unwrap();
    let rep = two_beam_statistics(&sq).unwrap();
    assert!((trace(&rep.nbar_matrix).re - rep.nbar_total).abs() < 1e-12);
    let sum: f64 = rep.pair_normalized.iter().sum();
    assert!((sum - 1.0).abs() < 1e-12);
    // number variance of one beam is ‖M‖²_F
    let m2: f64 = rep.pair_matrix.iter().map(|z| z.norm_sqr()).sum();
    assert!((rep.number_variance - m2).abs() < 1e-12 * m2, "{} vs {m2}", rep.number_variance);
}
