mod common;

use birkhoff_spectra::linalg::Lu;
use birkhoff_spectra::spectral::{
    count_eigs_in_interval, eigenvalues, esd_circular_distance, log_abs_det, log_abs_det_complex, matching_distance,
    quarter_circle_cdf, quarter_circle_density, singular_values, stieltjes_transform,
};
use birkhoff_spectra::{ComplexMatrix, RngStream};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn oracle_suite_holds(n in 1usize..=50, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed);
        let e = common::oracle_instance(n, &mut rng);
        prop_assert!(e.trace < 1e-7, "{e:?}");
        prop_assert!(e.det < 1e-8, "{e:?}");
        prop_assert!(e.similarity < 1e-6, "{e:?}");
        prop_assert!(e.companion < 1e-10, "{e:?}");
    }

    #[test]
    fn real_spectra_are_conjugation_closed(n in 1usize..=40, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed);
        let spec = eigenvalues(&common::random_dense(n, &mut rng)).unwrap().values;
        let conj: Vec<Complex64> = spec.iter().map(|z| z.conj()).collect();
        prop_assert!(matching_distance(&spec, &conj).unwrap() < 1e-7);
    }

    #[test]
    fn log_abs_det_agrees_with_lu(n in 1usize..=30, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed);
        let re = common::random_dense(n, &mut rng);
        let im = common::random_dense(n, &mut rng);
        let m = ComplexMatrix::new(re.clone(), im).unwrap();
        let (want, _) = Lu::factor(&m.to_rows()).unwrap().log_det();
        let got = log_abs_det_complex(&m).unwrap();
        prop_assert!(!got.is_singular);
        prop_assert!((got.value - want).abs() < 1e-8 * want.abs().max(1.0));
        let (want_re, _) = Lu::factor(&ComplexMatrix::from_real(re.clone()).to_rows()).unwrap().log_det();
        prop_assert!((log_abs_det(&re).unwrap().value - want_re).abs() < 1e-8 * want_re.abs().max(1.0));
    }

    #[test]
    fn singular_values_are_sorted_and_frobenius(n in 1usize..=30, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed);
        let m = common::random_dense(n, &mut rng);
        let sv = singular_values(&m);
        prop_assert!(sv.values().windows(2).all(|w| w[0] >= w[1]));
        let f2: f64 = sv.squares().iter().sum();
        prop_assert!((f2 - m.frobenius_norm().powi(2)).abs() < 1e-10 * f2.max(1.0));
    }

    #[test]
    fn stieltjes_bounds_interval_count(
        values in proptest::collection::vec(-3.0f64..3.0, 1..60),
        center in -3.0f64..3.0,
        width in 0.05f64..2.0,
    ) {
        // N_J <= (5/4) n |J| Im s(E + i|J|) on the interval of width |J| around E.
        let (lo, hi) = (center - width / 2.0, center + width / 2.0);
        let count = count_eigs_in_interval(&values, lo, hi).unwrap() as f64;
        let s = stieltjes_transform(&values, Complex64::new(center, width)).unwrap();
        prop_assert!(count <= 1.25 * values.len() as f64 * width * s.im + 1e-9);
    }
}

#[test]
fn quarter_circle_derivative_matches_density() {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut x = 0.1;
    while x <= 1.9 {
        let fd = (quarter_circle_cdf(x + h) - quarter_circle_cdf(x - h)) / (2.0 * h);
        worst = worst.max((fd - quarter_circle_density(x)).abs());
        x += 0.01;
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn ginibre_matrix_is_near_the_circle() {
    let n = 150;
    let mut rng = RngStream::new(11);
    // Uniform entries on [-sqrt3, sqrt3] have unit variance.
    let m = common::random_dense(n, &mut rng).scale(3f64.sqrt() / (n as f64).sqrt());
    let report = esd_circular_distance(&eigenvalues(&m).unwrap()).unwrap();
    assert!(report.max() < 0.1, "{report:?}");
}
