mod common;

use birkhoff_spectra::linalg::Lu;
use birkhoff_spectra::littlewood_offord::{
    cofactor_direction, cofactor_linear_form, cofactor_row, fit_rank_one_gap, gap_enumerate, small_ball_exact, Atom,
    Gap,
};
use birkhoff_spectra::{augment_minus_f, ComplexMatrix, RngStream};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn binom_mid(n: u64) -> f64 {
    (1..=n / 2).fold(1.0, |acc, k| acc * (n / 2 + k) as f64 / k as f64)
}

#[test]
fn erdos_bound_even_lengths() {
    for n in (10..=24).step_by(2) {
        let r = small_ball_exact(&vec![1.0; n], 0.0, Atom::BernoulliPm1).unwrap();
        let oracle = binom_mid(n as u64) / 2f64.powi(n as i32);
        assert!((r.rho - oracle).abs() < 1e-14);
        let scaled = r.rho * (n as f64).sqrt();
        assert!((0.75..=0.85).contains(&scaled), "n={n}: {scaled}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn small_ball_monotone_in_beta(
        b in proptest::collection::vec(-5.0f64..5.0, 1..12),
        beta in 0.0f64..3.0,
        extra in 0.0f64..3.0,
    ) {
        for atom in [Atom::BernoulliPm1, Atom::Bernoulli01] {
            let a = small_ball_exact(&b, beta, atom).unwrap().rho;
            let bigger = small_ball_exact(&b, beta + extra, atom).unwrap().rho;
            prop_assert!(bigger >= a);
        }
    }

    #[test]
    fn small_ball_scale_invariant(
        k in proptest::collection::vec(-8i32..=8, 1..14),
        beta in 0u32..6,
        t_exp in -3i32..=3,
    ) {
        // Powers of two keep every sum exact.
        let t = 2f64.powi(t_exp);
        let b: Vec<f64> = k.iter().map(|&x| x as f64).collect();
        let tb: Vec<f64> = b.iter().map(|x| x * t).collect();
        let lhs = small_ball_exact(&b, beta as f64, Atom::BernoulliPm1).unwrap().rho;
        let rhs = small_ball_exact(&tb, t * beta as f64, Atom::BernoulliPm1).unwrap().rho;
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn forward_inverse_direction(
        n in 4usize..=20,
        g in 0.01f64..10.0,
        picks in proptest::collection::vec(any::<u32>(), 20),
    ) {
        let half = (((n as f64).sqrt() as usize).saturating_sub(1)) / 2;
        let m = 2 * half + 1;
        let span = 2 * half as i64 + 1;
        let b: Vec<f64> = picks[..n].iter().map(|&p| g * ((p as i64 % span) - half as i64) as f64).collect();
        let q = Gap::symmetric(vec![c(g, 0.0)], &[half as i64]).unwrap();
        prop_assert_eq!(q.volume(), m as u128);
        let rho = small_ball_exact(&b, 0.0, Atom::BernoulliPm1).unwrap().rho;
        prop_assert!(rho >= 1.0 / (2.0 * m as f64 * (n as f64).sqrt()), "rho {rho} m {m}");
    }

    #[test]
    fn cofactors_orthogonal_to_other_rows(n in 2usize..=20, seed in any::<u64>(), row in 0usize..20) {
        let row = row % n;
        let x = common::sample_ds(n, seed);
        let m = augment_minus_f(&x, c(0.5, 0.5), (n as f64).sqrt()).unwrap().matrix().clone();
        let a = cofactor_direction(&m, row).unwrap();
        for i in (0..n).filter(|&i| i != row) {
            let r: Vec<Complex64> = (0..n).map(|j| m.get(i, j)).collect();
            let dot: Complex64 = r.iter().zip(&a).map(|(x, y)| x * y).sum();
            let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(dot.norm() < 1e-8 * norm, "row {i}: {dot}");
        }
    }

    #[test]
    fn laplace_expansion_recovers_det(n in 2usize..=12, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed);
        let m = ComplexMatrix::new(common::random_dense(n, &mut rng), common::random_dense(n, &mut rng)).unwrap();
        let det = Lu::factor(&m.to_rows()).unwrap().det();
        let cof = cofactor_row(&m, 0).unwrap();
        let expanded: Complex64 = (0..n).map(|j| m.get(0, j) * cof[j]).sum();
        prop_assert!((expanded - det).norm() < 1e-9 * det.norm().max(1.0));
    }

    #[test]
    fn linear_form_matches_determinant(n in 2usize..=10, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed);
        let mut m = ComplexMatrix::new(common::random_dense(n, &mut rng), common::random_dense(n, &mut rng)).unwrap();
        let f: Vec<Complex64> = (0..n).map(|_| c(rng.uniform(), rng.uniform())).collect();
        let x: Vec<Complex64> = (0..n).map(|_| c(rng.uniform(), 0.0)).collect();
        let form = cofactor_linear_form(&m, 0, &f).unwrap();
        let total: Complex64 = x.iter().sum();
        for j in 0..n {
            m.set(0, j, x[j] - (c(1.0, 0.0) - total) + f[j]);
        }
        let det = Lu::factor(&m.to_rows()).unwrap().det();
        prop_assert!((form.eval(&x) - det).norm() < 1e-9 * det.norm().max(1.0));
    }

    #[test]
    fn gap_json_round_trip(
        re in -5.0f64..5.0,
        gens in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..3),
        bound in 0i64..4,
    ) {
        let gens: Vec<Complex64> = gens.into_iter().map(|(a, b)| c(a, b)).collect();
        let rank = gens.len();
        let q = Gap::new(c(re, 0.0), gens, vec![-bound; rank], vec![bound; rank]).unwrap();
        let back = Gap::from_json(&q.to_json()).unwrap();
        prop_assert_eq!(&back, &q);
        let els = gap_enumerate(&q, 1_000_000).unwrap();
        prop_assert_eq!(els.elements.len() as u128, q.volume());
    }
}

#[test]
fn rank_one_fit_recovers_progression() {
    let coeffs: Vec<Complex64> = [3, -1, 0, 2, 5, 1, -2, 4, 0, 3]
        .iter()
        .map(|&k| c(0.3 * k as f64, 0.1))
        .collect();
    let fit = fit_rank_one_gap(&coeffs, 1e-9, 100).unwrap().unwrap();
    assert_eq!(fit.exceptional, 0);
    assert_eq!(fit.gap.volume(), 8);
}
