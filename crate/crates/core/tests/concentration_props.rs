use birkhoff_spectra::concentration::{
    entry_law_test, projection_distance_probe, random_hermitian, trace_convexity_check, trace_lipschitz_check, GTag,
    ProbeConfig, Subspace,
};
use birkhoff_spectra::stats::ks_critical_value;
use birkhoff_spectra::RngStream;
use proptest::prelude::*;

fn tag_strategy() -> impl Strategy<Value = GTag> {
    prop_oneof![
        Just(GTag::Square),
        Just(GTag::Abs),
        (0.1f64..3.0).prop_map(|delta| GTag::Huber { delta }),
        (0.01f64..1.0).prop_map(|eps| GTag::LogMaxEps { eps }),
        (0.01f64..1.0).prop_map(|eps| GTag::LogMaxEpsConvex { eps }),
        (0.01f64..1.0).prop_map(|eps| GTag::LogMaxEpsCorrection { eps }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convex_tags_have_nonnegative_defect(g in tag_strategy(), size in 1usize..8, seed in any::<u64>()) {
        prop_assume!(g.is_convex());
        let mut rng = RngStream::new(seed);
        let u = random_hermitian(size, 1.0, &mut rng);
        let v = random_hermitian(size, 1.0, &mut rng);
        let f = random_hermitian(size, 0.5, &mut rng);
        prop_assert!(trace_convexity_check(&g, &u, &v, &f).unwrap() >= -1e-9);
    }

    #[test]
    fn trace_functions_are_lipschitz(g in tag_strategy(), size in 1usize..8, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed);
        let m1 = random_hermitian(size, 1.0, &mut rng);
        let m2 = random_hermitian(size, 1.0, &mut rng);
        let f = random_hermitian(size, 0.5, &mut rng);
        let check = trace_lipschitz_check(&g, &m1, &m2, &f, size).unwrap();
        prop_assert!(check.passes(1e-9), "{check:?}");
    }

    #[test]
    fn split_parts_reassemble(eps in 0.01f64..1.0, x in -10.0f64..10.0) {
        let whole = GTag::LogMaxEps { eps }.eval(x);
        let parts = GTag::LogMaxEpsConvex { eps }.eval(x) - GTag::LogMaxEpsCorrection { eps }.eval(x);
        prop_assert!((whole - parts).abs() < 1e-12 * whole.abs().max(1.0));
    }
}

#[test]
fn entry_law_accepts_exact_exponentials() {
    let mut rng = RngStream::new(5);
    let xs: Vec<f64> = (0..10_000).map(|_| rng.exponential()).collect();
    assert!(entry_law_test(&xs).unwrap() < ks_critical_value(xs.len(), 0.01));
}

#[test]
fn projection_mean_scales_with_sqrt_d() {
    let n = 200;
    let f = vec![0.0; n];
    for subspace in [Subspace::Coordinate, Subspace::Random] {
        let cfg = ProbeConfig::new(n, 400, 17);
        let small = projection_distance_probe(40, &f, subspace, &cfg).unwrap().mean_norm;
        let large = projection_distance_probe(80, &f, subspace, &cfg).unwrap().mean_norm;
        let ratio = large / small;
        assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.05, "{subspace:?}: {ratio}");
    }
}
