use gfield::exponents::{
    default_rho_ladder, geometric_ladder, kernel_exponents, kernel_exponents_with, path_local_exponent,
    superset_sampling, ExponentOptions, ORDERING_SLACK,
};
use gfield::geometry::Point;
use gfield::kernels::{HurstProfile, IncrementKernel, Scaled};
use gfield::sampler::{ExactSampler, GridSpec};
use gfield::stats::median;
use proptest::prelude::*;

fn kernel_and_t0() -> impl Strategy<Value = (IncrementKernel, Point)> {
    prop_oneof![
        (0.05f64..0.95, 0.1f64..0.9).prop_map(|(h, t)| (IncrementKernel::fbm(h).unwrap(), Point::scalar(t).unwrap())),
        (0.05f64..0.5, prop::collection::vec(0.5f64..2.0, 2)).prop_map(|(h, c)| {
            (IncrementKernel::mpfbm(h, 2).unwrap(), Point::new(c).unwrap())
        }),
        (0.2f64..0.5, 0.0f64..0.4, 0.1f64..0.9).prop_map(|(a, b, t)| {
            let p = HurstProfile::affine(a, b, [0.0, 1.0]).unwrap();
            (IncrementKernel::gw(p, 2.0, None).unwrap(), Point::scalar(t).unwrap())
        }),
        (0.3f64..0.7, 0.0f64..0.2, 0.1f64..0.9).prop_map(|(m, amp, t)| {
            let p = HurstProfile::smooth_periodic(m, amp, 1.0, 0.0, [0.0, 1.0]).unwrap();
            (IncrementKernel::mbm_asymptotic(p, 1.0, 1.0).unwrap(), Point::scalar(t).unwrap())
        }),
        (0.5f64..0.8, 0.05f64..0.2, 0.2f64..0.5, 0.35f64..0.65).prop_map(|(b, a, g, t)| {
            let p = HurstProfile::power_cusp(b, a, 0.5, g, [0.0, 1.0]).unwrap();
            (IncrementKernel::mbm_asymptotic(p, 1.0, 1.0).unwrap(), Point::scalar(t).unwrap())
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn estimates_are_ordered((kernel, t0) in kernel_and_t0(), seed in any::<u64>()) {
        let est = kernel_exponents(&kernel, &t0, &default_rho_ladder(), 2000, seed).unwrap();
        prop_assert!(est.alpha_tilde_hat <= est.alpha_under_hat + ORDERING_SLACK,
            "{} > {}", est.alpha_tilde_hat, est.alpha_under_hat);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constant_factor_barely_moves_the_estimates(c in 0.1f64..10.0, which in 0usize..3, seed in any::<u64>()) {
        let (kernel, t0) = match which {
            0 => (IncrementKernel::mpfbm(0.35, 2).unwrap(), Point::new(vec![1.0, 1.5]).unwrap()),
            1 => (IncrementKernel::gw(HurstProfile::affine(0.3, 0.4, [0.0, 1.0]).unwrap(), 2.0, None).unwrap(), Point::scalar(0.4).unwrap()),
            _ => {
                let p = HurstProfile::smooth_periodic(0.5, 0.2, 1.0, 0.3, [0.0, 1.0]).unwrap();
                (IncrementKernel::mbm_asymptotic(p, 1.0, 1.0).unwrap(), Point::scalar(0.4).unwrap())
            }
        };
        // Ends at 2^-12 < 1e-3.
        let ladder = geometric_ladder(3, 12);
        let a = kernel_exponents(&kernel, &t0, &ladder, 4000, seed).unwrap();
        let b = kernel_exponents(&Scaled { inner: kernel.clone(), factor: c }, &t0, &ladder, 4000, seed).unwrap();
        prop_assert!((a.alpha_tilde_hat - b.alpha_tilde_hat).abs() < 0.01);
        prop_assert!((a.alpha_under_hat - b.alpha_under_hat).abs() < 0.01);
    }

    #[test]
    fn more_nested_pairs_widen_the_ratio_range((kernel, t0) in kernel_and_t0(), n in 100usize..2000, seed in any::<u64>()) {
        let opts = |count| ExponentOptions { pairs_per_rho: count, seed, sampling: superset_sampling(), ..ExponentOptions::default() };
        let ladder = default_rho_ladder();
        let small = kernel_exponents_with(&kernel, &t0, &ladder, &opts(n)).unwrap();
        let large = kernel_exponents_with(&kernel, &t0, &ladder, &opts(2 * n)).unwrap();
        for r in 0..ladder.len() {
            prop_assert!(large.inf_ratio[r] <= small.inf_ratio[r]);
            prop_assert!(large.sup_ratio[r] >= small.sup_ratio[r]);
        }
    }
}

#[test]
fn kernel_and_path_exponents_agree_for_fbm() {
    let grid = GridSpec::interval(0.0, 1.0, (1 << 14) + 1).unwrap();
    let t0 = Point::scalar(0.5).unwrap();
    let ladder = default_rho_ladder();
    for h in [0.2, 0.5, 0.8] {
        let kernel = IncrementKernel::fbm(h).unwrap();
        let sampler = ExactSampler::new(&kernel, &grid).unwrap();
        let path_values: Vec<f64> =
            (0..8).map(|seed| path_local_exponent(&sampler.sample(1, seed).unwrap(), &t0, &ladder).unwrap()).collect();
        let kernel_value = kernel_exponents(&kernel, &t0, &ladder, 10_000, 0).unwrap().alpha_tilde_hat;
        let m = median(&path_values);
        assert!((m - kernel_value).abs() <= 0.1, "H = {h}: path {m} vs kernel {kernel_value} ({path_values:?})");
    }
}
