use gfield::fractal::{
    box_count, box_dimension, default_path_scales, default_scales, graph_cloud, graph_column_count, localized_dimension,
    path_dimension, range_cloud, range_interval_count, riesz_energy, PointCloud, Target, WindowPolicy,
};
use gfield::geometry::Point;
use gfield::kernels::{HurstProfile, IncrementKernel};
use gfield::sampler::{sample_gw, ExactSampler, GridSpec, SamplePath};
use gfield::Error;
use proptest::prelude::*;

fn cloud(dim: usize, min: usize, max: usize, side: f64) -> impl Strategy<Value = PointCloud> {
    (min..max).prop_flat_map(move |n| {
        prop::collection::vec(0.0f64..side, n * dim).prop_map(move |v| PointCloud::new(dim, v).unwrap())
    })
}

fn any_cloud() -> impl Strategy<Value = PointCloud> {
    (1usize..=3).prop_flat_map(|d| cloud(d, 2, 200, 10.0))
}

fn diameter(c: &PointCloud) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..c.len() {
        for j in 0..i {
            let d: f64 = c.point(i).iter().zip(c.point(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            best = best.max(d.sqrt());
        }
    }
    best
}

fn random_path(seed: u64, h: f64, gw: bool, d: usize) -> SamplePath {
    let grid = GridSpec::interval(0.0, 1.0, 4097).unwrap();
    if gw {
        let prof = HurstProfile::affine(h.min(0.6), 0.3, [0.0, 1.0]).unwrap();
        sample_gw(&prof, 2.0, None, &grid, d, seed).unwrap()
    } else {
        ExactSampler::new(&IncrementKernel::fbm(h).unwrap(), &grid).unwrap().sample(d, seed).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    // Grids share their anchor, so each 2δ cell is a union of δ cells.
    #[test]
    fn box_count_is_nonincreasing_over_nested_scales(c in any_cloud(), delta in 0.01f64..5.0) {
        let counts: Vec<usize> = (0..5).map(|k| box_count(&c, delta * (k as f64).exp2())).collect();
        prop_assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{:?}", counts);
        prop_assert!(counts[0] <= c.len());
    }

    // With all distances at most 1, |x - y|^-β grows with β.
    #[test]
    fn energy_is_nondecreasing_in_beta(c in (1usize..=3).prop_flat_map(|d| cloud(d, 2, 60, 0.5)), b in 0.0f64..2.0, step in 0.01f64..1.0) {
        prop_assume!(diameter(&c) <= 1.0);
        let lo = riesz_energy(&c, b).unwrap().value;
        let hi = riesz_energy(&c, b + step).unwrap().value;
        prop_assert!(hi >= lo * (1.0 - 1e-12), "{} then {}", lo, hi);
    }

    // Small clouds may saturate before a window forms; that is reported, not guessed.
    #[test]
    fn cloud_slopes_lie_in_zero_to_dim(c in (1usize..=3).prop_flat_map(|d| cloud(d, 100, 400, 1.0))) {
        let scales = default_scales(&c);
        let fixed = WindowPolicy::Fixed { start: 0, end: scales.len() };
        for policy in [WindowPolicy::default(), fixed] {
            match box_dimension(&c, &scales, policy) {
                Ok(est) => prop_assert!(est.slope >= 0.0 && est.slope <= c.dim as f64, "{}", est.slope),
                Err(Error::NoValidWindow(_)) => {}
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // Projection of the graph onto its value coordinates is 1-Lipschitz and
    // the two grids share their value anchor, so every occupied graph cell
    // lands in one range cell. Slopes of single paths are too noisy to compare
    // in the plane (range minus graph reaches 0.35 at H ≈ 0.9), so slopes are
    // compared only for scalar paths, where the range is an interval.
    #[test]
    fn path_dimensions_respect_projection_and_range(seed in any::<u64>(), h in 0.15f64..0.9, gw in any::<bool>(), d in 1usize..=2, t0 in 0.2f64..0.8, rho in 0.1f64..0.2) {
        let path = random_path(seed, h, gw, d);
        let (gc, rc) = (graph_cloud(&path).unwrap(), range_cloud(&path).unwrap());
        for k in 0..14 {
            let delta = rc.extent().max(1e-9) * (-(k as f64)).exp2();
            prop_assert!(box_count(&rc, delta) <= box_count(&gc, delta), "delta {}", delta);
            if d == 1 {
                prop_assert!(range_interval_count(&path, delta).unwrap() <= graph_column_count(&path, delta).unwrap());
            }
        }

        let policy = WindowPolicy::default();
        let g = path_dimension(&path, Target::Graph, &default_path_scales(&path, Target::Graph).unwrap(), policy).unwrap();
        let r = path_dimension(&path, Target::Range, &default_path_scales(&path, Target::Range).unwrap(), policy).unwrap();
        prop_assert!(g.slope >= 0.0 && g.slope <= (1 + d) as f64);
        prop_assert!(r.slope >= 0.0 && r.slope <= d as f64);
        if d == 1 {
            prop_assert!(r.slope <= g.slope + 0.1, "range {} graph {}", r.slope, g.slope);
        }

        let t0 = Point::scalar(t0).unwrap();
        for radius in [rho, rho / 2.0] {
            let local = |target| match localized_dimension(&path, &t0, &[radius], target, None, policy) {
                Ok(mut v) => Ok(Some(v.remove(0).1)),
                // Saturated point clouds of small balls have no window.
                Err(Error::NoValidWindow(_)) => Ok(None),
                Err(e) => Err(TestCaseError::fail(e.to_string())),
            };
            let graph = local(Target::Graph)?;
            let range = local(Target::Range)?;
            if let Some(e) = &range {
                prop_assert!(e.slope >= 0.0 && e.slope <= d as f64);
            }
            if d == 1 {
                let eg = graph.expect("scalar graphs are counted by columns");
                prop_assert!(eg.slope >= 0.95 && eg.slope <= 2.05, "localized graph {}", eg.slope);
                if let Some(er) = range {
                    prop_assert!(er.slope <= eg.slope + 0.1, "ball: range {} graph {}", er.slope, eg.slope);
                }
            }
        }
    }
}
