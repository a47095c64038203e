use gfield::geometry::{Point, Rect};
use gfield::kernels::{HurstProfile, IncrementKernel};
use gfield::sampler::{sample_gw, sample_mbm_spectral, ExactSampler, GridSpec, SamplePath, SpectralOptions};
use proptest::prelude::*;

fn square(lo: f64, hi: f64, side: usize) -> GridSpec {
    let p = |v: f64| Point::new(vec![v, v]).unwrap();
    GridSpec::new(Rect::new(p(lo), p(hi)).unwrap(), vec![side, side]).unwrap()
}

fn same_bits(a: &SamplePath, b: &SamplePath) -> bool {
    a.values.len() == b.values.len() && a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), d in 1usize..=3, h in 0.1f64..0.9) {
        let grid = GridSpec::interval(0.0, 1.0, 129).unwrap();
        let fbm = ExactSampler::new(&IncrementKernel::fbm(h).unwrap(), &grid).unwrap();
        prop_assert!(same_bits(&fbm.sample(d, seed).unwrap(), &fbm.sample(d, seed).unwrap()));
        let mp = ExactSampler::new(&IncrementKernel::mpfbm(h / 2.0, 2).unwrap(), &square(1.0, 2.0, 6)).unwrap();
        prop_assert!(same_bits(&mp.sample(d, seed).unwrap(), &mp.sample(d, seed).unwrap()));
        let prof = HurstProfile::affine(0.3, 0.4, [0.0, 1.0]).unwrap();
        let a = sample_gw(&prof, 2.0, None, &grid, d, seed).unwrap();
        prop_assert!(same_bits(&a, &sample_gw(&prof, 2.0, None, &grid, d, seed).unwrap()));
        let opts = SpectralOptions { freq_cutoff: None, freq_bins: 64 };
        let a = sample_mbm_spectral(&prof, &grid, d, seed, opts).unwrap();
        prop_assert!(same_bits(&a, &sample_mbm_spectral(&prof, &grid, d, seed, opts).unwrap()));
        let other = fbm.sample(d, seed.wrapping_add(1)).unwrap();
        prop_assert!(!same_bits(&fbm.sample(d, seed).unwrap(), &other));
    }
}

fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

#[test]
fn coordinates_are_uncorrelated() {
    const REPLICAS: u64 = 10_000;
    let grid = GridSpec::interval(0.0, 1.0, 9).unwrap();
    let fbm = ExactSampler::new(&IncrementKernel::fbm(0.4).unwrap(), &grid).unwrap();
    let prof = HurstProfile::constant(0.5, [0.0, 1.0]).unwrap();
    let mp = ExactSampler::new(&IncrementKernel::mpfbm(0.3, 2).unwrap(), &square(1.0, 2.0, 3)).unwrap();
    let draws: [(&str, Box<dyn Fn(u64) -> SamplePath>); 3] = [
        ("fbm", Box::new(|s| fbm.sample(2, s).unwrap())),
        ("gw", Box::new(|s| sample_gw(&prof, 2.0, None, &grid, 2, s).unwrap())),
        ("mpfbm", Box::new(|s| mp.sample(2, s).unwrap())),
    ];
    for (name, draw) in draws {
        let (mut x1, mut x2) = (Vec::new(), Vec::new());
        for seed in 0..REPLICAS {
            let p = draw(seed);
            let v = p.value(5);
            x1.push(v[0]);
            x2.push(v[1]);
        }
        let r = correlation(&x1, &x2);
        assert!(r.abs() < 0.05, "{name}: correlation {r}");
    }
}

// Entrywise agreement of the empirical covariance with the kernel, within
// five standard errors `sqrt((C_ii C_jj + C_ij²) / n)`.
#[test]
fn exact_sampler_reproduces_the_covariance() {
    const REPLICAS: u64 = 20_000;
    let cases = [
        (IncrementKernel::mpfbm(0.4, 2).unwrap(), square(1.0, 2.0, 4)),
        (IncrementKernel::fbm(0.3).unwrap(), GridSpec::interval(0.0, 1.0, 16).unwrap()),
        (IncrementKernel::fbm(0.7).unwrap(), GridSpec::interval(0.5, 1.5, 16).unwrap()),
    ];
    for (kernel, grid) in cases {
        let sampler = ExactSampler::new(&kernel, &grid).unwrap();
        let m = grid.total_points();
        let mut sum = vec![0.0; m * m];
        for seed in 0..REPLICAS {
            let p = sampler.sample(1, seed).unwrap();
            for i in 0..m {
                for j in 0..m {
                    sum[i * m + j] += p.values[i] * p.values[j];
                }
            }
        }
        let pts: Vec<Point> = (0..m).map(|i| Point::new(grid.point(i)).unwrap()).collect();
        let c = |i: usize, j: usize| kernel.covariance(&pts[i], &pts[j]).unwrap().unwrap();
        let n = REPLICAS as f64;
        for i in 0..m {
            for j in 0..m {
                let emp = sum[i * m + j] / n;
                let se = ((c(i, i) * c(j, j) + c(i, j).powi(2)) / n).sqrt();
                assert!((emp - c(i, j)).abs() <= 5.0 * se + 1e-12, "{}: C[{i},{j}] = {} vs {emp}", sampler.method_name(), c(i, j));
            }
        }
    }
}
