//! Random Weierstrass series `X_t = Σ_{j≤J} Z_j λ^{-jH(t)} sin(λ^j t + θ_j)`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::json;

use super::{coordinate_stream, interleave, Generator, GridSpec, SamplePath};
use crate::error::{Error, Result};
use crate::kernels::{gw_default_truncation, HurstProfile, GW_TAIL_TARGET};

/// One replica per coordinate: `Z_j ~ N(0, 1)` and `θ_j ~ U[0, 2π)` are drawn
/// once and shared by every grid point. `truncation = None` uses the same
/// default `J` as the kernel.
pub fn sample_gw(
    profile: &HurstProfile,
    lambda: f64,
    truncation: Option<usize>,
    grid: &GridSpec,
    d: usize,
    seed: u64,
) -> Result<SamplePath> {
    if !(lambda >= 2.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 2, got {lambda}")));
    }
    if grid.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: grid.dim() });
    }
    let [lo, hi] = [grid.domain.lower.first(), grid.domain.upper.first()];
    if !(profile.contains(lo) && profile.contains(hi)) {
        return Err(Error::InvalidParameter("grid domain extends outside the profile domain".into()));
    }
    let j_max = match truncation {
        Some(0) => return Err(Error::InvalidParameter("truncation J must be >= 1".into())),
        Some(j) => j,
        None => gw_default_truncation(lambda, profile.inf(), GW_TAIL_TARGET)?,
    };
    if d < 1 {
        return Err(Error::InvalidParameter("value dimension d must be >= 1".into()));
    }
    let n = grid.total_points();
    let ts: Vec<f64> = (0..n).map(|i| grid.axis_value(0, i)).collect();
    let decay: Vec<f64> = ts.iter().map(|&t| lambda.powf(-profile.eval_unchecked(t))).collect();
    let columns: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut rng = coordinate_stream(seed, i);
            let z: Vec<f64> = (0..j_max).map(|_| rng.sample(StandardNormal)).collect();
            let theta: Vec<f64> = (0..j_max).map(|_| std::f64::consts::TAU * rng.random::<f64>()).collect();
            ts.iter()
                .zip(&decay)
                .map(|(&t, &r)| {
                    let (mut amp, mut freq, mut x) = (1.0, 1.0, 0.0);
                    for j in 0..j_max {
                        amp *= r;
                        freq *= lambda;
                        x += z[j] * amp * (freq * t + theta[j]).sin();
                    }
                    x
                })
                .collect()
        })
        .collect();
    let generator = Generator {
        family: "gw".into(),
        method: "series".into(),
        params: json!({ "profile": profile, "lambda": lambda, "truncation": j_max }),
    };
    SamplePath::new(grid.clone(), d, seed, generator, interleave(&columns))
}
