//! Multifractional Brownian motion from a discretized harmonizable
//! representation `∫ (e^{itξ} - 1) |ξ|^{-H(t) - 1/2} dŴ(ξ)`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{coordinate_stream, interleave, Generator, GridSpec, SamplePath};
use crate::error::{Error, Result};
use crate::kernels::HurstProfile;

pub const MIN_FREQ_BINS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    /// Highest frequency; defaults to `2π · resolution`.
    #[serde(default)]
    pub freq_cutoff: Option<f64>,
    pub freq_bins: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions { freq_cutoff: None, freq_bins: 2048 }
    }
}

/// Log-spaced bins from `2π / (10 L)` to the cutoff; each bin contributes
/// `[(cos tξ - 1) g + sin(tξ) g'] ξ^{-H(t) - 1/2} sqrt(Δξ)`. Unnormalized.
pub fn sample_mbm_spectral(
    profile: &HurstProfile,
    grid: &GridSpec,
    d: usize,
    seed: u64,
    options: SpectralOptions,
) -> Result<SamplePath> {
    if grid.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: grid.dim() });
    }
    if options.freq_bins < MIN_FREQ_BINS {
        return Err(Error::InvalidParameter(format!(
            "freq_bins must be >= {MIN_FREQ_BINS}, got {}",
            options.freq_bins
        )));
    }
    if d < 1 {
        return Err(Error::InvalidParameter("value dimension d must be >= 1".into()));
    }
    let [lo, hi] = [grid.domain.lower.first(), grid.domain.upper.first()];
    if !(profile.contains(lo) && profile.contains(hi)) {
        return Err(Error::InvalidParameter("grid domain extends outside the profile domain".into()));
    }
    let n = grid.total_points();
    let xi_min = std::f64::consts::TAU / (10.0 * (hi - lo));
    let cutoff = options.freq_cutoff.unwrap_or(std::f64::consts::TAU * n as f64);
    if !(cutoff > xi_min && cutoff.is_finite()) {
        return Err(Error::InvalidParameter(format!("freq_cutoff {cutoff} must exceed {xi_min}")));
    }
    let bins = options.freq_bins;
    let ratio = (cutoff / xi_min).ln() / bins as f64;
    let edge = |k: usize| xi_min * (ratio * k as f64).exp();
    let xi: Vec<f64> = (0..bins).map(|k| (edge(k) * edge(k + 1)).sqrt()).collect();
    let ln_xi: Vec<f64> = xi.iter().map(|x| x.ln()).collect();
    let width_sqrt: Vec<f64> = (0..bins).map(|k| (edge(k + 1) - edge(k)).sqrt()).collect();

    let ts: Vec<f64> = (0..n).map(|i| grid.axis_value(0, i)).collect();
    let hs: Vec<f64> = ts.iter().map(|&t| profile.eval_unchecked(t)).collect();
    let columns: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut rng = coordinate_stream(seed, i);
            let g: Vec<f64> = (0..bins).map(|_| rng.sample(StandardNormal)).collect();
            let g2: Vec<f64> = (0..bins).map(|_| rng.sample(StandardNormal)).collect();
            ts.iter()
                .zip(&hs)
                .map(|(&t, &h)| {
                    let mut x = 0.0;
                    for k in 0..bins {
                        let half = 0.5 * t * xi[k];
                        let (sh, ch) = half.sin_cos();
                        // cos(tξ) - 1 = -2 sin²(tξ/2), sin(tξ) = 2 sin cos.
                        let re = -2.0 * sh * sh;
                        let im = 2.0 * sh * ch;
                        let w = (-(h + 0.5) * ln_xi[k]).exp() * width_sqrt[k];
                        x += (re * g[k] + im * g2[k]) * w;
                    }
                    x
                })
                .collect()
        })
        .collect();
    let generator = Generator {
        family: "mbm".into(),
        method: "harmonizable_spectral".into(),
        params: json!({ "profile": profile, "freq_min": xi_min, "freq_cutoff": cutoff, "freq_bins": bins }),
    };
    SamplePath::new(grid.clone(), d, seed, generator, interleave(&columns))
}
