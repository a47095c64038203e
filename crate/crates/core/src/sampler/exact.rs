//! Exact Gaussian sampling from a covariance: dense Cholesky, or
//! Durbin–Levinson on fractional Gaussian noise for fBm on `[0, T]` grids.

use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::json;

use super::{coordinate_stream, interleave, Generator, GridSpec, SamplePath};
use crate::error::{Error, Result};
use crate::kernels::{IncrementKernel, KernelSpec};

/// Largest number of grid points factorized densely.
pub const EXACT_POINT_BUDGET: usize = 8192;

const JITTER_START: f64 = 1e-12;
const JITTER_MAX: f64 = 1e-6;

enum Method {
    Cholesky {
        /// Packed lower-triangular factor over the `active` points.
        factor: Vec<f64>,
        /// Grid indices with positive variance; the others are identically 0.
        active: Vec<usize>,
        jitter: f64,
    },
    Levinson {
        /// Autocovariance of the increments.
        gamma: Vec<f64>,
    },
}

/// A factorized covariance, reusable across seeds.
pub struct ExactSampler {
    kernel: IncrementKernel,
    grid: GridSpec,
    method: Method,
}

impl ExactSampler {
    pub fn new(kernel: &IncrementKernel, grid: &GridSpec) -> Result<Self> {
        if !kernel.has_covariance() {
            return Err(Error::InvalidParameter(format!("kernel `{}` has no covariance", kernel.family())));
        }
        if grid.dim() != kernel.dim() {
            return Err(Error::DimensionMismatch { expected: kernel.dim(), got: grid.dim() });
        }
        if !kernel.covers(grid.domain.lower.coords(), grid.domain.upper.coords()) {
            return Err(Error::InvalidParameter("grid domain extends outside the profile domain".into()));
        }
        let method = match kernel.spec() {
            KernelSpec::Fbm { hurst } if grid.is_uniform_1d_from_zero() => {
                Method::Levinson { gamma: fgn_autocovariance(*hurst, grid.spacing(0), grid.total_points() - 1) }
            }
            _ => {
                let n = grid.total_points();
                if n > EXACT_POINT_BUDGET {
                    return Err(Error::Budget(format!(
                        "{n} grid points exceed the exact-sampler budget of {EXACT_POINT_BUDGET}"
                    )));
                }
                cholesky_method(kernel, grid)?
            }
        };
        Ok(ExactSampler { kernel: kernel.clone(), grid: grid.clone(), method })
    }

    pub fn method_name(&self) -> &'static str {
        match self.method {
            Method::Cholesky { .. } => "cholesky",
            Method::Levinson { .. } => "durbin_levinson",
        }
    }

    /// Diagonal jitter that was needed (0 for the Levinson path).
    pub fn jitter(&self) -> f64 {
        match self.method {
            Method::Cholesky { jitter, .. } => jitter,
            Method::Levinson { .. } => 0.0,
        }
    }

    pub fn sample(&self, d: usize, seed: u64) -> Result<SamplePath> {
        if d < 1 {
            return Err(Error::InvalidParameter("value dimension d must be >= 1".into()));
        }
        let n = self.grid.total_points();
        let columns: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                let mut rng = coordinate_stream(seed, i);
                match &self.method {
                    Method::Cholesky { factor, active, .. } => {
                        let z: Vec<f64> = (0..active.len()).map(|_| rng.sample(StandardNormal)).collect();
                        let mut col = vec![0.0; n];
                        for (r, &g) in active.iter().enumerate() {
                            let row = &factor[r * (r + 1) / 2..r * (r + 1) / 2 + r + 1];
                            col[g] = dot(row, &z[..=r]);
                        }
                        col
                    }
                    Method::Levinson { gamma } => {
                        let z: Vec<f64> = (0..n - 1).map(|_| rng.sample(StandardNormal)).collect();
                        let noise = levinson(gamma, &z);
                        let mut col = Vec::with_capacity(n);
                        col.push(0.0);
                        let mut acc = 0.0;
                        for x in noise {
                            acc += x;
                            col.push(acc);
                        }
                        col
                    }
                }
            })
            .collect();
        let generator = Generator {
            family: self.kernel.family().to_string(),
            method: self.method_name().into(),
            params: json!({ "kernel": self.kernel, "jitter": self.jitter() }),
        };
        SamplePath::new(self.grid.clone(), d, seed, generator, interleave(&columns))
    }
}

/// Exact mean-zero Gaussian field with the kernel's covariance on `grid`.
pub fn sample_gaussian_exact(kernel: &IncrementKernel, grid: &GridSpec, d: usize, seed: u64) -> Result<SamplePath> {
    ExactSampler::new(kernel, grid)?.sample(d, seed)
}

fn cholesky_method(kernel: &IncrementKernel, grid: &GridSpec) -> Result<Method> {
    let pts = grid.all_points();
    let nd = grid.dim();
    let point = |i: usize| &pts[i * nd..(i + 1) * nd];
    let active: Vec<usize> =
        (0..grid.total_points()).filter(|&i| kernel.covariance_at(point(i), point(i)) > 0.0).collect();
    let m = active.len();
    let mut cov = vec![0.0; m * (m + 1) / 2];
    let mut max_diag: f64 = 0.0;
    for r in 0..m {
        let base = r * (r + 1) / 2;
        for c in 0..=r {
            cov[base + c] = kernel.covariance_at(point(active[r]), point(active[c]));
        }
        max_diag = max_diag.max(cov[base + r]);
    }
    let mut jitter = JITTER_START * max_diag;
    loop {
        let mut factor = cov.clone();
        if cholesky_packed(&mut factor, m, jitter) {
            return Ok(Method::Cholesky { factor, active, jitter });
        }
        jitter *= 10.0;
        if jitter > JITTER_MAX * max_diag * (1.0 + 1e-9) {
            return Err(Error::NotPsd { kernel: kernel.family().to_string() });
        }
    }
}

/// In-place Cholesky of a packed (row-major lower triangle) matrix with
/// `jitter` added to the diagonal. Returns false on a nonpositive pivot.
fn cholesky_packed(a: &mut [f64], n: usize, jitter: f64) -> bool {
    for i in 0..n {
        let bi = i * (i + 1) / 2;
        for j in 0..=i {
            let bj = j * (j + 1) / 2;
            let (head, tail) = a.split_at_mut(bi);
            let row_i = &tail[..=i];
            let s = if j == i { dot(&row_i[..j], &row_i[..j]) } else { dot(&row_i[..j], &head[bj..bj + j]) };
            let v = row_i[j] - s;
            if j == i {
                let pivot = v + jitter;
                if !(pivot > 0.0) {
                    return false;
                }
                tail[i] = pivot.sqrt();
            } else {
                tail[j] = v / head[bj + j];
            }
        }
    }
    true
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * k + l] * b[4 * k + l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

/// `γ(k) = δ^{2H} ½(|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H})`, `k < n`.
fn fgn_autocovariance(h: f64, spacing: f64, n: usize) -> Vec<f64> {
    let p = |k: f64| if k == 0.0 { 0.0 } else { k.abs().powf(2.0 * h) };
    let scale = spacing.powf(2.0 * h);
    (0..n)
        .map(|k| {
            let k = k as f64;
            scale * 0.5 * (p(k + 1.0) - 2.0 * p(k) + p(k - 1.0))
        })
        .collect()
}

/// Durbin–Levinson: a stationary sequence with autocovariance `gamma`
/// driven by the innovations `z`.
fn levinson(gamma: &[f64], z: &[f64]) -> Vec<f64> {
    let n = z.len();
    let mut x = Vec::with_capacity(n);
    if n == 0 {
        return x;
    }
    let mut v = gamma[0];
    x.push(v.sqrt() * z[0]);
    let mut phi: Vec<f64> = Vec::with_capacity(n);
    let mut prev: Vec<f64> = Vec::with_capacity(n);
    for i in 1..n {
        // phi holds φ_{i-1, 1..i-1}.
        let mut num = gamma[i];
        for j in 1..i {
            num -= phi[j - 1] * gamma[i - j];
        }
        let k = if v > 0.0 { num / v } else { 0.0 };
        prev.clear();
        prev.extend_from_slice(&phi);
        for j in 1..i {
            phi[j - 1] = prev[j - 1] - k * prev[i - j - 1];
        }
        phi.push(k);
        v *= 1.0 - k * k;
        let mut mean = 0.0;
        for j in 1..=i {
            mean += phi[j - 1] * x[i - j];
        }
        x.push(mean + v.max(0.0).sqrt() * z[i]);
    }
    x
}
