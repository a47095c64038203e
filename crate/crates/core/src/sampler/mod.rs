//! Field realizations on rectangular grids.
//!
//! Every sampler draws coordinate `i` of the field from its own stream
//! derived from `(seed, i)`, so coordinates are independent and a path is a
//! pure function of `(generator, grid, d, seed)`.

mod exact;
mod gw;
pub mod io;
mod mbm;

pub use exact::{sample_gaussian_exact, ExactSampler, EXACT_POINT_BUDGET};
pub use gw::sample_gw;
pub use mbm::{sample_mbm_spectral, SpectralOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};
use crate::rng;

/// Regular grid over a rectangle; `resolution[k]` points on axis `k`,
/// endpoints included. Points are ordered with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub domain: Rect,
    pub resolution: Vec<usize>,
}

impl GridSpec {
    pub fn new(domain: Rect, resolution: Vec<usize>) -> Result<Self> {
        if resolution.len() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), got: resolution.len() });
        }
        if resolution.iter().any(|&r| r < 2) {
            return Err(Error::InvalidParameter("grid resolution must be at least 2 per axis".into()));
        }
        let lo = domain.lower.coords();
        let hi = domain.upper.coords();
        if lo.iter().zip(hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidParameter("grid domain must have positive extent on every axis".into()));
        }
        if resolution.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r)).is_none() {
            return Err(Error::Budget("grid point count overflows".into()));
        }
        Ok(GridSpec { domain, resolution })
    }

    /// `n` equally spaced points on `[a, b]`.
    pub fn interval(a: f64, b: f64, n: usize) -> Result<Self> {
        GridSpec::new(Rect::interval(a, b)?, vec![n])
    }

    pub fn dim(&self) -> usize {
        self.resolution.len()
    }

    pub fn total_points(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let lo = self.domain.lower.coords()[axis];
        let hi = self.domain.upper.coords()[axis];
        (hi - lo) / (self.resolution[axis] - 1) as f64
    }

    pub fn axis_value(&self, axis: usize, i: usize) -> f64 {
        let lo = self.domain.lower.coords()[axis];
        let hi = self.domain.upper.coords()[axis];
        let n = self.resolution[axis] - 1;
        if i == n {
            hi
        } else {
            lo + (hi - lo) * (i as f64 / n as f64)
        }
    }

    /// Coordinates of the grid point with flat index `idx`.
    pub fn point_into(&self, mut idx: usize, out: &mut [f64]) {
        for axis in (0..self.dim()).rev() {
            let r = self.resolution[axis];
            out[axis] = self.axis_value(axis, idx % r);
            idx /= r;
        }
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.point_into(idx, &mut out);
        out
    }

    /// All grid points, flattened (`total_points * dim` values).
    pub fn all_points(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; self.total_points() * n];
        for (i, chunk) in out.chunks_mut(n).enumerate() {
            self.point_into(i, chunk);
        }
        out
    }

    pub fn is_uniform_1d_from_zero(&self) -> bool {
        self.dim() == 1 && self.domain.lower.first() == 0.0
    }
}

/// Where a path came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub family: String,
    pub method: String,
    pub params: serde_json::Value,
}

/// A realization `t -> X_t ∈ R^d` on (a subset of) a grid.
///
/// `values` is point-major: the `d` coordinates of point `k` are
/// `values[k*d .. (k+1)*d]`. When `subset` is present only those grid
/// indices (increasing) are kept, in that order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub grid: GridSpec,
    pub d: usize,
    pub seed: u64,
    pub generator: Generator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<usize>>,
    pub values: Vec<f64>,
}

impl SamplePath {
    /// Path from a function of the grid coordinates (`d = 1`), mostly for tests
    /// and calibration.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let n = grid.dim();
        let mut p = vec![0.0; n];
        let mut values = Vec::with_capacity(grid.total_points());
        for i in 0..grid.total_points() {
            grid.point_into(i, &mut p);
            values.push(f(&p));
        }
        let generator = Generator { family: "function".into(), method: "evaluate".into(), params: serde_json::Value::Null };
        SamplePath::new(grid, 1, 0, generator, values)
    }

    pub fn new(grid: GridSpec, d: usize, seed: u64, generator: Generator, values: Vec<f64>) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidParameter("value dimension d must be >= 1".into()));
        }
        if values.len() != grid.total_points() * d {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                grid.total_points() * d,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("path values must be finite".into()));
        }
        Ok(SamplePath { grid, d, seed, generator, subset: None, values })
    }

    /// Number of retained points.
    pub fn len(&self) -> usize {
        self.values.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index dimension `N`.
    pub fn index_dim(&self) -> usize {
        self.grid.dim()
    }

    /// Grid index of the `k`-th retained point.
    pub fn grid_index(&self, k: usize) -> usize {
        match &self.subset {
            Some(s) => s[k],
            None => k,
        }
    }

    pub fn point(&self, k: usize) -> Vec<f64> {
        self.grid.point(self.grid_index(k))
    }

    pub fn value(&self, k: usize) -> &[f64] {
        &self.values[k * self.d..(k + 1) * self.d]
    }

    /// Keep the retained points `k` for which `keep(t_k)` holds.
    pub fn filter_points(&self, keep: impl Fn(&[f64]) -> bool) -> SamplePath {
        let mut p = vec![0.0; self.index_dim()];
        let mut subset = Vec::new();
        let mut values = Vec::new();
        for k in 0..self.len() {
            let g = self.grid_index(k);
            self.grid.point_into(g, &mut p);
            if keep(&p) {
                subset.push(g);
                values.extend_from_slice(self.value(k));
            }
        }
        SamplePath {
            grid: self.grid.clone(),
            d: self.d,
            seed: self.seed,
            generator: self.generator.clone(),
            subset: Some(subset),
            values,
        }
    }

    /// Keep every `step`-th point along each axis (full grids only); the
    /// result lives on the coarser grid.
    pub fn subsample(&self, step: usize) -> Result<SamplePath> {
        if self.subset.is_some() {
            return Err(Error::InvalidParameter("subsample needs a full grid".into()));
        }
        if step < 1 || self.grid.resolution.iter().any(|r| (r - 1) % step != 0) {
            return Err(Error::InvalidParameter(format!("step {step} must divide every (resolution - 1)")));
        }
        let resolution: Vec<usize> = self.grid.resolution.iter().map(|r| (r - 1) / step + 1).collect();
        let coarse = GridSpec::new(self.grid.domain.clone(), resolution)?;
        let n = self.index_dim();
        let mut values = Vec::with_capacity(coarse.total_points() * self.d);
        for c in 0..coarse.total_points() {
            // Map the coarse multi-index back to the fine grid.
            let (mut rem, mut fine, mut stride) = (c, 0usize, 1usize);
            for axis in (0..n).rev() {
                let i = rem % coarse.resolution[axis];
                rem /= coarse.resolution[axis];
                fine += i * step * stride;
                stride *= self.grid.resolution[axis];
            }
            values.extend_from_slice(self.value(fine));
        }
        SamplePath::new(coarse, self.d, self.seed, self.generator.clone(), values)
    }

    /// Nearest retained point to `t` (Euclidean).
    pub fn nearest(&self, t: &Point) -> Option<usize> {
        let mut p = vec![0.0; self.index_dim()];
        let mut best: Option<(usize, f64)> = None;
        for k in 0..self.len() {
            self.grid.point_into(self.grid_index(k), &mut p);
            let d2: f64 = p.iter().zip(t.coords()).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.is_none_or(|(_, b)| d2 < b) {
                best = Some((k, d2));
            }
        }
        best.map(|(k, _)| k)
    }
}

/// Interleave per-coordinate columns into point-major order.
pub(crate) fn interleave(columns: &[Vec<f64>]) -> Vec<f64> {
    let d = columns.len();
    let n = columns.first().map_or(0, Vec::len);
    let mut out = vec![0.0; n * d];
    for (i, col) in columns.iter().enumerate() {
        for (k, v) in col.iter().enumerate() {
            out[k * d + i] = *v;
        }
    }
    out
}

pub(crate) fn coordinate_stream(seed: u64, coordinate: usize) -> rand_chacha::ChaCha8Rng {
    rng::stream(seed, rng::ids::COORDINATE + coordinate as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_and_order() {
        let g = GridSpec::new(
            Rect::new(Point::new(vec![0.0, 1.0]).unwrap(), Point::new(vec![1.0, 3.0]).unwrap()).unwrap(),
            vec![3, 2],
        )
        .unwrap();
        assert_eq!(g.total_points(), 6);
        assert_eq!(g.point(0), vec![0.0, 1.0]);
        assert_eq!(g.point(1), vec![0.0, 3.0]);
        assert_eq!(g.point(2), vec![0.5, 1.0]);
        assert_eq!(g.point(5), vec![1.0, 3.0]);
        assert!(GridSpec::interval(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn subsample_keeps_shared_points() {
        let g = GridSpec::interval(0.0, 1.0, 9).unwrap();
        let p = SamplePath::from_fn(g, |t| t[0] * t[0]).unwrap();
        let c = p.subsample(4).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.values, vec![0.0, 0.25, 1.0]);
        assert!(p.subsample(3).is_err());
    }

    #[test]
    fn filter_and_nearest() {
        let g = GridSpec::interval(0.0, 1.0, 11).unwrap();
        let p = SamplePath::from_fn(g, |t| t[0]).unwrap();
        let f = p.filter_points(|t| t[0] >= 0.45);
        assert_eq!(f.len(), 6);
        assert_eq!(f.value(0), &[0.5]);
        assert_eq!(f.point(0), vec![0.5]);
        assert_eq!(p.nearest(&Point::scalar(0.33).unwrap()), Some(3));
    }

    #[test]
    fn interleave_columns() {
        assert_eq!(interleave(&[vec![1.0, 2.0], vec![3.0, 4.0]]), vec![1.0, 3.0, 2.0, 4.0]);
    }
}
