//! Box-counting dimensions of graphs and ranges, and Riesz-energy probes.
//!
//! Hausdorff dimension cannot be measured from finitely many points, so the
//! box-counting dimension stands in for it everywhere in this crate. For the
//! Gaussian fields handled here the two coincide in the limit; at finite
//! resolution the estimates are used with explicit tolerances.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BallSpec, Point};
use crate::sampler::SamplePath;
use crate::stats;

/// A finite set of points in `R^dim`, stored flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub dim: usize,
    pub points: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 || points.is_empty() || points.len() % dim != 0 {
            return Err(Error::InvalidParameter("point cloud must be nonempty with whole points".into()));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("point cloud coordinates must be finite".into()));
        }
        Ok(PointCloud { dim, points })
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// Componentwise `(min, max)` of the points.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.points.chunks(self.dim) {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Largest side of the bounding box.
    pub fn extent(&self) -> f64 {
        let (lo, hi) = self.bounds();
        lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max)
    }
}

/// `{(t, X_t)} ⊂ R^{N+d}`.
pub fn graph_cloud(path: &SamplePath) -> Result<PointCloud> {
    let n = path.index_dim();
    let mut pts = Vec::with_capacity(path.len() * (n + path.d));
    let mut t = vec![0.0; n];
    for k in 0..path.len() {
        path.grid.point_into(path.grid_index(k), &mut t);
        pts.extend_from_slice(&t);
        pts.extend_from_slice(path.value(k));
    }
    PointCloud::new(n + path.d, pts)
}

/// `{X_t} ⊂ R^d`.
pub fn range_cloud(path: &SamplePath) -> Result<PointCloud> {
    PointCloud::new(path.d, path.values.clone())
}

/// Points of `path` inside the closed ball.
pub fn restrict_ball(path: &SamplePath, ball: &BallSpec) -> Result<SamplePath> {
    if ball.center.dim() != path.index_dim() {
        return Err(Error::DimensionMismatch { expected: path.index_dim(), got: ball.center.dim() });
    }
    let r = path.filter_points(|t| ball.contains(t));
    if r.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    Ok(r)
}

/// Packs cell multi-indices into a single integer key when they fit.
struct CellKeys {
    radix: Vec<u128>,
}

impl CellKeys {
    fn new(cells_per_axis: &[u64]) -> Option<Self> {
        let mut radix = Vec::with_capacity(cells_per_axis.len());
        let mut acc: u128 = 1;
        for &n in cells_per_axis {
            radix.push(acc);
            acc = acc.checked_mul(n as u128)?;
        }
        Some(CellKeys { radix })
    }

    fn key(&self, idx: &[u64]) -> u128 {
        idx.iter().zip(&self.radix).map(|(i, r)| *i as u128 * r).sum()
    }
}

fn cell_index(x: f64, lo: f64, delta: f64, cells: u64) -> u64 {
    (((x - lo) / delta).floor().max(0.0) as u64).min(cells - 1)
}

fn cells_per_axis(lo: &[f64], hi: &[f64], delta: f64) -> Vec<u64> {
    lo.iter().zip(hi).map(|(a, b)| (((b - a) / delta).ceil() as u64).max(1)).collect()
}

/// Occupied cells of the side-`delta` grid anchored at the bounding-box
/// lower corner. Points on the upper face of the box fall in the last cell.
///
/// ```
/// use gfield::fractal::{box_count, PointCloud};
///
/// let seg: Vec<f64> = (0..=1024).flat_map(|k| [k as f64 / 1024.0, 0.0]).collect();
/// let cloud = PointCloud::new(2, seg).unwrap();
/// assert_eq!(box_count(&cloud, 1.0 / 8.0), 8);
/// ```
pub fn box_count(cloud: &PointCloud, delta: f64) -> usize {
    if !(delta > 0.0) {
        return 0;
    }
    let (lo, hi) = cloud.bounds();
    let cells = cells_per_axis(&lo, &hi, delta);
    let mut idx = vec![0u64; cloud.dim];
    match CellKeys::new(&cells) {
        Some(keys) => {
            let mut seen: HashSet<u128> = HashSet::with_capacity(cloud.len());
            for p in cloud.points.chunks(cloud.dim) {
                for k in 0..cloud.dim {
                    idx[k] = cell_index(p[k], lo[k], delta, cells[k]);
                }
                seen.insert(keys.key(&idx));
            }
            seen.len()
        }
        None => {
            let mut seen: HashSet<Vec<u64>> = HashSet::with_capacity(cloud.len());
            for p in cloud.points.chunks(cloud.dim) {
                for k in 0..cloud.dim {
                    idx[k] = cell_index(p[k], lo[k], delta, cells[k]);
                }
                seen.insert(idx.clone());
            }
            seen.len()
        }
    }
}

/// Retained points as a full rectangular block of grid indices.
struct Block {
    first: Vec<usize>,
    len: Vec<usize>,
}

impl Block {
    fn of(path: &SamplePath) -> Option<Block> {
        let res = &path.grid.resolution;
        let n = res.len();
        let block = match &path.subset {
            None => Block { first: vec![0; n], len: res.clone() },
            Some(subset) => {
                let mut first = vec![usize::MAX; n];
                let mut last = vec![0; n];
                for &g in subset {
                    let mut rem = g;
                    for a in (0..n).rev() {
                        let i = rem % res[a];
                        rem /= res[a];
                        first[a] = first[a].min(i);
                        last[a] = last[a].max(i);
                    }
                }
                let len: Vec<usize> = first.iter().zip(&last).map(|(f, l)| l + 1 - f).collect();
                // Distinct indices inside the bounding block fill it iff the counts agree.
                if subset.len() != len.iter().product::<usize>() {
                    return None;
                }
                Block { first, len }
            }
        };
        block.len.iter().all(|&l| l >= 2).then_some(block)
    }

    fn cells(&self) -> usize {
        self.len.iter().map(|l| l - 1).product()
    }

    /// Calls `f(cell, corner_values)` for every grid cell of the block, where
    /// bit `a` (counted from the most significant of `N`) of a corner index
    /// selects the upper end of axis `a`.
    fn for_each_cell(&self, values: &[f64], mut f: impl FnMut(&[usize], &[f64])) {
        let n = self.len.len();
        let mut stride = vec![1usize; n];
        for a in (0..n - 1).rev() {
            stride[a] = stride[a + 1] * self.len[a + 1];
        }
        let offsets: Vec<usize> = (0..1usize << n)
            .map(|c| (0..n).filter(|a| c >> (n - 1 - a) & 1 == 1).map(|a| stride[a]).sum())
            .collect();
        let mut corner = vec![0.0; offsets.len()];
        let mut cell = vec![0usize; n];
        loop {
            let base: usize = cell.iter().zip(&stride).map(|(i, s)| i * s).sum();
            for (v, off) in corner.iter_mut().zip(&offsets) {
                *v = values[base + off];
            }
            f(&cell, &corner);
            if !advance(&mut cell, |a| self.len[a] - 1) {
                break;
            }
        }
    }
}

/// Work allowed per count before a scale is rejected as too fine.
const COUNT_BUDGET: usize = 1 << 26;

/// Cells of side `delta` meeting the graph of a scalar path.
///
/// When the retained points form a rectangular block of the grid (always
/// the case in one dimension and for whole grids) the path is extended to
/// its multilinear interpolant and the count is exact for that continuous
/// surface: in every index-space column it covers each cell between the
/// smallest and largest value the interpolant takes there. Otherwise each
/// column spans the values of the grid points it contains.
pub fn graph_column_count(path: &SamplePath, delta: f64) -> Result<usize> {
    if path.d != 1 {
        return Err(Error::InvalidParameter("column counting needs scalar values (d = 1)".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    match Block::of(path) {
        Some(block) => interpolant_column_count(path, &block, delta),
        None => point_column_count(path, delta),
    }
}

fn interpolant_column_count(path: &SamplePath, block: &Block, delta: f64) -> Result<usize> {
    let n = block.len.len();
    let grid = &path.grid;
    let t_lo: Vec<f64> = (0..n).map(|a| grid.axis_value(a, block.first[a])).collect();
    let t_hi: Vec<f64> = (0..n).map(|a| grid.axis_value(a, block.first[a] + block.len[a] - 1)).collect();
    let cols = cells_per_axis(&t_lo, &t_hi, delta);
    // Columns met by one grid cell bound the work.
    let per_cell: usize = (0..n).map(|a| (grid.spacing(a) / delta).ceil() as usize + 1).product();
    let total_cols = cols.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c as usize));
    match total_cols {
        Some(c) if c <= COUNT_BUDGET && per_cell.saturating_mul(block.cells()) <= COUNT_BUDGET => {}
        _ => return Err(Error::Budget(format!("scale {delta} is too fine for column counting"))),
    }
    let total_cols = total_cols.unwrap_or(0);
    let x_lo = path.values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut lo = vec![f64::INFINITY; total_cols];
    let mut hi = vec![f64::NEG_INFINITY; total_cols];
    let mut col_stride = vec![1usize; n];
    for a in (0..n - 1).rev() {
        col_stride[a] = col_stride[a + 1] * cols[a + 1] as usize;
    }
    let corners = 1usize << n;
    // Per axis: (column, overlap start, overlap end) in the cell's [0, 1] coordinates.
    let mut ranges: Vec<Vec<(usize, f64, f64)>> = vec![Vec::new(); n];
    let mut pick = vec![0usize; n];
    block.for_each_cell(&path.values, |cell, f| {
        for a in 0..n {
            let u0 = grid.axis_value(a, block.first[a] + cell[a]);
            let u1 = grid.axis_value(a, block.first[a] + cell[a] + 1);
            let (c0, c1) = (cell_index(u0, t_lo[a], delta, cols[a]), cell_index(u1, t_lo[a], delta, cols[a]));
            ranges[a].clear();
            for c in c0..=c1 {
                let a0 = (t_lo[a] + c as f64 * delta).max(u0);
                let a1 = (t_lo[a] + (c + 1) as f64 * delta).min(u1);
                let s0 = ((a0 - u0) / (u1 - u0)).clamp(0.0, 1.0);
                let s1 = ((a1 - u0) / (u1 - u0)).clamp(s0, 1.0);
                ranges[a].push((c as usize, s0, s1));
            }
        }
        // A multilinear function takes its extremes over a box at the corners.
        pick.iter_mut().for_each(|p| *p = 0);
        loop {
            let col: usize = (0..n).map(|a| ranges[a][pick[a]].0 * col_stride[a]).sum();
            for q in 0..corners {
                let mut v = 0.0;
                for (c, fc) in f.iter().enumerate() {
                    let mut w = 1.0;
                    for a in 0..n {
                        let r = &ranges[a][pick[a]];
                        let s = if q >> (n - 1 - a) & 1 == 1 { r.2 } else { r.1 };
                        w *= if c >> (n - 1 - a) & 1 == 1 { s } else { 1.0 - s };
                    }
                    v += w * fc;
                }
                lo[col] = lo[col].min(v);
                hi[col] = hi[col].max(v);
            }
            if !advance(&mut pick, |a| ranges[a].len()) {
                break;
            }
        }
    });
    Ok(lo
        .iter()
        .zip(&hi)
        .filter(|(l, _)| l.is_finite())
        .map(|(l, h)| {
            let (a, b) = (((l - x_lo) / delta).floor().max(0.0), ((h - x_lo) / delta).floor().max(0.0));
            (b - a) as usize + 1
        })
        .sum())
}

/// Cells of side `delta` meeting the range of a scalar path. On a grid
/// block the range of the interpolant is counted (each grid cell maps onto
/// the interval between its extreme corner values); otherwise the sampled
/// values are counted as a point cloud.
pub fn range_interval_count(path: &SamplePath, delta: f64) -> Result<usize> {
    if path.d != 1 {
        return Err(Error::InvalidParameter("interval counting needs scalar values (d = 1)".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    let Some(block) = Block::of(path) else {
        return Ok(box_count(&range_cloud(path)?, delta));
    };
    let x_lo = path.values.iter().copied().fold(f64::INFINITY, f64::min);
    let x_hi = path.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cells = (((x_hi - x_lo) / delta).ceil() as usize).max(1);
    if cells > COUNT_BUDGET {
        return Err(Error::Budget(format!("scale {delta} is too fine for interval counting")));
    }
    // Difference array over covered cells.
    let mut diff = vec![0i64; cells + 1];
    block.for_each_cell(&path.values, |_, f| {
        let mn = f.iter().copied().fold(f64::INFINITY, f64::min);
        let mx = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        diff[cell_index(mn, x_lo, delta, cells as u64) as usize] += 1;
        diff[cell_index(mx, x_lo, delta, cells as u64) as usize + 1] -= 1;
    });
    let mut cover = 0;
    Ok(diff[..cells].iter().filter(|&&d| {
        cover += d;
        cover > 0
    }).count())
}

/// Odometer increment with the last axis fastest; false after the last state.
fn advance(idx: &mut [usize], bound: impl Fn(usize) -> usize) -> bool {
    for a in (0..idx.len()).rev() {
        idx[a] += 1;
        if idx[a] < bound(a) {
            return true;
        }
        idx[a] = 0;
    }
    false
}

fn point_column_count(path: &SamplePath, delta: f64) -> Result<usize> {
    let n = path.index_dim();
    let mut t_lo = vec![f64::INFINITY; n];
    let mut t_hi = vec![f64::NEG_INFINITY; n];
    let mut x_lo = f64::INFINITY;
    let mut t = vec![0.0; n];
    for k in 0..path.len() {
        path.grid.point_into(path.grid_index(k), &mut t);
        for a in 0..n {
            t_lo[a] = t_lo[a].min(t[a]);
            t_hi[a] = t_hi[a].max(t[a]);
        }
        x_lo = x_lo.min(path.value(k)[0]);
    }
    let cells = cells_per_axis(&t_lo, &t_hi, delta);
    let keys = CellKeys::new(&cells).ok_or_else(|| Error::Budget("too many columns".into()))?;
    let mut columns: std::collections::HashMap<u128, (u64, u64)> = std::collections::HashMap::new();
    let mut idx = vec![0u64; n];
    for k in 0..path.len() {
        path.grid.point_into(path.grid_index(k), &mut t);
        for a in 0..n {
            idx[a] = cell_index(t[a], t_lo[a], delta, cells[a]);
        }
        let v = (((path.value(k)[0] - x_lo) / delta).floor().max(0.0)) as u64;
        columns
            .entry(keys.key(&idx))
            .and_modify(|(a, b)| {
                *a = (*a).min(v);
                *b = (*b).max(v);
            })
            .or_insert((v, v));
    }
    Ok(columns.values().map(|(a, b)| (b - a + 1) as usize).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Graph,
    Range,
}

/// How the regression window is chosen from the scale ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy")]
pub enum WindowPolicy {
    /// Longest run of scales with at least `min_count` boxes that are not
    /// saturated: point counts above `saturation` times the number of points,
    /// or graph columns holding fewer than `min_column_points` grid points.
    Auto {
        #[serde(default = "default_min_count")]
        min_count: usize,
        #[serde(default = "default_saturation")]
        saturation: f64,
        #[serde(default = "default_min_column_points")]
        min_column_points: f64,
    },
    /// Use scale indices `start..end` of the ladder as given.
    Fixed { start: usize, end: usize },
}

fn default_min_count() -> usize {
    8
}

fn default_saturation() -> f64 {
    0.25
}

fn default_min_column_points() -> f64 {
    16.0
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy::Auto {
            min_count: default_min_count(),
            saturation: default_saturation(),
            min_column_points: default_min_column_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub target: Target,
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
    pub slope: f64,
    pub stderr: f64,
    pub r2: f64,
    /// Index range `[start, end)` of `scales` used in the fit.
    pub window: [usize; 2],
    /// Counting method: `cells` (occupied cells of a point cloud), `columns`
    /// or `intervals` (graph or range of a scalar path's interpolant).
    pub method: String,
}

pub const MIN_SCALES: usize = 5;
pub const MIN_CLOUD_POINTS: usize = 100;
const MIN_WINDOW: usize = 3;

/// `extent · 2^-k` for `k = 1..=levels`.
pub fn dyadic_scales(extent: f64, levels: usize) -> Vec<f64> {
    (1..=levels).map(|k| extent * (-(k as f64)).exp2()).collect()
}

/// Default ladder for a cloud: dyadic below its extent, down to about the
/// resolution `M` points can resolve.
pub fn default_scales(cloud: &PointCloud) -> Vec<f64> {
    let levels = ((cloud.len() as f64).log2().ceil() as usize + 2).max(MIN_SCALES);
    dyadic_scales(cloud.extent(), levels)
}

fn check_ladder(scales: &[f64]) -> Result<()> {
    if scales.len() < MIN_SCALES {
        return Err(Error::InvalidParameter(format!("need at least {MIN_SCALES} scales, got {}", scales.len())));
    }
    if scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) || scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("scales must be positive and strictly decreasing".into()));
    }
    Ok(())
}

fn fit_window(
    target: Target,
    scales: &[f64],
    counts: Vec<usize>,
    keep: impl Fn(usize) -> bool,
    policy: WindowPolicy,
    method: &str,
    max_slope: f64,
) -> Result<DimensionEstimate> {
    let (start, end) = match policy {
        WindowPolicy::Fixed { start, end } => {
            if start >= end || end > scales.len() {
                return Err(Error::InvalidParameter(format!("window {start}..{end} is outside the ladder")));
            }
            (start, end)
        }
        WindowPolicy::Auto { min_count, .. } => {
            // Longest contiguous run of admissible scales.
            let ok: Vec<bool> = (0..scales.len()).map(|i| counts[i] >= min_count && keep(i)).collect();
            let (mut best, mut cur_start) = ((0, 0), None);
            for i in 0..=ok.len() {
                match (i < ok.len() && ok[i], cur_start) {
                    (true, None) => cur_start = Some(i),
                    (false, Some(s)) => {
                        if i - s > best.1 - best.0 {
                            best = (s, i);
                        }
                        cur_start = None;
                    }
                    _ => {}
                }
            }
            best
        }
    };
    if end - start < MIN_WINDOW {
        return Err(Error::NoValidWindow(format!(
            "only {} usable scales (counts {:?})",
            end - start,
            counts
        )));
    }
    let x: Vec<f64> = scales[start..end].iter().map(|s| -s.ln()).collect();
    let y: Vec<f64> = counts[start..end].iter().map(|&c| (c as f64).ln()).collect();
    let fit = stats::ols(&x, &y).ok_or_else(|| Error::NoValidWindow("degenerate regression".into()))?;
    Ok(DimensionEstimate {
        target,
        scales: scales.to_vec(),
        counts,
        slope: fit.slope.clamp(0.0, max_slope),
        stderr: fit.stderr,
        r2: fit.r2,
        window: [start, end],
        method: method.into(),
    })
}

/// Least-squares slope of `ln N_δ` against `ln(1/δ)` for a point cloud.
pub fn box_dimension(cloud: &PointCloud, scales: &[f64], policy: WindowPolicy) -> Result<DimensionEstimate> {
    box_dimension_for(Target::Range, cloud, scales, policy)
}

fn box_dimension_for(target: Target, cloud: &PointCloud, scales: &[f64], policy: WindowPolicy) -> Result<DimensionEstimate> {
    check_ladder(scales)?;
    if cloud.len() < MIN_CLOUD_POINTS {
        return Err(Error::Insufficient(format!("cloud has {} points; need {MIN_CLOUD_POINTS}", cloud.len())));
    }
    let counts: Vec<usize> = scales.iter().map(|&s| box_count(cloud, s)).collect();
    let saturation = match policy {
        WindowPolicy::Auto { saturation, .. } => saturation,
        WindowPolicy::Fixed { .. } => f64::INFINITY,
    };
    let m = cloud.len() as f64;
    fit_window(target, scales, counts.clone(), |i| (counts[i] as f64) <= saturation * m, policy, "cells", cloud.dim as f64)
}

/// Box dimension of the graph of a scalar path by column counting (see
/// [`graph_column_count`]).
pub fn graph_box_dimension(path: &SamplePath, scales: &[f64], policy: WindowPolicy) -> Result<DimensionEstimate> {
    check_ladder(scales)?;
    check_path(path)?;
    let counts = scales.iter().map(|&s| graph_column_count(path, s)).collect::<Result<Vec<_>>>()?;
    let min_points = match policy {
        WindowPolicy::Auto { min_column_points, .. } => min_column_points,
        WindowPolicy::Fixed { .. } => 0.0,
    };
    let spacing: Vec<f64> = (0..path.index_dim()).map(|a| path.grid.spacing(a)).collect();
    let column_points = |d: f64| spacing.iter().map(|h| d / h).product::<f64>();
    let n = path.index_dim() as f64;
    fit_window(Target::Graph, scales, counts, |i| column_points(scales[i]) >= min_points, policy, "columns", n + 1.0)
}

/// Box dimension of the range of a scalar path by interval counting (see
/// [`range_interval_count`]).
pub fn range_box_dimension(path: &SamplePath, scales: &[f64], policy: WindowPolicy) -> Result<DimensionEstimate> {
    check_ladder(scales)?;
    check_path(path)?;
    let counts = scales.iter().map(|&s| range_interval_count(path, s)).collect::<Result<Vec<_>>>()?;
    fit_window(Target::Range, scales, counts, |_| true, policy, "intervals", 1.0)
}

fn check_path(path: &SamplePath) -> Result<()> {
    if path.len() < MIN_CLOUD_POINTS {
        return Err(Error::Insufficient(format!("path has {} points; need {MIN_CLOUD_POINTS}", path.len())));
    }
    Ok(())
}

/// Graph or range dimension of a path. Scalar paths use the column and
/// interval counts of their interpolant; vector-valued paths fall back to
/// occupied cells of the point cloud.
pub fn path_dimension(path: &SamplePath, target: Target, scales: &[f64], policy: WindowPolicy) -> Result<DimensionEstimate> {
    match (target, path.d) {
        (Target::Graph, 1) => graph_box_dimension(path, scales, policy),
        (Target::Range, 1) => range_box_dimension(path, scales, policy),
        (Target::Graph, _) => box_dimension_for(Target::Graph, &graph_cloud(path)?, scales, policy),
        (Target::Range, _) => box_dimension_for(Target::Range, &range_cloud(path)?, scales, policy),
    }
}

/// Default scale ladder for a path and target. Scalar graphs get a dyadic
/// mesh of the index domain down to half the grid spacing; other sets are
/// dyadic below their own extent down to the point-count resolution.
pub fn default_path_scales(path: &SamplePath, target: Target) -> Result<Vec<f64>> {
    let cloud = match target {
        Target::Graph => graph_cloud(path)?,
        Target::Range => range_cloud(path)?,
    };
    if target == Target::Graph && path.d == 1 {
        // A mesh of the index domain: the coarsest scale halves its extent.
        let (lo, hi) = cloud.bounds();
        let n = path.index_dim();
        let extent = (0..n).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
        let h = (0..n).map(|a| path.grid.spacing(a)).fold(f64::INFINITY, f64::min);
        let levels = ((2.0 * extent / h).log2().ceil() as usize).max(MIN_SCALES);
        return Ok(dyadic_scales(extent, levels));
    }
    Ok(default_scales(&cloud))
}

pub const MIN_BALL_POINTS: usize = 256;

/// Dimension of the path restricted to `B(t0, ρ)` for each radius. With
/// `scales = None` each ball gets its own default ladder.
pub fn localized_dimension(
    path: &SamplePath,
    t0: &Point,
    rho_ladder: &[f64],
    target: Target,
    scales: Option<&[f64]>,
    policy: WindowPolicy,
) -> Result<Vec<(f64, DimensionEstimate)>> {
    rho_ladder
        .iter()
        .map(|&rho| {
            let ball = BallSpec::new(t0.clone(), rho)?;
            let local = restrict_ball(path, &ball)?;
            if local.len() < MIN_BALL_POINTS {
                return Err(Error::Insufficient(format!(
                    "B(t0, {rho}) keeps {} grid points; need {MIN_BALL_POINTS}",
                    local.len()
                )));
            }
            let own;
            let sc = match scales {
                Some(s) => s,
                None => {
                    own = default_path_scales(&local, target)?;
                    &own
                }
            };
            Ok((rho, path_dimension(&local, target, sc, policy)?))
        })
        .collect()
}

/// Riesz energy with the number of coincident pairs that were skipped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Energy {
    pub value: f64,
    pub duplicate_pairs: usize,
}

/// Pairs closer than this fraction of the cloud extent count as duplicates.
pub const DUPLICATE_TOLERANCE: f64 = 1e-12;

/// `(1/M²) Σ_{i≠j} |x_i - x_j|^{-β}` (both orders counted).
///
/// ```
/// use gfield::fractal::{riesz_energy, PointCloud};
///
/// let two = PointCloud::new(1, vec![0.0, 1.0]).unwrap();
/// assert_eq!(riesz_energy(&two, 2.5).unwrap().value, 0.5);
/// ```
pub fn riesz_energy(cloud: &PointCloud, beta: f64) -> Result<Energy> {
    if cloud.len() < 2 {
        return Err(Error::Insufficient("energy needs at least two points".into()));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let tol2 = (DUPLICATE_TOLERANCE * cloud.extent()).powi(2);
    let m = cloud.len();
    let mut sum = 0.0;
    let mut dups = 0;
    for i in 0..m {
        let a = cloud.point(i);
        let mut row = 0.0;
        for j in (i + 1)..m {
            let d2 = sq_dist(a, cloud.point(j));
            if d2 <= tol2 {
                dups += 1;
                continue;
            }
            row += d2.powf(-0.5 * beta);
        }
        sum += row;
    }
    Ok(Energy { value: 2.0 * sum / (m as f64 * m as f64), duplicate_pairs: dups })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Pair-distance histogram in `ln d`, used to evaluate many energies at once.
struct DistanceHistogram {
    /// Per bin: pair count and sum of `ln d`.
    count: Vec<f64>,
    sum_ln: Vec<f64>,
    duplicates: usize,
    points: usize,
}

const LN_BIN_WIDTH: f64 = 1e-3;

impl DistanceHistogram {
    fn build(cloud: &PointCloud) -> Self {
        let extent = cloud.extent();
        let tol2 = (DUPLICATE_TOLERANCE * extent).powi(2);
        // ln d ranges over [ln tol, ln(extent * sqrt(dim))].
        let ln_lo = (DUPLICATE_TOLERANCE * extent).ln();
        let ln_hi = (extent * (cloud.dim as f64).sqrt()).ln() + LN_BIN_WIDTH;
        let bins = (((ln_hi - ln_lo) / LN_BIN_WIDTH).ceil() as usize).max(1);
        let mut count = vec![0.0; bins];
        let mut sum_ln = vec![0.0; bins];
        let mut duplicates = 0;
        let m = cloud.len();
        for i in 0..m {
            let a = cloud.point(i);
            for j in (i + 1)..m {
                let d2 = sq_dist(a, cloud.point(j));
                if d2 <= tol2 {
                    duplicates += 1;
                    continue;
                }
                let l = 0.5 * d2.ln();
                let b = (((l - ln_lo) / LN_BIN_WIDTH) as usize).min(bins - 1);
                count[b] += 1.0;
                sum_ln[b] += l;
            }
        }
        DistanceHistogram { count, sum_ln, duplicates, points: m }
    }

    /// Energy at `beta`, evaluating each bin at its mean `ln d`; the
    /// relative error is below `β² w² / 8` for bin width `w`.
    fn energy(&self, beta: f64) -> f64 {
        let m = self.points as f64;
        let s: f64 = self
            .count
            .iter()
            .zip(&self.sum_ln)
            .filter(|(c, _)| **c > 0.0)
            .map(|(c, l)| c * (-beta * l / c).exp())
            .sum();
        2.0 * s / (m * m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub betas: Vec<f64>,
    /// Energies at the finest refinement.
    #[serde(with = "crate::serde_ext::extended_real_vec")]
    pub energies: Vec<f64>,
    /// Point count of each refinement level, coarse to fine.
    pub level_points: Vec<usize>,
    /// `energies_by_level[l][b]`.
    #[serde(with = "crate::serde_ext::extended_real_rows")]
    pub energies_by_level: Vec<Vec<f64>>,
    /// Largest growth factor per doubling of the point count, minus one.
    #[serde(with = "crate::serde_ext::extended_real_vec")]
    pub growth_per_doubling: Vec<f64>,
    /// Ambient dimension of the clouds; energies for `β` at or above it are
    /// infinite for every measure and are never counted as stable.
    pub ambient_dim: usize,
    pub growth_threshold: f64,
    /// Largest `β` such that it and every smaller grid value are stable.
    pub stable_max_beta: Option<f64>,
    pub duplicate_pairs: usize,
}

pub const FROSTMAN_GROWTH: f64 = 0.2;

/// Energy growth across refinements of the same set (clouds ordered coarse
/// to fine). A `β` is stable when the energy grows by less than 20% per
/// doubling of the point count at every refinement step: bounded energy is
/// evidence that `dim ≥ β`.
pub fn frostman_probe(levels: &[PointCloud], beta_grid: &[f64]) -> Result<EnergyReport> {
    if levels.len() < 2 {
        return Err(Error::Insufficient(format!("frostman probe needs >= 2 refinements, got {}", levels.len())));
    }
    if beta_grid.is_empty() || beta_grid.iter().any(|b| !(*b > 0.0)) || beta_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("beta grid must be positive and increasing".into()));
    }
    let dim = levels[0].dim;
    if levels.iter().any(|c| c.dim != dim) {
        return Err(Error::InvalidParameter("refinements must share a dimension".into()));
    }
    if levels.windows(2).any(|w| w[1].len() <= w[0].len()) {
        return Err(Error::InvalidParameter("refinements must have increasing point counts".into()));
    }
    let hists: Vec<DistanceHistogram> = levels.iter().map(DistanceHistogram::build).collect();
    let energies_by_level: Vec<Vec<f64>> = hists.iter().map(|h| beta_grid.iter().map(|&b| h.energy(b)).collect()).collect();
    let growth_per_doubling: Vec<f64> = (0..beta_grid.len())
        .map(|b| {
            (1..levels.len())
                .map(|l| {
                    let doublings = (levels[l].len() as f64 / levels[l - 1].len() as f64).log2();
                    let (e0, e1) = (energies_by_level[l - 1][b], energies_by_level[l][b]);
                    if e0 > 0.0 && e1.is_finite() {
                        (e1 / e0).powf(1.0 / doublings) - 1.0
                    } else {
                        f64::INFINITY
                    }
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let all_duplicates = hists.last().map(|h| h.count.iter().all(|c| *c == 0.0)).unwrap_or(true);
    let mut stable_max_beta = None;
    if !all_duplicates {
        for (b, &beta) in beta_grid.iter().enumerate() {
            if beta < dim as f64 && growth_per_doubling[b] < FROSTMAN_GROWTH {
                stable_max_beta = Some(beta);
            } else {
                break;
            }
        }
    }
    Ok(EnergyReport {
        betas: beta_grid.to_vec(),
        energies: energies_by_level.last().cloned().unwrap_or_default(),
        level_points: levels.iter().map(PointCloud::len).collect(),
        energies_by_level,
        growth_per_doubling,
        ambient_dim: dim,
        growth_threshold: FROSTMAN_GROWTH,
        stable_max_beta,
        duplicate_pairs: hists.last().map(|h| h.duplicates).unwrap_or(0),
    })
}

/// `step, 2 step, ...` up to and including `max`.
pub fn beta_grid(step: f64, max: f64) -> Vec<f64> {
    let n = (max / step + 1e-9).floor() as usize;
    (1..=n).map(|k| k as f64 * step).collect()
}
