//! Local Hölder exponent `α̃` and sub-exponent `α̲` read off an incremental
//! variance, plus the oscillation exponent of a sampled path.
//!
//! For each radius `ρ` of a ladder, pairs `(s, t)` are sampled in
//! `B(t0, ρ)` and the points `(ln d, ln σ²)` are collected. Two families of
//! statistics are reported:
//!
//! * the raw log ratios `r = ln σ² / (2 ln d)`, whose min and max over the
//!   ball are `inf_ratio(ρ)` and `sup_ratio(ρ)`;
//! * the slopes of the upper and lower envelopes of the `(ln d, ln σ²)`
//!   cloud. `σ² ≤ C d^{2α}` on the ball exactly when the upper envelope has
//!   slope at least `2α`, so the upper envelope slope is `2α̃`; likewise the
//!   lower envelope slope is `2α̲`.
//!
//! The raw ratio carries a bias `ln C / (2 ln d)` that vanishes only like
//! `1 / |ln ρ|`, whereas envelope slopes are insensitive to multiplicative
//! constants. The extrapolated exponents therefore come from the envelopes
//! at the smallest radius of the ladder.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sample_ball_pairs_with, BallSpec, PairSampling, PairStrategy, Point};
use crate::kernels::IncrementVariance;
use crate::sampler::SamplePath;
use crate::stats;

/// Sub-exponent estimates above this are reported as `+inf`.
pub const DEFAULT_CAP: f64 = 50.0;
/// `σ²` at or below this is treated as zero and the pair is skipped.
pub const SIGMA2_FLOOR: f64 = 1e-300;
/// Inversions `α̃ > α̲` up to this size count as rounding and are not flagged.
pub const ORDERING_SLACK: f64 = 1e-6;

/// Geometric ladder `2^-3, 2^-4, ..., 2^-10`.
pub fn default_rho_ladder() -> Vec<f64> {
    geometric_ladder(3, 10)
}

/// `2^-from, ..., 2^-to`.
pub fn geometric_ladder(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| (-k as f64).exp2()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentOptions {
    pub pairs_per_rho: usize,
    pub seed: u64,
    pub sampling: PairSampling,
    #[serde(with = "crate::serde_ext::extended_real")]
    pub cap: f64,
}

impl Default for ExponentOptions {
    fn default() -> Self {
        ExponentOptions { pairs_per_rho: 10_000, seed: 0, sampling: PairSampling::default(), cap: DEFAULT_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentDiagnostics {
    /// Upper-envelope exponent per radius.
    pub envelope_tilde: Vec<f64>,
    /// Lower-envelope exponent per radius (`inf` above the cap).
    #[serde(with = "crate::serde_ext::extended_real_vec")]
    pub envelope_under: Vec<f64>,
    /// Largest absolute residual of the upper / lower envelope fits, per radius.
    pub residual_tilde: Vec<f64>,
    pub residual_under: Vec<f64>,
    /// Change of each envelope estimate between the last two radii; small
    /// values indicate the ladder has reached its limit.
    pub last_step_tilde: f64,
    #[serde(with = "crate::serde_ext::extended_real")]
    pub last_step_under: f64,
    /// Pairs skipped because `σ² ≤ 1e-300`.
    pub excluded_pairs: usize,
    /// Smallest pair distance admitted by the sampler.
    pub min_distance: f64,
    /// Set when the fits gave `α̃ > α̲ + ORDERING_SLACK`. Any inversion, flagged
    /// or not, is resolved by replacing both with their mean.
    pub ordering_projected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub t0: Point,
    pub rho_ladder: Vec<f64>,
    pub inf_ratio: Vec<f64>,
    #[serde(with = "crate::serde_ext::extended_real_vec")]
    pub sup_ratio: Vec<f64>,
    pub alpha_tilde_hat: f64,
    #[serde(with = "crate::serde_ext::extended_real")]
    pub alpha_under_hat: f64,
    pub pair_count: usize,
    pub diagnostics: ExponentDiagnostics,
}

/// Pairs of one ball with their distances and variances.
#[derive(Debug, Clone)]
pub(crate) struct BallScan {
    pub rho: f64,
    pub dim: usize,
    /// Flattened `s` and `t` coordinates of kept pairs.
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub dist: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub excluded: usize,
}

impl BallScan {
    fn len(&self) -> usize {
        self.dist.len()
    }
}

fn validate_ladder(rho_ladder: &[f64]) -> Result<()> {
    if rho_ladder.is_empty() {
        return Err(Error::InvalidParameter("rho ladder is empty".into()));
    }
    if rho_ladder.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidParameter("rho ladder entries must be positive".into()));
    }
    if rho_ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("rho ladder must be strictly decreasing".into()));
    }
    Ok(())
}

/// Sampling options tightened to the kernel's resolution floor and domain.
fn effective_sampling<K: IncrementVariance + ?Sized>(kernel: &K, options: &ExponentOptions) -> PairSampling {
    let mut sampling = options.sampling;
    sampling.min_distance = sampling.min_distance.max(kernel.resolution_floor());
    if let Some([lo, hi]) = kernel.coordinate_bounds() {
        sampling.coordinate_min = sampling.coordinate_min.max(lo);
        sampling.coordinate_max = sampling.coordinate_max.min(hi);
    }
    sampling
}

pub(crate) fn scan_ball<K: IncrementVariance + ?Sized>(
    kernel: &K,
    t0: &Point,
    rho: f64,
    options: &ExponentOptions,
) -> Result<BallScan> {
    let sampling = effective_sampling(kernel, options);
    let ball = BallSpec::new(t0.clone(), rho)?;
    let pairs = sample_ball_pairs_with(&ball, options.pairs_per_rho, &sampling, options.seed)?;
    let n = t0.dim();
    let mut scan = BallScan {
        rho,
        dim: n,
        s: Vec::with_capacity(pairs.len() * n),
        t: Vec::with_capacity(pairs.len() * n),
        dist: Vec::with_capacity(pairs.len()),
        sigma2: Vec::with_capacity(pairs.len()),
        excluded: 0,
    };
    for (s, t) in &pairs {
        let v = kernel.sigma2_at(s.coords(), t.coords())?;
        if !(v > SIGMA2_FLOOR) {
            scan.excluded += 1;
            continue;
        }
        scan.s.extend_from_slice(s.coords());
        scan.t.extend_from_slice(t.coords());
        scan.dist.push(crate::geometry::norm2_diff(s.coords(), t.coords()));
        scan.sigma2.push(v);
    }
    if scan.len() == 0 && !pairs.is_empty() {
        return Err(Error::DegenerateKernel(format!(
            "all {} sampled pairs in B(t0, {rho}) have zero incremental variance",
            pairs.len()
        )));
    }
    Ok(scan)
}

/// Slope of the upper (`upper = true`) or lower envelope of `(x, y)` over
/// bins of width `ln 2` in `x`, with the largest absolute fit residual.
///
/// Extremes are taken relative to the current line, then the line is refit
/// through the per-bin extremes; a few rounds converge.
fn envelope_slope(x: &[f64], y: &[f64], upper: bool) -> Result<(f64, f64)> {
    const MIN_BINS: usize = 4;
    const MIN_PER_BIN: usize = 4;
    let width = std::f64::consts::LN_2;
    let xmin = x.iter().copied().fold(f64::INFINITY, f64::min);
    let xmax = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let nbins = (((xmax - xmin) / width).floor() as usize).max(1);
    let bin = |v: f64| (((v - xmin) / (xmax - xmin) * nbins as f64) as usize).min(nbins - 1);
    let mut counts = vec![0usize; nbins];
    for v in x {
        counts[bin(*v)] += 1;
    }
    let usable = counts.iter().filter(|&&c| c >= MIN_PER_BIN).count();
    if usable < MIN_BINS {
        return Err(Error::Insufficient(format!(
            "pair distances span only {usable} populated octaves; need {MIN_BINS}"
        )));
    }
    let mut fit = stats::ols(x, y).ok_or_else(|| Error::Insufficient("pair distances are all equal".into()))?;
    let sign = if upper { 1.0 } else { -1.0 };
    let mut residual = 0.0;
    for _ in 0..4 {
        let mut best: Vec<Option<(usize, f64)>> = vec![None; nbins];
        for (i, (&xi, &yi)) in x.iter().zip(y).enumerate() {
            let b = bin(xi);
            if counts[b] < MIN_PER_BIN {
                continue;
            }
            let e = sign * (yi - fit.slope * xi);
            if best[b].is_none_or(|(_, v)| e > v) {
                best[b] = Some((i, e));
            }
        }
        let (ex, ey): (Vec<f64>, Vec<f64>) = best.iter().flatten().map(|(i, _)| (x[*i], y[*i])).unzip();
        fit = stats::ols(&ex, &ey).ok_or_else(|| Error::Insufficient("envelope fit failed".into()))?;
        residual = ex
            .iter()
            .zip(&ey)
            .map(|(a, b)| (b - fit.intercept - fit.slope * a).abs())
            .fold(0.0, f64::max);
    }
    Ok((fit.slope / 2.0, residual))
}

/// Exponent estimate with the default sampling options.
pub fn kernel_exponents<K: IncrementVariance + ?Sized>(
    kernel: &K,
    t0: &Point,
    rho_ladder: &[f64],
    pairs_per_rho: usize,
    seed: u64,
) -> Result<ExponentEstimate> {
    let options = ExponentOptions { pairs_per_rho, seed, ..ExponentOptions::default() };
    kernel_exponents_with(kernel, t0, rho_ladder, &options)
}

pub fn kernel_exponents_with<K: IncrementVariance + ?Sized>(
    kernel: &K,
    t0: &Point,
    rho_ladder: &[f64],
    options: &ExponentOptions,
) -> Result<ExponentEstimate> {
    Ok(estimate_with_scans(kernel, t0, rho_ladder, options)?.0)
}

pub(crate) fn estimate_with_scans<K: IncrementVariance + ?Sized>(
    kernel: &K,
    t0: &Point,
    rho_ladder: &[f64],
    options: &ExponentOptions,
) -> Result<(ExponentEstimate, Vec<BallScan>)> {
    validate_ladder(rho_ladder)?;
    if t0.dim() != kernel.dim() {
        return Err(Error::DimensionMismatch { expected: kernel.dim(), got: t0.dim() });
    }
    if options.pairs_per_rho < 2 {
        return Err(Error::InvalidParameter("pairs_per_rho must be at least 2".into()));
    }
    let cap = options.cap;
    let scans = rho_ladder
        .iter()
        .map(|&rho| scan_ball(kernel, t0, rho, options))
        .collect::<Result<Vec<_>>>()?;

    let mut inf_ratio = Vec::with_capacity(scans.len());
    let mut sup_ratio = Vec::with_capacity(scans.len());
    let mut envelope_tilde = Vec::with_capacity(scans.len());
    let mut envelope_under = Vec::with_capacity(scans.len());
    let mut residual_tilde = Vec::with_capacity(scans.len());
    let mut residual_under = Vec::with_capacity(scans.len());
    for scan in &scans {
        let x: Vec<f64> = scan.dist.iter().map(|d| d.ln()).collect();
        let y: Vec<f64> = scan.sigma2.iter().map(|v| v.ln()).collect();
        let (lo, hi) = x
            .iter()
            .zip(&y)
            .map(|(a, b)| b / (2.0 * a))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
        inf_ratio.push(lo);
        sup_ratio.push(if hi > cap { f64::INFINITY } else { hi });
        let (tilde, res_t) = envelope_slope(&x, &y, true)?;
        let (under, res_u) = envelope_slope(&x, &y, false)?;
        envelope_tilde.push(tilde);
        envelope_under.push(if under > cap { f64::INFINITY } else { under });
        residual_tilde.push(res_t);
        residual_under.push(res_u);
    }
    let last = scans.len() - 1;
    let step = |v: &[f64]| if v.len() >= 2 { v[last] - v[last - 1] } else { 0.0 };
    let mut alpha_tilde_hat = envelope_tilde[last];
    let mut alpha_under_hat = envelope_under[last];
    // Gaps within the slack are rounding between the two fits and are merged
    // silently; larger ones are flagged.
    let ordering_projected = alpha_tilde_hat > alpha_under_hat + ORDERING_SLACK;
    if alpha_tilde_hat > alpha_under_hat {
        let mid = 0.5 * (alpha_tilde_hat + alpha_under_hat);
        alpha_tilde_hat = mid;
        alpha_under_hat = mid;
    }
    let sampling = effective_sampling(kernel, options);
    let estimate = ExponentEstimate {
        t0: t0.clone(),
        rho_ladder: rho_ladder.to_vec(),
        inf_ratio,
        sup_ratio,
        alpha_tilde_hat,
        alpha_under_hat,
        pair_count: scans.iter().map(BallScan::len).sum(),
        diagnostics: ExponentDiagnostics {
            last_step_tilde: step(&envelope_tilde),
            last_step_under: step(&envelope_under),
            envelope_tilde,
            envelope_under,
            residual_tilde,
            residual_under,
            excluded_pairs: scans.iter().map(|s| s.excluded).sum(),
            min_distance: sampling.min_distance,
            ordering_projected,
        },
    };
    Ok((estimate, scans))
}

/// A sampled pair that breaks `d^{2α̲+ε} ≤ σ² ≤ d^{2α̃-ε}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rho: f64,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub sigma2: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub epsilon: f64,
    pub alpha_tilde_hat: f64,
    #[serde(with = "crate::serde_ext::extended_real")]
    pub alpha_under_hat: f64,
    /// Largest ladder radius from which on (inclusive, down to the smallest)
    /// no sampled pair violates the sandwich.
    pub rho0_found: Option<f64>,
    /// Violation count per ladder radius.
    pub violation_counts: Vec<usize>,
    /// First few violating pairs (at most [`MAX_REPORTED_VIOLATIONS`]).
    pub violations: Vec<Violation>,
}

pub const MAX_REPORTED_VIOLATIONS: usize = 64;

/// Check `d^{2α̲+ε} ≤ σ²(s, t) ≤ d^{2α̃-ε}` on the sampled pairs of every
/// ladder ball, with the exponents estimated from the same pairs.
pub fn sandwich_check<K: IncrementVariance + ?Sized>(
    kernel: &K,
    t0: &Point,
    epsilon: f64,
    rho_ladder: &[f64],
    pairs_per_rho: usize,
    seed: u64,
) -> Result<SandwichReport> {
    let options = ExponentOptions { pairs_per_rho, seed, ..ExponentOptions::default() };
    sandwich_check_with(kernel, t0, epsilon, rho_ladder, &options)
}

pub fn sandwich_check_with<K: IncrementVariance + ?Sized>(
    kernel: &K,
    t0: &Point,
    epsilon: f64,
    rho_ladder: &[f64],
    options: &ExponentOptions,
) -> Result<SandwichReport> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let (est, scans) = estimate_with_scans(kernel, t0, rho_ladder, options)?;
    let (at, au) = (est.alpha_tilde_hat, est.alpha_under_hat);
    if epsilon >= 2.0 * at {
        return Err(Error::InvalidEpsilon { epsilon, bound: 2.0 * at });
    }
    let mut violation_counts = Vec::with_capacity(scans.len());
    let mut violations = Vec::new();
    for scan in &scans {
        let n = scan.dim;
        let mut count = 0;
        for i in 0..scan.len() {
            let (d, v) = (scan.dist[i], scan.sigma2[i]);
            let upper = d.powf(2.0 * at - epsilon);
            let lower = if au.is_finite() { d.powf(2.0 * au + epsilon) } else { 0.0 };
            if v < lower || v > upper {
                count += 1;
                if violations.len() < MAX_REPORTED_VIOLATIONS {
                    violations.push(Violation {
                        rho: scan.rho,
                        s: scan.s[i * n..(i + 1) * n].to_vec(),
                        t: scan.t[i * n..(i + 1) * n].to_vec(),
                        sigma2: v,
                        lower,
                        upper,
                    });
                }
            }
        }
        violation_counts.push(count);
    }
    // Largest ρ such that it and every smaller ladder radius are clean.
    let mut rho0_found = None;
    for (k, &rho) in rho_ladder.iter().enumerate().rev() {
        if violation_counts[k] == 0 {
            rho0_found = Some(rho);
        } else {
            break;
        }
    }
    Ok(SandwichReport { epsilon, alpha_tilde_hat: at, alpha_under_hat: au, rho0_found, violation_counts, violations })
}

/// Radii with fewer grid points than this are skipped by [`path_local_exponent`].
pub const MIN_POINTS_PER_BALL: usize = 8;
pub const MIN_PATH_RADII: usize = 4;

/// Slope of `ln osc(ρ)` against `ln ρ`, where `osc(ρ)` is the largest
/// coordinate range of the path over grid points in `B(t0, ρ)`.
///
/// ```
/// use gfield::exponents::path_local_exponent;
/// use gfield::geometry::Point;
/// use gfield::sampler::{GridSpec, SamplePath};
///
/// let grid = GridSpec::interval(0.0, 1.0, 4097).unwrap();
/// let path = SamplePath::from_fn(grid, |t| (t[0] - 0.5).abs().sqrt()).unwrap();
/// let ladder: Vec<f64> = (3..=9).map(|k| 2f64.powi(-k)).collect();
/// let slope = path_local_exponent(&path, &Point::scalar(0.5).unwrap(), &ladder).unwrap();
/// assert!((slope - 0.5).abs() < 0.05);
/// ```
pub fn path_local_exponent(path: &SamplePath, t0: &Point, rho_ladder: &[f64]) -> Result<f64> {
    validate_ladder(rho_ladder)?;
    if t0.dim() != path.index_dim() {
        return Err(Error::DimensionMismatch { expected: path.index_dim(), got: t0.dim() });
    }
    if !path.grid.domain.contains(t0) {
        return Err(Error::InvalidPoint(format!("t0 = {:?} is outside the path grid", t0.coords())));
    }
    let n = path.index_dim();
    let d = path.d;
    let mut p = vec![0.0; n];
    let mut lo = vec![vec![f64::INFINITY; d]; rho_ladder.len()];
    let mut hi = vec![vec![f64::NEG_INFINITY; d]; rho_ladder.len()];
    let mut counts = vec![0usize; rho_ladder.len()];
    for k in 0..path.len() {
        path.grid.point_into(path.grid_index(k), &mut p);
        let dist = crate::geometry::norm2_diff(&p, t0.coords());
        // The ladder is decreasing, so the balls containing the point form a prefix.
        for (r, &rho) in rho_ladder.iter().enumerate() {
            if dist > rho {
                break;
            }
            counts[r] += 1;
            for (i, v) in path.value(k).iter().enumerate() {
                lo[r][i] = lo[r][i].min(*v);
                hi[r][i] = hi[r][i].max(*v);
            }
        }
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut populated = 0;
    for r in 0..rho_ladder.len() {
        if counts[r] < MIN_POINTS_PER_BALL {
            continue;
        }
        populated += 1;
        let osc = (0..d).map(|i| hi[r][i] - lo[r][i]).fold(0.0, f64::max);
        if osc > 0.0 {
            xs.push(rho_ladder[r].ln());
            ys.push(osc.ln());
        }
    }
    if populated < MIN_PATH_RADII {
        return Err(Error::Insufficient(format!(
            "only {populated} ladder radii contain at least {MIN_POINTS_PER_BALL} grid points; need {MIN_PATH_RADII}"
        )));
    }
    if xs.is_empty() {
        return Err(Error::DegeneratePath("path is constant on every ladder ball".into()));
    }
    if xs.len() < 2 {
        return Err(Error::Insufficient("oscillation vanishes on all but one radius".into()));
    }
    Ok(stats::ols(&xs, &ys).expect("distinct radii").slope)
}

/// Quasi-random sampling mode whose pair sets are nested across counts.
pub fn superset_sampling() -> PairSampling {
    PairSampling { strategy: PairStrategy::QuasiRandom, ..PairSampling::default() }
}
