//! Points of the nonnegative orthant, corner rectangles `[0, t]` and their
//! Lebesgue measures, the three usual distances, and sampling of point pairs
//! inside a ball `B(t0, rho)`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// A parameter `t` in the nonnegative orthant `R_+^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidPoint("a point needs at least one coordinate".into()));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidPoint(format!("coordinate {c} is not a finite nonnegative real")));
        }
        Ok(Point(coords))
    }

    /// One-parameter point.
    pub fn scalar(t: f64) -> Result<Self> {
        Point::new(vec![t])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// First coordinate; the whole point for one-parameter processes.
    pub fn first(&self) -> f64 {
        self.0[0]
    }

    // Callers guarantee validity (used for points derived from valid ones).
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty() && coords.iter().all(|c| c.is_finite() && *c >= 0.0));
        Point(coords)
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

/// An axis-aligned rectangle `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lower: Point,
    pub upper: Point,
}

impl Rect {
    pub fn new(lower: Point, upper: Point) -> Result<Self> {
        check_dims(&lower, &upper)?;
        if lower.coords().iter().zip(upper.coords()).any(|(a, b)| a > b) {
            return Err(Error::InvalidParameter("rectangle lower corner exceeds upper corner".into()));
        }
        Ok(Rect { lower, upper })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Rect::new(Point::scalar(a)?, Point::scalar(b)?)
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn contains(&self, t: &Point) -> bool {
        t.dim() == self.dim()
            && t.coords()
                .iter()
                .zip(self.lower.coords().iter().zip(self.upper.coords()))
                .all(|(x, (a, b))| *a <= *x && *x <= *b)
    }
}

/// The Euclidean ball `B(center, radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub center: Point,
    pub radius: f64,
}

impl BallSpec {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("ball radius must be positive, got {radius}")));
        }
        Ok(BallSpec { center, radius })
    }

    pub fn contains(&self, t: &[f64]) -> bool {
        norm2_diff(self.center.coords(), t) <= self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    One,
    Two,
    Inf,
}

fn check_dims(s: &Point, t: &Point) -> Result<()> {
    if s.dim() != t.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), got: t.dim() });
    }
    Ok(())
}

/// Lebesgue measure of the corner rectangle `[0, t]`.
pub fn lebesgue_corner_volume(t: &Point) -> f64 {
    t.coords().iter().product()
}

/// `prod(a) - prod(b)` for `a >= b >= 0` componentwise, as a telescoping sum
/// of nonnegative terms so that nearby corners do not cancel catastrophically.
fn corner_difference(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut total = 0.0;
    for k in 0..n {
        let gap = a[k] - b[k];
        if gap == 0.0 {
            continue;
        }
        let head: f64 = b[..k].iter().product();
        let tail: f64 = a[k + 1..].iter().product();
        total += head * gap * tail;
    }
    total
}

/// Lebesgue measure of `[0, s] △ [0, t]`.
///
/// Equal to `prod(s) + prod(t) - 2 prod(s ∧ t)`, but evaluated as
/// `m([0,s] \ [0,t]) + m([0,t] \ [0,s])`, each a sum of nonnegative slabs.
pub fn sym_diff_measure(s: &Point, t: &Point) -> Result<f64> {
    check_dims(s, t)?;
    Ok(sym_diff_raw(s.coords(), t.coords()))
}

pub(crate) fn sym_diff_raw(s: &[f64], t: &[f64]) -> f64 {
    let meet: Vec<f64> = s.iter().zip(t).map(|(a, b)| a.min(*b)).collect();
    corner_difference(s, &meet) + corner_difference(t, &meet)
}

pub fn dist(s: &Point, t: &Point, norm: Norm) -> Result<f64> {
    check_dims(s, t)?;
    let (s, t) = (s.coords(), t.coords());
    Ok(match norm {
        Norm::One => s.iter().zip(t).map(|(a, b)| (a - b).abs()).sum(),
        Norm::Two => norm2_diff(s, t),
        Norm::Inf => s.iter().zip(t).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
    })
}

pub(crate) fn norm2_diff(s: &[f64], t: &[f64]) -> f64 {
    if s.len() == 1 {
        return (s[0] - t[0]).abs();
    }
    s.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// How the log-scale offsets of sampled pairs are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStrategy {
    /// Jittered regular lattice over (log-offset, log-distance). The lattice
    /// depends on `count`, so different counts give unrelated pair sets.
    Grid,
    /// Shifted Kronecker sequence. Sequential, so the pairs for `count = n`
    /// are a prefix of the pairs for any larger count with the same seed.
    #[default]
    QuasiRandom,
}

/// Smallest admissible pair distance relative to the radius.
pub const DISTANCE_FLOOR: f64 = 9.094947017729282e-13; // 2^-40

/// Shape of the pair distribution inside a ball.
///
/// Both the offset of the first point from the center and the pair distance
/// are log-uniform, spanning `depth_octaves` octaves below their maxima, so
/// every scale and every distance from the center gets pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSampling {
    pub strategy: PairStrategy,
    pub depth_octaves: f64,
    /// Lower bound on pair distances (in addition to the `2^-40 * radius` floor).
    pub min_distance: f64,
    /// Every coordinate of a sampled point lies in `[coordinate_min, coordinate_max]`.
    #[serde(default)]
    pub coordinate_min: f64,
    #[serde(default = "unbounded", with = "crate::serde_ext::extended_real")]
    pub coordinate_max: f64,
}

fn unbounded() -> f64 {
    f64::INFINITY
}

impl Default for PairSampling {
    fn default() -> Self {
        PairSampling {
            strategy: PairStrategy::QuasiRandom,
            depth_octaves: 20.0,
            min_distance: 0.0,
            coordinate_min: 0.0,
            coordinate_max: f64::INFINITY,
        }
    }
}

/// Sample `count` pairs `(s, t)` of the ball clipped to the nonnegative
/// orthant, with `0 < |t - s| < min(1, 2 radius)`.
pub fn sample_ball_pairs(
    ball: &BallSpec,
    count: usize,
    strategy: PairStrategy,
    seed: u64,
) -> Result<Vec<(Point, Point)>> {
    let sampling = PairSampling { strategy, ..PairSampling::default() };
    sample_ball_pairs_with(ball, count, &sampling, seed)
}

pub fn sample_ball_pairs_with(
    ball: &BallSpec,
    count: usize,
    sampling: &PairSampling,
    seed: u64,
) -> Result<Vec<(Point, Point)>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if !(sampling.depth_octaves > 0.0) {
        return Err(Error::InvalidParameter("depth_octaves must be positive".into()));
    }
    if !(sampling.coordinate_min >= 0.0 && sampling.coordinate_min < sampling.coordinate_max) {
        return Err(Error::InvalidParameter("coordinate bounds must satisfy 0 <= min < max".into()));
    }
    let center = ball.center.coords();
    let n = center.len();
    let radius = ball.radius;
    let d_max = (2.0 * radius).min(1.0);
    let floor = (DISTANCE_FLOOR * radius).max(sampling.min_distance);
    let scale = center.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
    let d_min_sampled = (d_max * (-sampling.depth_octaves).exp2()).max(floor);
    if d_min_sampled < 64.0 * f64::EPSILON * scale || floor >= d_max {
        return Err(Error::RadiusTooSmall { radius });
    }
    // Effective log2 span of distances actually drawn.
    let dist_span = (d_max / d_min_sampled).log2();
    let offset_span = sampling.depth_octaves;

    let mut rng = rng::stream(seed, rng::ids::PAIRS);
    let shift: [f64; 2] = [rng.random::<f64>(), rng.random::<f64>()];
    // Plastic-number Kronecker steps.
    const G: f64 = 1.324_717_957_244_746;
    let steps = [1.0 / G, 1.0 / (G * G)];
    let side = (count as f64).sqrt().ceil() as usize;

    let mut pairs = Vec::with_capacity(count);
    let max_attempts = 1000 * count + 10_000;
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut dir = vec![0.0; n];
    for attempt in 0..max_attempts {
        if pairs.len() == count {
            break;
        }
        let (u1, u2) = match sampling.strategy {
            PairStrategy::QuasiRandom => {
                let k = (attempt + 1) as f64;
                ((shift[0] + k * steps[0]).fract(), (shift[1] + k * steps[1]).fract())
            }
            PairStrategy::Grid => {
                let cell = attempt % (side * side);
                let (i, j) = (cell / side, cell % side);
                (
                    (i as f64 + rng.random::<f64>()) / side as f64,
                    (j as f64 + rng.random::<f64>()) / side as f64,
                )
            }
        };
        let offset = radius * (-offset_span * u1).exp2();
        let d = d_max * (-dist_span * u2).exp2();
        random_direction(&mut rng, &mut dir);
        for k in 0..n {
            s[k] = center[k] + offset * dir[k];
        }
        random_direction(&mut rng, &mut dir);
        let mut accepted = false;
        for sign in [1.0, -1.0] {
            for k in 0..n {
                t[k] = s[k] + sign * d * dir[k];
            }
            if admissible(ball, &s, &t, floor, d_max, [sampling.coordinate_min, sampling.coordinate_max]) {
                accepted = true;
                break;
            }
        }
        if accepted {
            pairs.push((Point::from_raw(s.clone()), Point::from_raw(t.clone())));
        }
    }
    if pairs.len() < count {
        return Err(Error::InvalidParameter(format!(
            "could only place {} of {count} pairs in the ball (is it outside the sampling domain?)",
            pairs.len()
        )));
    }
    Ok(pairs)
}

fn admissible(ball: &BallSpec, s: &[f64], t: &[f64], floor: f64, d_max: f64, bounds: [f64; 2]) -> bool {
    if s.iter().chain(t).any(|x| !(*x >= bounds[0] && *x <= bounds[1])) {
        return false;
    }
    if !ball.contains(s) || !ball.contains(t) {
        return false;
    }
    let d = norm2_diff(s, t);
    d > floor && d > 0.0 && d < d_max
}

fn random_direction<R: Rng>(rng: &mut R, out: &mut [f64]) {
    if out.len() == 1 {
        out[0] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return;
    }
    loop {
        let mut norm = 0.0;
        for x in out.iter_mut() {
            *x = rng.sample(StandardNormal);
            norm += *x * *x;
        }
        let norm = norm.sqrt();
        if norm > 1e-12 {
            out.iter_mut().for_each(|x| *x /= norm);
            return;
        }
    }
}

/// Empirical constants `(m, M)` with `m d1(s,t) <= m([0,s] △ [0,t]) <= M dinf(s,t)`
/// over the given pairs: `m` is the smallest ratio to `d1`, `M` the largest to `dinf`.
pub fn corner_measure_constants(pairs: &[(Point, Point)]) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (s, t) in pairs {
        let m = sym_diff_measure(s, t)?;
        let d1 = dist(s, t, Norm::One)?;
        let dinf = dist(s, t, Norm::Inf)?;
        if d1 > 0.0 {
            lo = lo.min(m / d1);
            hi = hi.max(m / dinf);
        }
    }
    if !lo.is_finite() {
        return Err(Error::Insufficient("no pair with positive distance".into()));
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    /// Subset-sum expansion of `m([0,s] \ [0,t])`: for `I = {i : s_i > t_i}`,
    /// `prod_{i not in I} s_i * sum_{J ⊊ I} prod_{i in J} t_i prod_{i in I\J} (s_i - t_i)`.
    fn set_minus_by_subsets(s: &[f64], t: &[f64]) -> f64 {
        let n = s.len();
        let idx: Vec<usize> = (0..n).filter(|&i| s[i] > t[i]).collect();
        if idx.is_empty() {
            return 0.0;
        }
        let outside: f64 = (0..n).filter(|i| !idx.contains(i)).map(|i| s[i]).product();
        let mut sum = 0.0;
        for mask in 0..(1u32 << idx.len()) - 1 {
            let mut term = 1.0;
            for (b, &i) in idx.iter().enumerate() {
                term *= if mask & (1 << b) != 0 { t[i] } else { s[i] - t[i] };
            }
            sum += term;
        }
        outside * sum
    }

    #[test]
    fn corner_volumes() {
        assert_eq!(lebesgue_corner_volume(&p(&[1.0, 1.0])), 1.0);
        assert_eq!(lebesgue_corner_volume(&p(&[2.0, 3.0])), 6.0);
        assert_eq!(lebesgue_corner_volume(&p(&[0.0, 5.0])), 0.0);
    }

    #[test]
    fn sym_diff_examples() {
        assert_eq!(sym_diff_measure(&p(&[1.0, 1.0]), &p(&[1.0, 1.0])).unwrap(), 0.0);
        assert_eq!(sym_diff_measure(&p(&[1.0, 1.0]), &p(&[2.0, 1.0])).unwrap(), 1.0);
        assert_eq!(sym_diff_measure(&p(&[1.0, 2.0]), &p(&[2.0, 1.0])).unwrap(), 2.0);
        assert!(matches!(
            sym_diff_measure(&p(&[1.0]), &p(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sym_diff_matches_subset_expansion() {
        let mut rng = rng::stream(7, 1);
        for n in 1..=4 {
            for _ in 0..200 {
                let s: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
                let t: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
                let oracle = set_minus_by_subsets(&s, &t) + set_minus_by_subsets(&t, &s);
                let closed: f64 = s.iter().product::<f64>() + t.iter().product::<f64>()
                    - 2.0 * s.iter().zip(&t).map(|(a, b)| a.min(*b)).product::<f64>();
                let got = sym_diff_raw(&s, &t);
                assert!((got - oracle).abs() <= 1e-12 * (1.0 + oracle), "{s:?} {t:?}");
                assert!((got - closed).abs() <= 1e-12 * (1.0 + closed));
            }
        }
    }

    #[test]
    fn sym_diff_is_accurate_for_close_corners() {
        let s = [1.0, 1.0];
        let t = [1.0 + 1e-13, 1.0 - 2e-13];
        let got = sym_diff_raw(&s, &t);
        let want = (t[0] - s[0]) * t[1] + (s[1] - t[1]) * s[0];
        assert!((got - want).abs() < 1e-6 * want);
    }

    #[test]
    fn distances() {
        let (s, t) = (p(&[0.0, 0.0]), p(&[3.0, 4.0]));
        assert_eq!(dist(&s, &t, Norm::Two).unwrap(), 5.0);
        assert_eq!(dist(&s, &t, Norm::One).unwrap(), 7.0);
        assert_eq!(dist(&s, &t, Norm::Inf).unwrap(), 4.0);
    }

    #[test]
    fn point_validation() {
        assert!(Point::new(vec![]).is_err());
        assert!(Point::new(vec![-1.0]).is_err());
        assert!(Point::new(vec![f64::NAN]).is_err());
        assert!(BallSpec::new(p(&[1.0]), 0.0).is_err());
    }

    #[test]
    fn ball_pairs_basic_contract() {
        let ball = BallSpec::new(p(&[1.0]), 0.5).unwrap();
        assert!(sample_ball_pairs(&ball, 0, PairStrategy::Grid, 3).unwrap().is_empty());
        let pairs = sample_ball_pairs(&ball, 100, PairStrategy::QuasiRandom, 3).unwrap();
        assert_eq!(pairs.len(), 100);
        for (s, t) in &pairs {
            assert!((s.first() - 1.0).abs() <= 0.5 && (t.first() - 1.0).abs() <= 0.5);
            let d = (t.first() - s.first()).abs();
            assert!(d > 0.0 && d < 1.0);
        }
        let a = sample_ball_pairs(&ball, 64, PairStrategy::Grid, 11).unwrap();
        let b = sample_ball_pairs(&ball, 64, PairStrategy::Grid, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn quasi_random_pairs_are_prefix_stable() {
        let ball = BallSpec::new(p(&[0.7, 1.2]), 0.01).unwrap();
        let short = sample_ball_pairs(&ball, 50, PairStrategy::QuasiRandom, 9).unwrap();
        let long = sample_ball_pairs(&ball, 500, PairStrategy::QuasiRandom, 9).unwrap();
        assert_eq!(&long[..50], &short[..]);
    }

    #[test]
    fn ball_clipped_at_orthant() {
        let ball = BallSpec::new(p(&[0.1, 0.05]), 0.2).unwrap();
        let pairs = sample_ball_pairs(&ball, 300, PairStrategy::QuasiRandom, 1).unwrap();
        for (s, t) in pairs {
            assert!(s.coords().iter().chain(t.coords()).all(|x| *x >= 0.0));
            assert!(ball.contains(s.coords()) && ball.contains(t.coords()));
        }
    }

    #[test]
    fn tiny_radius_is_rejected() {
        let ball = BallSpec::new(p(&[1.0]), 1e-9).unwrap();
        assert!(matches!(
            sample_ball_pairs(&ball, 10, PairStrategy::QuasiRandom, 0),
            Err(Error::RadiusTooSmall { .. })
        ));
    }

    #[test]
    fn corner_constants_bounded_away_from_zero() {
        // Pairs in [a, b] = [1, 2]^2.
        let ball = BallSpec::new(p(&[1.5, 1.5]), 0.5).unwrap();
        let mut previous = f64::INFINITY;
        for count in [100, 400, 1600, 6400] {
            let pairs = sample_ball_pairs(&ball, count, PairStrategy::QuasiRandom, 5).unwrap();
            let (lo, hi) = corner_measure_constants(&pairs).unwrap();
            assert!(lo > 0.5 && hi.is_finite() && hi <= 2.0 * 2.0 + 1e-12);
            assert!(lo <= previous);
            previous = lo;
            for (s, t) in &pairs {
                let m = sym_diff_measure(s, t).unwrap();
                assert!(lo * dist(s, t, Norm::One).unwrap() <= m * (1.0 + 1e-12));
                assert!(m <= hi * dist(s, t, Norm::Inf).unwrap() * (1.0 + 1e-12));
            }
        }
    }
}
