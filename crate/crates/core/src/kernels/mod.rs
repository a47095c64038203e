//! Incremental-variance kernels `σ²(s, t) = E|X_t - X_s|²` and covariances.

mod profile;

pub use profile::{HurstProfile, MarkedPoint, ProfileExponents, ProfileKind, ProfileSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Point};

/// Largest tail of the Weierstrass series tolerated by the default truncation.
pub const GW_TAIL_TARGET: f64 = 1e-12;
const GW_MAX_TERMS: usize = 2000;

fn check_hurst(h: f64, upper: f64) -> Result<()> {
    if !(h > 0.0 && h <= upper) {
        return Err(Error::InvalidParameter(format!("Hurst index {h} outside (0, {upper}]")));
    }
    Ok(())
}

fn scalar_pair(s: &Point, t: &Point) -> Result<(f64, f64)> {
    for p in [s, t] {
        if p.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: p.dim() });
        }
    }
    Ok((s.first(), t.first()))
}

/// `|t - s|^{2H}`.
pub fn fbm_sigma2(s: &Point, t: &Point, h: f64) -> Result<f64> {
    check_hurst(h, 1.0)?;
    let (s, t) = scalar_pair(s, t)?;
    Ok(pow_2h(t - s, h))
}

/// `½(|s|^{2H} + |t|^{2H} - |t - s|^{2H})`.
pub fn fbm_covariance(s: &Point, t: &Point, h: f64) -> Result<f64> {
    check_hurst(h, 1.0)?;
    let (s, t) = scalar_pair(s, t)?;
    Ok(0.5 * (pow_2h(s, h) + pow_2h(t, h) - pow_2h(t - s, h)))
}

fn pow_2h(x: f64, h: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        0.0
    } else {
        x.powf(2.0 * h)
    }
}

fn check_same_dim(s: &Point, t: &Point) -> Result<()> {
    if s.dim() != t.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), got: t.dim() });
    }
    Ok(())
}

/// Multiparameter fBm covariance `½[m([0,s])^{2H} + m([0,t])^{2H} - m([0,s] △ [0,t])^{2H}]`.
pub fn mpfbm_covariance(s: &Point, t: &Point, h: f64) -> Result<f64> {
    check_hurst(h, 0.5)?;
    check_same_dim(s, t)?;
    let ms = geometry::lebesgue_corner_volume(s);
    let mt = geometry::lebesgue_corner_volume(t);
    let md = geometry::sym_diff_measure(s, t)?;
    Ok(0.5 * (pow_2h(ms, h) + pow_2h(mt, h) - pow_2h(md, h)))
}

/// `m([0,s] △ [0,t])^{2H}`.
pub fn mpfbm_sigma2(s: &Point, t: &Point, h: f64) -> Result<f64> {
    check_hurst(h, 0.5)?;
    check_same_dim(s, t)?;
    Ok(pow_2h(geometry::sym_diff_measure(s, t)?, h))
}

/// Local form `K |t - s|^{H(t) + H(s)} + L (H(t) - H(s))²` of the mBm
/// incremental variance. Only meaningful near the point of interest.
pub fn mbm_sigma2_asymptotic(s: f64, t: f64, profile: &HurstProfile, k: f64, l: f64) -> Result<f64> {
    let hs = profile.eval(s)?;
    let ht = profile.eval(t)?;
    let d = (t - s).abs();
    let power = if d == 0.0 { 0.0 } else { d.powf(hs + ht) };
    Ok(k * power + l * (ht - hs).powi(2))
}

fn check_gw(lambda: f64, j: usize) -> Result<()> {
    if !(lambda >= 2.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 2, got {lambda}")));
    }
    if j < 1 {
        return Err(Error::InvalidParameter("truncation J must be >= 1".into()));
    }
    Ok(())
}

/// Incremental variance of the truncated Weierstrass series
/// `X_t = Σ_{j≤J} Z_j λ^{-jH(t)} sin(λ^j t + θ_j)`:
///
/// `2 Σ λ^{-j(H(u)+H(v))} sin²(λ^j (u-v) / 2) + ½ Σ (λ^{-jH(u)} - λ^{-jH(v)})²`.
///
/// For constant `H` the second sum vanishes and the first reduces to
/// `2 Σ λ^{-2jH} sin²(λ^j (u-v) / 2)`.
pub fn gw_sigma2(u: f64, v: f64, profile: &HurstProfile, lambda: f64, j: usize) -> Result<f64> {
    check_gw(lambda, j)?;
    let hu = profile.eval(u)?;
    let hv = profile.eval(v)?;
    Ok(gw_sigma2_raw(u, v, hu, hv, lambda, j))
}

/// Covariance `½ Σ λ^{-j(H(u)+H(v))} cos(λ^j (u - v))` of the truncated series.
pub fn gw_covariance(u: f64, v: f64, profile: &HurstProfile, lambda: f64, j: usize) -> Result<f64> {
    check_gw(lambda, j)?;
    let hu = profile.eval(u)?;
    let hv = profile.eval(v)?;
    Ok(gw_covariance_raw(u - v, hu, hv, lambda, j))
}

fn gw_covariance_raw(delta: f64, hu: f64, hv: f64, lambda: f64, j: usize) -> f64 {
    let (ru, rv) = (lambda.powf(-hu), lambda.powf(-hv));
    let (mut au, mut av, mut freq, mut sum) = (1.0, 1.0, 1.0, 0.0);
    for _ in 0..j {
        au *= ru;
        av *= rv;
        freq *= lambda;
        sum += au * av * (freq * delta).cos();
    }
    0.5 * sum
}

fn gw_sigma2_raw(u: f64, v: f64, hu: f64, hv: f64, lambda: f64, j: usize) -> f64 {
    if u == v {
        return 0.0;
    }
    let (ru, rv) = (lambda.powf(-hu), lambda.powf(-hv));
    let half = 0.5 * (u - v);
    let (mut au, mut av, mut freq) = (1.0, 1.0, 1.0);
    let (mut osc, mut drift) = (0.0, 0.0);
    for _ in 0..j {
        au *= ru;
        av *= rv;
        freq *= lambda;
        let s = (freq * half).sin();
        osc += au * av * s * s;
        drift += (au - av) * (au - av);
    }
    2.0 * osc + 0.5 * drift
}

/// Bounds on the two discarded sums beyond term `J`, given `inf H = h`.
pub fn gw_tail_bounds(lambda: f64, h: f64, j: usize) -> (f64, f64) {
    let q = lambda.powf(-2.0 * h);
    let lead = lambda.powf(-2.0 * (j as f64 + 1.0) * h) / (1.0 - q);
    (2.0 * lead, 0.5 * lead)
}

/// Smallest `J` whose total tail bound is below `target`.
pub fn gw_default_truncation(lambda: f64, inf_h: f64, target: f64) -> Result<usize> {
    check_gw(lambda, 1)?;
    (1..=GW_MAX_TERMS)
        .find(|&j| {
            let (a, b) = gw_tail_bounds(lambda, inf_h, j);
            a + b < target
        })
        .ok_or_else(|| Error::InvalidParameter(format!("no truncation up to {GW_MAX_TERMS} reaches tail {target}")))
}

fn default_one() -> f64 {
    1.0
}

/// Serialized kernel description, tagged by `family`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelSpec {
    Fbm {
        hurst: f64,
    },
    Mpfbm {
        hurst: f64,
        dim: usize,
    },
    MbmAsymptotic {
        profile: HurstProfile,
        #[serde(default = "default_one")]
        k: f64,
        #[serde(default = "default_one")]
        l: f64,
    },
    Gw {
        profile: HurstProfile,
        lambda: f64,
        /// `None` picks the smallest `J` with tail bound below 1e-12.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        truncation: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Fbm,
    Mpfbm,
    MbmAsymptotic,
    Gw,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Fbm => "fbm",
            Family::Mpfbm => "mpfbm",
            Family::MbmAsymptotic => "mbm_asymptotic",
            Family::Gw => "gw",
        })
    }
}

/// Anything that can report `σ²(s, t)` for points of a fixed dimension.
///
/// The exponent estimators work against this trait so that rescaled or
/// hand-built kernels can be fed to them as well.
pub trait IncrementVariance {
    fn dim(&self) -> usize;

    fn sigma2_at(&self, s: &[f64], t: &[f64]) -> Result<f64>;

    /// Pair distances below this are dominated by truncation, not by the
    /// process, and are not sampled by the estimators.
    fn resolution_floor(&self) -> f64 {
        0.0
    }

    /// Coordinate range `[lo, hi]` on which `sigma2_at` is defined, when
    /// narrower than the nonnegative orthant.
    fn coordinate_bounds(&self) -> Option<[f64; 2]> {
        None
    }
}

/// A validated kernel. Build with the family constructors or from a
/// [`KernelSpec`] (JSON).
///
/// ```
/// use gfield::geometry::Point;
/// use gfield::kernels::IncrementKernel;
///
/// let k = IncrementKernel::mpfbm(0.5, 2).unwrap();
/// let s = Point::new(vec![1.0, 1.0]).unwrap();
/// let t = Point::new(vec![2.0, 1.0]).unwrap();
/// assert_eq!(k.sigma2(&s, &t).unwrap(), 1.0);
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpec", into = "KernelSpec")]
pub struct IncrementKernel {
    spec: KernelSpec,
    /// Resolved GW truncation.
    truncation: usize,
}

impl IncrementKernel {
    pub fn from_spec(mut spec: KernelSpec) -> Result<Self> {
        let mut truncation = 0;
        match &mut spec {
            KernelSpec::Fbm { hurst } => check_hurst(*hurst, 1.0)?,
            KernelSpec::Mpfbm { hurst, dim } => {
                check_hurst(*hurst, 0.5)?;
                if *dim < 1 {
                    return Err(Error::InvalidParameter("mpfbm dimension must be >= 1".into()));
                }
            }
            KernelSpec::MbmAsymptotic { k, l, .. } => {
                if !(*k > 0.0 && *l > 0.0 && k.is_finite() && l.is_finite()) {
                    return Err(Error::InvalidParameter(format!("K and L must be positive, got {k}, {l}")));
                }
            }
            KernelSpec::Gw { profile, lambda, truncation: j } => {
                truncation = match j {
                    Some(j) => *j,
                    None => gw_default_truncation(*lambda, profile.inf(), GW_TAIL_TARGET)?,
                };
                check_gw(*lambda, truncation)?;
                *j = Some(truncation);
            }
        }
        Ok(IncrementKernel { spec, truncation })
    }

    pub fn fbm(hurst: f64) -> Result<Self> {
        Self::from_spec(KernelSpec::Fbm { hurst })
    }

    pub fn mpfbm(hurst: f64, dim: usize) -> Result<Self> {
        Self::from_spec(KernelSpec::Mpfbm { hurst, dim })
    }

    pub fn mbm_asymptotic(profile: HurstProfile, k: f64, l: f64) -> Result<Self> {
        Self::from_spec(KernelSpec::MbmAsymptotic { profile, k, l })
    }

    /// Weierstrass kernel; `truncation = None` uses the default tail target.
    pub fn gw(profile: HurstProfile, lambda: f64, truncation: Option<usize>) -> Result<Self> {
        Self::from_spec(KernelSpec::Gw { profile, lambda, truncation })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn family(&self) -> Family {
        match self.spec {
            KernelSpec::Fbm { .. } => Family::Fbm,
            KernelSpec::Mpfbm { .. } => Family::Mpfbm,
            KernelSpec::MbmAsymptotic { .. } => Family::MbmAsymptotic,
            KernelSpec::Gw { .. } => Family::Gw,
        }
    }

    pub fn dim(&self) -> usize {
        match self.spec {
            KernelSpec::Mpfbm { dim, .. } => dim,
            _ => 1,
        }
    }

    pub fn profile(&self) -> Option<&HurstProfile> {
        match &self.spec {
            KernelSpec::MbmAsymptotic { profile, .. } | KernelSpec::Gw { profile, .. } => Some(profile),
            _ => None,
        }
    }

    /// Resolved truncation `J` for GW kernels.
    pub fn truncation(&self) -> Option<usize> {
        matches!(self.spec, KernelSpec::Gw { .. }).then_some(self.truncation)
    }

    /// `(first, second)` tail bounds of the GW series at the resolved `J`.
    pub fn tail_bound(&self) -> Option<(f64, f64)> {
        match &self.spec {
            KernelSpec::Gw { profile, lambda, .. } => Some(gw_tail_bounds(*lambda, profile.inf(), self.truncation)),
            _ => None,
        }
    }

    pub fn has_covariance(&self) -> bool {
        !matches!(self.spec, KernelSpec::MbmAsymptotic { .. })
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.dim() });
        }
        Ok(())
    }

    pub fn sigma2(&self, s: &Point, t: &Point) -> Result<f64> {
        self.check_point(s)?;
        self.check_point(t)?;
        match &self.spec {
            KernelSpec::Fbm { hurst } => fbm_sigma2(s, t, *hurst),
            KernelSpec::Mpfbm { hurst, .. } => mpfbm_sigma2(s, t, *hurst),
            KernelSpec::MbmAsymptotic { profile, k, l } => mbm_sigma2_asymptotic(s.first(), t.first(), profile, *k, *l),
            KernelSpec::Gw { profile, lambda, .. } => gw_sigma2(s.first(), t.first(), profile, *lambda, self.truncation),
        }
    }

    /// Covariance `C(s, t)`; `None` for the asymptotic mBm kernel.
    pub fn covariance(&self, s: &Point, t: &Point) -> Option<Result<f64>> {
        if let Err(e) = self.check_point(s).and_then(|_| self.check_point(t)) {
            return Some(Err(e));
        }
        match &self.spec {
            KernelSpec::Fbm { hurst } => Some(fbm_covariance(s, t, *hurst)),
            KernelSpec::Mpfbm { hurst, .. } => Some(mpfbm_covariance(s, t, *hurst)),
            KernelSpec::MbmAsymptotic { .. } => None,
            KernelSpec::Gw { profile, lambda, .. } => {
                Some(gw_covariance(s.first(), t.first(), profile, *lambda, self.truncation))
            }
        }
    }
}

impl IncrementKernel {
    /// Covariance on raw coordinates, for callers that validated the points
    /// (dimension and profile domain) up front. 0 for kernels without one.
    pub(crate) fn covariance_at(&self, s: &[f64], t: &[f64]) -> f64 {
        match &self.spec {
            KernelSpec::Fbm { hurst } => 0.5 * (pow_2h(s[0], *hurst) + pow_2h(t[0], *hurst) - pow_2h(t[0] - s[0], *hurst)),
            KernelSpec::Mpfbm { hurst, .. } => {
                let ms: f64 = s.iter().product();
                let mt: f64 = t.iter().product();
                let md = geometry::sym_diff_raw(s, t);
                0.5 * (pow_2h(ms, *hurst) + pow_2h(mt, *hurst) - pow_2h(md, *hurst))
            }
            KernelSpec::MbmAsymptotic { .. } => 0.0,
            KernelSpec::Gw { profile, lambda, .. } => {
                let (hu, hv) = (profile.eval_unchecked(s[0]), profile.eval_unchecked(t[0]));
                gw_covariance_raw(s[0] - t[0], hu, hv, *lambda, self.truncation)
            }
        }
    }

    /// Whether every point of `[lower, upper]` is a valid argument.
    pub(crate) fn covers(&self, lower: &[f64], upper: &[f64]) -> bool {
        match self.profile() {
            Some(p) => p.contains(lower[0]) && p.contains(upper[0]),
            None => true,
        }
    }
}

impl IncrementVariance for IncrementKernel {
    fn dim(&self) -> usize {
        IncrementKernel::dim(self)
    }

    fn sigma2_at(&self, s: &[f64], t: &[f64]) -> Result<f64> {
        match &self.spec {
            KernelSpec::Fbm { hurst } => Ok(pow_2h(t[0] - s[0], *hurst)),
            KernelSpec::Mpfbm { hurst, .. } => Ok(pow_2h(geometry::sym_diff_raw(s, t), *hurst)),
            KernelSpec::MbmAsymptotic { profile, k, l } => mbm_sigma2_asymptotic(s[0], t[0], profile, *k, *l),
            KernelSpec::Gw { profile, lambda, .. } => {
                let hu = profile.eval(s[0])?;
                let hv = profile.eval(t[0])?;
                Ok(gw_sigma2_raw(s[0], t[0], hu, hv, *lambda, self.truncation))
            }
        }
    }

    fn resolution_floor(&self) -> f64 {
        match self.tail_bound() {
            // Below this distance the discarded tail is within 1e-4 of σ².
            Some((a, b)) => {
                let h = self.profile().map(|p| p.inf()).unwrap_or(0.5);
                (1e4 * (a + b)).powf(1.0 / (2.0 * h))
            }
            None => 0.0,
        }
    }

    fn coordinate_bounds(&self) -> Option<[f64; 2]> {
        self.profile().map(HurstProfile::domain)
    }
}

/// `c · σ²` for a positive constant `c`.
#[derive(Debug, Clone)]
pub struct Scaled<K> {
    pub inner: K,
    pub factor: f64,
}

impl<K: IncrementVariance> IncrementVariance for Scaled<K> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn sigma2_at(&self, s: &[f64], t: &[f64]) -> Result<f64> {
        Ok(self.factor * self.inner.sigma2_at(s, t)?)
    }

    fn resolution_floor(&self) -> f64 {
        self.inner.resolution_floor()
    }

    fn coordinate_bounds(&self) -> Option<[f64; 2]> {
        self.inner.coordinate_bounds()
    }
}

impl TryFrom<KernelSpec> for IncrementKernel {
    type Error = Error;
    fn try_from(spec: KernelSpec) -> Result<Self> {
        IncrementKernel::from_spec(spec)
    }
}

impl From<IncrementKernel> for KernelSpec {
    fn from(k: IncrementKernel) -> Self {
        k.spec
    }
}
