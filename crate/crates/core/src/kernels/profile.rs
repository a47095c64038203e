//! Regularity functions `H : domain -> (0, 1)` with declared local exponents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shapes of built-in profiles. Parameter layouts:
///
/// | kind             | params                                  | `H(t)`                                   |
/// |------------------|-----------------------------------------|------------------------------------------|
/// | `constant`       | `[h]`                                   | `h`                                      |
/// | `affine`         | `[intercept, slope]`                    | `intercept + slope * t`                  |
/// | `power_cusp`     | `[base, amplitude, cusp, gamma]`        | `base + amplitude * |t - cusp|^gamma`    |
/// | `monotone_cusp`  | `[base, amplitude, cusp, gamma]`        | `base + amplitude * sgn(t - cusp) |t - cusp|^gamma` |
/// | `smooth_periodic`| `[mean, amplitude, frequency, phase]`   | `mean + amplitude * sin(2π f t + phase)` |
/// | `user_table`     | `[t0, h0, t1, h1, ...]`                 | piecewise linear through the knots       |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Constant,
    Affine,
    PowerCusp,
    MonotoneCusp,
    SmoothPeriodic,
    UserTable,
}

/// Declared `(local exponent, sub-exponent)` of the profile at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint {
    pub t0: f64,
    #[serde(with = "crate::serde_ext::extended_real")]
    pub local: f64,
    #[serde(with = "crate::serde_ext::extended_real")]
    pub sub: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileExponents {
    Known { local: f64, sub: f64 },
    /// No analytic value is declared at this point.
    Unknown,
}

/// Serialized form of a [`HurstProfile`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    pub params: Vec<f64>,
    pub domain: [f64; 2],
    #[serde(default, with = "crate::serde_ext::opt_extended_real", skip_serializing_if = "Option::is_none")]
    pub declared_beta: Option<f64>,
    #[serde(default)]
    pub marked_points: Vec<MarkedPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileSpec", into = "ProfileSpec")]
pub struct HurstProfile {
    spec: ProfileSpec,
    beta: f64,
    inf_h: f64,
    sup_h: f64,
}

const VALIDATION_SAMPLES: usize = 20_001;

impl HurstProfile {
    pub fn from_spec(spec: ProfileSpec) -> Result<Self> {
        let [lo, hi] = spec.domain;
        if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!("profile domain [{lo}, {hi}] must be a bounded interval of R+")));
        }
        let expected = match spec.kind {
            ProfileKind::Constant => Some(1),
            ProfileKind::Affine => Some(2),
            ProfileKind::PowerCusp | ProfileKind::MonotoneCusp | ProfileKind::SmoothPeriodic => Some(4),
            ProfileKind::UserTable => None,
        };
        if let Some(n) = expected {
            if spec.params.len() != n {
                return Err(Error::InvalidParameter(format!("{:?} profile takes {n} params, got {}", spec.kind, spec.params.len())));
            }
        }
        if spec.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("profile params must be finite".into()));
        }
        match spec.kind {
            ProfileKind::PowerCusp | ProfileKind::MonotoneCusp => {
                let gamma = spec.params[3];
                if !(gamma > 0.0 && gamma < 1.0) {
                    return Err(Error::InvalidParameter(format!("cusp exponent must lie in (0, 1), got {gamma}")));
                }
            }
            ProfileKind::UserTable => {
                let p = &spec.params;
                if p.len() < 4 || p.len() % 2 != 0 {
                    return Err(Error::InvalidParameter("user_table needs at least two (t, h) knots".into()));
                }
                let ts: Vec<f64> = p.iter().step_by(2).copied().collect();
                if ts.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidParameter("user_table knots must be strictly increasing".into()));
                }
                if ts[0] > lo || *ts.last().unwrap() < hi {
                    return Err(Error::InvalidParameter("user_table knots must cover the domain".into()));
                }
            }
            _ => {}
        }
        for m in &spec.marked_points {
            if !(m.t0 >= lo && m.t0 <= hi) {
                return Err(Error::InvalidParameter(format!("marked point {} outside domain", m.t0)));
            }
            if !(m.local > 0.0) || m.local > m.sub {
                return Err(Error::InvalidParameter(format!(
                    "declared exponents at {} must satisfy 0 < local <= sub, got ({}, {})",
                    m.t0, m.local, m.sub
                )));
            }
        }

        let mut profile = HurstProfile { beta: 0.0, inf_h: 0.0, sup_h: 0.0, spec };
        let (mut inf_h, mut sup_h) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut probe = |t: f64| {
            let h = profile.eval_unchecked(t);
            inf_h = inf_h.min(h);
            sup_h = sup_h.max(h);
        };
        for i in 0..VALIDATION_SAMPLES {
            probe(lo + (hi - lo) * i as f64 / (VALIDATION_SAMPLES - 1) as f64);
        }
        for t in profile.special_points() {
            probe(t);
        }
        if !(inf_h > 0.0 && sup_h < 1.0) {
            return Err(Error::InvalidParameter(format!("profile range [{inf_h}, {sup_h}] is not inside (0, 1)")));
        }
        profile.inf_h = inf_h;
        profile.sup_h = sup_h;
        profile.beta = match profile.spec.declared_beta {
            Some(b) if b > 0.0 => b,
            Some(b) => return Err(Error::InvalidParameter(format!("declared beta must be positive, got {b}"))),
            None => profile.default_beta(),
        };
        Ok(profile)
    }

    fn new(kind: ProfileKind, params: Vec<f64>, domain: [f64; 2]) -> Result<Self> {
        Self::from_spec(ProfileSpec { kind, params, domain, declared_beta: None, marked_points: Vec::new() })
    }

    pub fn constant(h: f64, domain: [f64; 2]) -> Result<Self> {
        Self::new(ProfileKind::Constant, vec![h], domain)
    }

    pub fn affine(intercept: f64, slope: f64, domain: [f64; 2]) -> Result<Self> {
        Self::new(ProfileKind::Affine, vec![intercept, slope], domain)
    }

    pub fn power_cusp(base: f64, amplitude: f64, cusp: f64, gamma: f64, domain: [f64; 2]) -> Result<Self> {
        Self::new(ProfileKind::PowerCusp, vec![base, amplitude, cusp, gamma], domain)
    }

    pub fn monotone_cusp(base: f64, amplitude: f64, cusp: f64, gamma: f64, domain: [f64; 2]) -> Result<Self> {
        Self::new(ProfileKind::MonotoneCusp, vec![base, amplitude, cusp, gamma], domain)
    }

    pub fn smooth_periodic(mean: f64, amplitude: f64, frequency: f64, phase: f64, domain: [f64; 2]) -> Result<Self> {
        Self::new(ProfileKind::SmoothPeriodic, vec![mean, amplitude, frequency, phase], domain)
    }

    pub fn user_table(knots: &[(f64, f64)], domain: [f64; 2], marked_points: Vec<MarkedPoint>) -> Result<Self> {
        let params = knots.iter().flat_map(|(t, h)| [*t, *h]).collect();
        Self::from_spec(ProfileSpec { kind: ProfileKind::UserTable, params, domain, declared_beta: None, marked_points })
    }

    pub fn with_marked_points(self, marked_points: Vec<MarkedPoint>) -> Result<Self> {
        let mut spec = self.spec;
        spec.marked_points = marked_points;
        Self::from_spec(spec)
    }

    pub fn spec(&self) -> &ProfileSpec {
        &self.spec
    }

    pub fn kind(&self) -> ProfileKind {
        self.spec.kind
    }

    pub fn domain(&self) -> [f64; 2] {
        self.spec.domain
    }

    /// Hölder regularity `beta` of the profile (`+inf` for constants).
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Infimum of `H` over the domain (from dense sampling plus special points).
    pub fn inf(&self) -> f64 {
        self.inf_h
    }

    pub fn sup(&self) -> f64 {
        self.sup_h
    }

    /// The `(H_beta)` condition: `H(t) < beta` on the whole domain.
    pub fn satisfies_h_beta(&self) -> bool {
        self.sup_h < self.beta
    }

    pub fn contains(&self, t: f64) -> bool {
        let [lo, hi] = self.spec.domain;
        t >= lo && t <= hi
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !self.contains(t) {
            let [lower, upper] = self.spec.domain;
            return Err(Error::OutsideDomain { t, lower, upper });
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        let p = &self.spec.params;
        match self.spec.kind {
            ProfileKind::Constant => p[0],
            ProfileKind::Affine => p[0] + p[1] * t,
            ProfileKind::PowerCusp => p[0] + p[1] * (t - p[2]).abs().powf(p[3]),
            ProfileKind::MonotoneCusp => {
                let x = t - p[2];
                p[0] + p[1] * x.signum() * x.abs().powf(p[3])
            }
            ProfileKind::SmoothPeriodic => p[0] + p[1] * (std::f64::consts::TAU * p[2] * t + p[3]).sin(),
            ProfileKind::UserTable => {
                let n = p.len() / 2;
                let knot = |i: usize| (p[2 * i], p[2 * i + 1]);
                let mut i = match (0..n).map(|i| knot(i).0).collect::<Vec<_>>().binary_search_by(|x| x.total_cmp(&t)) {
                    Ok(i) => return knot(i).1,
                    Err(i) => i,
                };
                i = i.clamp(1, n - 1);
                let ((t0, h0), (t1, h1)) = (knot(i - 1), knot(i));
                h0 + (h1 - h0) * (t - t0) / (t1 - t0)
            }
        }
    }

    fn special_points(&self) -> Vec<f64> {
        let p = &self.spec.params;
        let [lo, hi] = self.spec.domain;
        let mut pts = vec![lo, hi];
        match self.spec.kind {
            ProfileKind::PowerCusp | ProfileKind::MonotoneCusp => pts.push(p[2].clamp(lo, hi)),
            ProfileKind::UserTable => pts.extend(p.iter().step_by(2).filter(|t| **t >= lo && **t <= hi)),
            _ => {}
        }
        pts
    }

    fn default_beta(&self) -> f64 {
        let p = &self.spec.params;
        match self.spec.kind {
            ProfileKind::Constant => f64::INFINITY,
            ProfileKind::Affine if p[1] == 0.0 => f64::INFINITY,
            ProfileKind::PowerCusp | ProfileKind::MonotoneCusp if p[1] != 0.0 => p[3],
            ProfileKind::SmoothPeriodic if p[1] == 0.0 || p[2] == 0.0 => f64::INFINITY,
            _ => 1.0,
        }
    }

    /// Local exponent and sub-exponent of `H` at `t0`.
    ///
    /// Marked points take precedence; otherwise analytic values are returned
    /// for the built-in shapes and [`ProfileExponents::Unknown`] for tables.
    pub fn exponents(&self, t0: f64) -> Result<ProfileExponents> {
        if !self.contains(t0) {
            let [lower, upper] = self.spec.domain;
            return Err(Error::OutsideDomain { t: t0, lower, upper });
        }
        if let Some(m) = self.spec.marked_points.iter().find(|m| m.t0 == t0) {
            return Ok(ProfileExponents::Known { local: m.local, sub: m.sub });
        }
        let p = &self.spec.params;
        let inf = f64::INFINITY;
        let known = |local, sub| Ok(ProfileExponents::Known { local, sub });
        match self.spec.kind {
            ProfileKind::Constant => known(inf, inf),
            ProfileKind::Affine if p[1] == 0.0 => known(inf, inf),
            ProfileKind::Affine => known(1.0, 1.0),
            ProfileKind::PowerCusp | ProfileKind::MonotoneCusp if p[1] == 0.0 => known(inf, inf),
            // Symmetric pairs around the cusp share the same H value.
            ProfileKind::PowerCusp if t0 == p[2] => known(p[3], inf),
            // Strictly monotone: away from the cusp H is differentiable, so the
            // infimum of |ΔH| / |Δt|^α vanishes for every α < 1.
            ProfileKind::MonotoneCusp if t0 == p[2] => known(p[3], 1.0),
            ProfileKind::PowerCusp | ProfileKind::MonotoneCusp => known(1.0, 1.0),
            ProfileKind::SmoothPeriodic => {
                if p[1] == 0.0 || p[2] == 0.0 {
                    return known(inf, inf);
                }
                let slope = (std::f64::consts::TAU * p[2] * t0 + p[3]).cos();
                if slope.abs() < 1e-9 {
                    // Extremum: equal values on both sides at every scale.
                    known(1.0, inf)
                } else {
                    known(1.0, 1.0)
                }
            }
            ProfileKind::UserTable => Ok(ProfileExponents::Unknown),
        }
    }
}

impl TryFrom<ProfileSpec> for HurstProfile {
    type Error = Error;
    fn try_from(spec: ProfileSpec) -> Result<Self> {
        HurstProfile::from_spec(spec)
    }
}

impl From<HurstProfile> for ProfileSpec {
    fn from(p: HurstProfile) -> Self {
        p.spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force pair scan on a symmetric grid around `t0`: returns the
    /// largest |ΔH| over pairs in `B(t0, rho)` and the number of pairs whose
    /// H values agree to rounding.
    fn pair_scan(h: &HurstProfile, t0: f64, rho: f64) -> (f64, usize) {
        let k = 200;
        let grid: Vec<f64> = (-k..=k).map(|i| t0 + rho * i as f64 / k as f64).collect();
        let mut max_dh: f64 = 0.0;
        let mut equal = 0;
        for (i, s) in grid.iter().enumerate() {
            for t in &grid[i + 1..] {
                let dh = (h.eval(*t).unwrap() - h.eval(*s).unwrap()).abs();
                max_dh = max_dh.max(dh);
                if dh <= 1e-14 {
                    equal += 1;
                }
            }
        }
        (max_dh, equal)
    }

    /// Log-log slope of the pair-scan maximum between successive radii.
    fn scan_slopes(h: &HurstProfile, t0: f64) -> (Vec<f64>, Vec<usize>) {
        let radii = [1e-2, 1e-3, 1e-4, 1e-5];
        let scans: Vec<(f64, usize)> = radii.iter().map(|r| pair_scan(h, t0, *r)).collect();
        let slopes = scans
            .windows(2)
            .zip(radii.windows(2))
            .map(|(s, r)| (s[0].0 / s[1].0).ln() / (r[0] / r[1]).ln())
            .collect();
        (slopes, scans.iter().map(|s| s.1).collect())
    }

    #[test]
    fn range_is_checked() {
        assert!(HurstProfile::constant(1.0, [0.0, 1.0]).is_err());
        assert!(HurstProfile::affine(0.3, 0.8, [0.0, 1.0]).is_err());
        assert!(HurstProfile::affine(0.3, 0.4, [0.0, 1.0]).is_ok());
        assert!(HurstProfile::power_cusp(0.5, 0.1, 0.5, 1.5, [0.0, 1.0]).is_err());
    }

    #[test]
    fn evaluation_outside_domain_fails() {
        let h = HurstProfile::affine(0.3, 0.4, [0.0, 1.0]).unwrap();
        assert!((h.eval(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(h.eval(1.5), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn declared_exponents() {
        let c = HurstProfile::constant(0.4, [0.0, 1.0]).unwrap();
        assert_eq!(c.exponents(0.3).unwrap(), ProfileExponents::Known { local: f64::INFINITY, sub: f64::INFINITY });
        let a = HurstProfile::affine(0.3, 0.4, [0.0, 1.0]).unwrap();
        assert_eq!(a.exponents(0.5).unwrap(), ProfileExponents::Known { local: 1.0, sub: 1.0 });
        let cusp = HurstProfile::power_cusp(0.6, 0.2, 0.5, 0.5, [0.0, 1.0]).unwrap();
        assert_eq!(cusp.exponents(0.5).unwrap(), ProfileExponents::Known { local: 0.5, sub: f64::INFINITY });
        let table = HurstProfile::user_table(&[(0.0, 0.3), (1.0, 0.6)], [0.0, 1.0], vec![]).unwrap();
        assert_eq!(table.exponents(0.5).unwrap(), ProfileExponents::Unknown);
        let marked = table
            .with_marked_points(vec![MarkedPoint { t0: 0.5, local: 1.0, sub: 1.0 }])
            .unwrap();
        assert_eq!(marked.exponents(0.5).unwrap(), ProfileExponents::Known { local: 1.0, sub: 1.0 });
    }

    #[test]
    fn unordered_declarations_rejected() {
        let t = HurstProfile::constant(0.4, [0.0, 1.0]).unwrap();
        assert!(t.with_marked_points(vec![MarkedPoint { t0: 0.5, local: 0.8, sub: 0.3 }]).is_err());
    }

    #[test]
    fn affine_scan_gives_one() {
        let a = HurstProfile::affine(0.3, 0.4, [0.0, 1.0]).unwrap();
        let (slopes, equal) = scan_slopes(&a, 0.5);
        assert!(slopes.iter().all(|s| (s - 1.0).abs() < 1e-6), "{slopes:?}");
        assert!(equal.iter().all(|e| *e == 0));
    }

    #[test]
    fn cusp_scan_gives_gamma_and_equal_pairs() {
        let cusp = HurstProfile::power_cusp(0.6, 0.2, 0.5, 0.5, [0.0, 1.0]).unwrap();
        let (slopes, equal) = scan_slopes(&cusp, 0.5);
        assert!(slopes.iter().all(|s| (s - 0.5).abs() < 1e-3), "{slopes:?}");
        assert!(equal.iter().all(|e| *e > 0));
    }

    #[test]
    fn periodic_extremum() {
        // sin peaks at 2π f t + φ = π/2, i.e. t = 0.25 for f = 1, φ = 0
        let p = HurstProfile::smooth_periodic(0.5, 0.1, 1.0, 0.0, [0.0, 1.0]).unwrap();
        assert_eq!(p.exponents(0.25).unwrap(), ProfileExponents::Known { local: 1.0, sub: f64::INFINITY });
        assert_eq!(p.exponents(0.1).unwrap(), ProfileExponents::Known { local: 1.0, sub: 1.0 });
        assert!(p.satisfies_h_beta());
    }

    #[test]
    fn json_round_trip_keeps_infinities() {
        let p = HurstProfile::constant(0.4, [0.0, 2.0])
            .unwrap()
            .with_marked_points(vec![MarkedPoint { t0: 1.0, local: 0.5, sub: f64::INFINITY }])
            .unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains("\"inf\""));
        let back: HurstProfile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }
}
