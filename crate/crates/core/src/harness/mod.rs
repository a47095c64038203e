//! Experiments: sample paths, estimate exponents and dimensions, and check
//! the measured dimensions against the bounds predicted from the exponents.

mod config;
mod report;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

pub use config::{
    preset, AppliedTolerances, DimensionConfig, ExperimentConfig, Format, FrostmanConfig, Outputs, SamplerConfig,
    SandwichConfig, Tolerances, PRESET_NAMES, SCHEMA_VERSION,
};
pub use report::{emit_report, write_csv, write_plotdata};

use crate::error::{Error, Result};
use crate::exponents::{kernel_exponents_with, sandwich_check_with, ExponentEstimate, ExponentOptions, SandwichReport};
use crate::fractal::{
    beta_grid, default_path_scales, frostman_probe, graph_cloud, localized_dimension, path_dimension, range_cloud,
    DimensionEstimate, EnergyReport, Target,
};
use crate::geometry::Point;
use crate::kernels::{IncrementKernel, KernelSpec, ProfileExponents};
use crate::rng::derive_seed;
use crate::sampler::{sample_gw, sample_mbm_spectral, ExactSampler, SamplePath, SpectralOptions};
use crate::stats::median;

/// `[lo, hi]` intervals for the graph and range dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub graph: [f64; 2],
    pub range: [f64; 2],
}

/// Dimension bounds for an `N`-parameter field in `R^d` with exponents
/// `α̃ ≤ α̲`:
///
/// * graph: `[N/α̲ or N + d(1 - α̲), min{N/α̃, N + d(1 - α̃)}]`
/// * range: `[N/α̲ or d, min{N/α̃, d}]`
///
/// the lower branch switching at `N = d α̲`. An infinite `α̲` gives lower
/// bounds of 0.
///
/// ```
/// use gfield::harness::predicted_bounds;
///
/// let b = predicted_bounds(0.5, 0.5, 1, 1).unwrap();
/// assert_eq!(b.graph, [1.5, 1.5]);
/// assert_eq!(b.range, [1.0, 1.0]);
/// ```
pub fn predicted_bounds(alpha_tilde: f64, alpha_under: f64, n: usize, d: usize) -> Result<Bounds> {
    if !(alpha_tilde > 0.0 && alpha_tilde.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha_tilde must be positive and finite, got {alpha_tilde}")));
    }
    if !(alpha_tilde <= alpha_under) {
        return Err(Error::InvalidParameter(format!(
            "exponents out of order: alpha_tilde {alpha_tilde} > alpha_under {alpha_under}"
        )));
    }
    if n < 1 || d < 1 {
        return Err(Error::InvalidParameter("N and d must be >= 1".into()));
    }
    let (nf, df) = (n as f64, d as f64);
    let graph_hi = (nf / alpha_tilde).min(nf + df * (1.0 - alpha_tilde));
    let range_hi = (nf / alpha_tilde).min(df);
    let (graph_lo, range_lo) = if nf <= df * alpha_under {
        (nf / alpha_under, nf / alpha_under)
    } else {
        (nf + df * (1.0 - alpha_under), df)
    };
    Ok(Bounds { graph: [graph_lo, graph_hi], range: [range_lo, range_hi] })
}

/// Exponents known in closed form for the built-in families at `t0`, or
/// `None` where no value is available.
pub fn reference_exponents(kernel: &IncrementKernel, t0: &Point) -> Result<Option<(f64, f64)>> {
    Ok(match kernel.spec() {
        KernelSpec::Fbm { hurst } => Some((*hurst, *hurst)),
        // Away from the axes; the corner measure degenerates on them.
        KernelSpec::Mpfbm { hurst, .. } => t0.coords().iter().all(|&c| c > 0.0).then_some((*hurst, *hurst)),
        KernelSpec::Gw { profile, .. } => {
            let h = profile.eval(t0.first())?;
            profile.satisfies_h_beta().then_some((h, h))
        }
        KernelSpec::MbmAsymptotic { profile, .. } => {
            let h = profile.eval(t0.first())?;
            match profile.exponents(t0.first())? {
                ProfileExponents::Known { local, sub } => Some((h.min(local), h.min(sub))),
                ProfileExponents::Unknown => None,
            }
        }
    })
}

/// One verdict: `pass` iff `lo - tol ≤ value ≤ hi + tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "crate::serde_ext::extended_real")]
    pub value: f64,
    #[serde(with = "crate::serde_ext::extended_real")]
    pub lo: f64,
    #[serde(with = "crate::serde_ext::extended_real")]
    pub hi: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, lo: f64, hi: f64, tol: f64) -> Check {
        Check { name: name.into(), value, lo, hi, tol, pass: Check::verdict(value, lo, hi, tol) }
    }

    pub fn verdict(value: f64, lo: f64, hi: f64, tol: f64) -> bool {
        lo - tol <= value && value <= hi + tol
    }
}

/// A measured dimension and the estimates behind it: one global estimate, or
/// one per ball radius (coarse to fine) with the finest one as the value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionRecord {
    pub value: f64,
    pub estimates: Vec<RadiusEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    pub estimate: DimensionEstimate,
}

impl DimensionRecord {
    fn global(estimate: DimensionEstimate) -> Self {
        DimensionRecord { value: estimate.slope, estimates: vec![RadiusEstimate { radius: None, estimate }] }
    }

    fn localized(trend: Vec<(f64, DimensionEstimate)>) -> Self {
        let value = trend.last().map(|(_, e)| e.slope).unwrap_or(f64::NAN);
        let estimates = trend.into_iter().map(|(r, estimate)| RadiusEstimate { radius: Some(r), estimate }).collect();
        DimensionRecord { value, estimates }
    }
}

/// Results for one `(t0, seed)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub t0_index: usize,
    pub t0: Point,
    pub seed: u64,
    pub exponents: ExponentEstimate,
    pub bounds: Bounds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_exponents: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_bounds: Option<Bounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<DimensionRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<DimensionRecord>,
    pub checks: Vec<Check>,
}

/// Medians over seeds for one `t0`, with checks on the medians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub t0_index: usize,
    pub t0: Point,
    pub alpha_tilde: f64,
    #[serde(with = "crate::serde_ext::extended_real")]
    pub alpha_under: f64,
    pub bounds: Bounds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<f64>,
    /// `(radius, median graph dimension)` per ball radius when localized.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub graph_trend: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub range_trend: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sandwich: Option<SandwichReport>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub schema: u32,
    pub name: String,
    pub config: ExperimentConfig,
    /// Parameter dimension `N` and value dimension `d`.
    pub n: usize,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<String>,
    pub tolerances: AppliedTolerances,
    pub entries: Vec<Entry>,
    pub aggregates: Vec<Aggregate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frostman: Option<EnergyReport>,
    /// Every aggregate check passed.
    pub passed: bool,
}

impl TheoremReport {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("report: {e}")))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Every stored verdict agrees with its stored numbers.
    pub fn verdicts_consistent(&self) -> bool {
        let all = self.entries.iter().flat_map(|e| &e.checks).chain(self.aggregates.iter().flat_map(|a| &a.checks));
        let mut ok = true;
        for c in all {
            ok &= c.pass == Check::verdict(c.value, c.lo, c.hi, c.tol);
        }
        ok && self.passed == self.aggregates.iter().flat_map(|a| &a.checks).all(|c| c.pass)
    }

    pub fn failed_checks(&self) -> Vec<(usize, &Check)> {
        self.aggregates.iter().flat_map(|a| a.checks.iter().filter(|c| !c.pass).map(move |c| (a.t0_index, c))).collect()
    }
}

enum Source {
    Exact(ExactSampler),
    Gw { kernel: IncrementKernel },
    Spectral { kernel: IncrementKernel, options: SpectralOptions },
}

impl Source {
    fn new(config: &ExperimentConfig, kernel: &IncrementKernel) -> Result<Source> {
        let spectral = |options| match kernel.spec() {
            KernelSpec::MbmAsymptotic { .. } => Ok(Source::Spectral { kernel: kernel.clone(), options }),
            _ => Err(Error::Config("the spectral sampler only draws mBm processes".into())),
        };
        match config.sampler {
            SamplerConfig::Exact => Ok(Source::Exact(ExactSampler::new(kernel, &config.grid)?)),
            SamplerConfig::Series => match kernel.spec() {
                KernelSpec::Gw { .. } => Ok(Source::Gw { kernel: kernel.clone() }),
                _ => Err(Error::Config("the series sampler only draws GW processes".into())),
            },
            SamplerConfig::Spectral { freq_cutoff, freq_bins } => spectral(SpectralOptions { freq_cutoff, freq_bins }),
            SamplerConfig::Auto => match kernel.spec() {
                KernelSpec::Gw { .. } => Ok(Source::Gw { kernel: kernel.clone() }),
                KernelSpec::MbmAsymptotic { .. } => spectral(SpectralOptions::default()),
                _ => Ok(Source::Exact(ExactSampler::new(kernel, &config.grid)?)),
            },
        }
    }

    fn name(&self) -> String {
        match self {
            Source::Exact(s) => s.method_name().into(),
            Source::Gw { .. } => "weierstrass_series".into(),
            Source::Spectral { .. } => "harmonizable_spectral".into(),
        }
    }

    fn sample(&self, config: &ExperimentConfig, seed: u64) -> Result<SamplePath> {
        match self {
            Source::Exact(s) => s.sample(config.d, seed),
            Source::Gw { kernel } => {
                let (profile, lambda) = match kernel.spec() {
                    KernelSpec::Gw { profile, lambda, .. } => (profile, *lambda),
                    _ => unreachable!("checked in Source::new"),
                };
                sample_gw(profile, lambda, kernel.truncation(), &config.grid, config.d, seed)
            }
            Source::Spectral { kernel, options } => {
                let profile = kernel.profile().expect("mBm kernels carry a profile");
                sample_mbm_spectral(profile, &config.grid, config.d, seed, *options)
            }
        }
    }
}

/// Map `f` over `items` on all available cores; output order follows input.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(items.len()).max(1);
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                out.lock().expect("worker panicked")[i] = Some(r);
            });
        }
    });
    out.into_inner().expect("worker panicked").into_iter().map(|r| r.expect("every item mapped")).collect()
}

/// Per-seed dimension records, indexed by `t0` (global records are shared).
struct SeedDims {
    graph: Vec<DimensionRecord>,
    range: Vec<DimensionRecord>,
}

fn measure(config: &ExperimentConfig, path: &SamplePath) -> Result<SeedDims> {
    let dc = config.dimension.as_ref().expect("caller checks");
    let scales = dc.scale_ladder.as_deref();
    let one = |target: Target| -> Result<Vec<DimensionRecord>> {
        match &dc.localize {
            None => {
                let own;
                let sc = match scales {
                    Some(s) => s,
                    None => {
                        own = default_path_scales(path, target)?;
                        &own
                    }
                };
                let rec = DimensionRecord::global(path_dimension(path, target, sc, dc.window)?);
                Ok(vec![rec; config.t0_list.len()])
            }
            Some(radii) => config
                .t0_list
                .iter()
                .map(|t0| Ok(DimensionRecord::localized(localized_dimension(path, t0, radii, target, scales, dc.window)?)))
                .collect(),
        }
    };
    Ok(SeedDims { graph: one(Target::Graph)?, range: one(Target::Range)? })
}

fn all_checks(
    alpha: (f64, f64),
    bounds: &Bounds,
    reference: Option<(f64, f64)>,
    reference_bounds: Option<&Bounds>,
    graph: Option<f64>,
    range: Option<f64>,
    tol: &AppliedTolerances,
) -> Vec<Check> {
    let (at, au) = alpha;
    let mut checks = vec![Check::new("exponent_order", at - au, f64::NEG_INFINITY, 0.0, tol.ordering)];
    if let Some(g) = graph {
        checks.push(Check::new("graph_sandwich", g, bounds.graph[0], bounds.graph[1], tol.graph));
    }
    if let Some(r) = range {
        checks.push(Check::new("range_sandwich", r, bounds.range[0], bounds.range[1], tol.range));
    }
    if let Some((rt, ru)) = reference {
        checks.push(Check::new("alpha_tilde_reference", at, rt, rt, tol.exponent));
        checks.push(Check::new("alpha_under_reference", au, ru, ru, tol.exponent));
    }
    if let Some(rb) = reference_bounds {
        if let Some(g) = graph {
            checks.push(Check::new("graph_reference", g, rb.graph[0], rb.graph[1], tol.graph));
        }
        if let Some(r) = range {
            checks.push(Check::new("range_reference", r, rb.range[0], rb.range[1], tol.range));
        }
    }
    checks
}

/// One path per configured seed, drawn with the configured sampler.
pub fn simulate(config: &ExperimentConfig) -> Result<Vec<SamplePath>> {
    config.validate()?;
    let source = Source::new(config, &config.kernel()?)?;
    par_map(&config.seeds, |&seed| source.sample(config, seed)).into_iter().collect()
}

/// Run a validated configuration. Every random draw is seeded from the
/// configured seeds, so reruns reproduce the report bit for bit.
pub fn run_experiment(config: &ExperimentConfig) -> Result<TheoremReport> {
    config.validate()?;
    let kernel = config.kernel()?;
    let (n, d) = (kernel.dim(), config.d);
    let tol = config.tolerances.resolve(n);
    let reference: Vec<Option<(f64, f64)>> =
        config.t0_list.iter().map(|t0| reference_exponents(&kernel, t0)).collect::<Result<_>>()?;
    let reference_bounds: Vec<Option<Bounds>> = reference
        .iter()
        .map(|r| r.map(|(a, b)| predicted_bounds(a, b, n, d)).transpose())
        .collect::<Result<_>>()?;

    // Paths and dimensions, one job per seed.
    let source = match config.dimension {
        Some(_) => Some(Source::new(config, &kernel)?),
        None => None,
    };
    let mut first_path = None;
    let dims: Vec<Option<SeedDims>> = match &source {
        None => config.seeds.iter().map(|_| None).collect(),
        Some(src) => {
            let results = par_map(&config.seeds, |&seed| -> Result<(SeedDims, Option<SamplePath>)> {
                let path = src.sample(config, seed)?;
                let dims = measure(config, &path)?;
                let keep = (seed == config.seeds[0] && config.frostman.is_some()).then_some(path);
                Ok((dims, keep))
            });
            let mut out = Vec::with_capacity(results.len());
            for r in results {
                let (dims, keep) = r?;
                if first_path.is_none() {
                    first_path = keep;
                }
                out.push(Some(dims));
            }
            out
        }
    };

    // Exponents, one job per (t0, seed).
    let jobs: Vec<(usize, usize)> =
        (0..config.t0_list.len()).flat_map(|i| (0..config.seeds.len()).map(move |s| (i, s))).collect();
    let exponent_options = |seed: u64, i: usize| ExponentOptions {
        pairs_per_rho: config.pairs_per_rho,
        seed: derive_seed(seed, i as u64),
        ..ExponentOptions::default()
    };
    let estimates = par_map(&jobs, |&(i, s)| {
        kernel_exponents_with(&kernel, &config.t0_list[i], &config.rho_ladder, &exponent_options(config.seeds[s], i))
    });

    let mut entries = Vec::with_capacity(jobs.len());
    for (&(i, s), est) in jobs.iter().zip(estimates) {
        let est = est?;
        let (at, au) = (est.alpha_tilde_hat, est.alpha_under_hat);
        let bounds = predicted_bounds(at, au, n, d)?;
        let (graph, range) = match &dims[s] {
            Some(sd) => (Some(sd.graph[i].clone()), Some(sd.range[i].clone())),
            None => (None, None),
        };
        let checks = all_checks(
            (at, au),
            &bounds,
            reference[i],
            reference_bounds[i].as_ref(),
            graph.as_ref().map(|g| g.value),
            range.as_ref().map(|r| r.value),
            &tol,
        );
        entries.push(Entry {
            t0_index: i,
            t0: config.t0_list[i].clone(),
            seed: config.seeds[s],
            exponents: est,
            bounds,
            reference_exponents: reference[i].map(|(a, b)| [a, b]),
            reference_bounds: reference_bounds[i],
            graph,
            range,
            checks,
        });
    }

    let sandwiches: Vec<Option<SandwichReport>> = match &config.sandwich {
        None => config.t0_list.iter().map(|_| None).collect(),
        Some(sw) => {
            let ladder = sw.rho_ladder.as_deref().unwrap_or(&config.rho_ladder);
            let idx: Vec<usize> = (0..config.t0_list.len()).collect();
            par_map(&idx, |&i| {
                sandwich_check_with(&kernel, &config.t0_list[i], sw.epsilon, ladder, &exponent_options(config.seeds[0], i))
            })
            .into_iter()
            .map(|r| r.map(Some))
            .collect::<Result<_>>()?
        }
    };

    let mut aggregates = Vec::with_capacity(config.t0_list.len());
    for (i, (t0, sandwich)) in config.t0_list.iter().zip(sandwiches).enumerate() {
        let mine: Vec<&Entry> = entries.iter().filter(|e| e.t0_index == i).collect();
        let med = |f: &dyn Fn(&Entry) -> f64| median(&mine.iter().map(|e| f(e)).collect::<Vec<_>>());
        let at = med(&|e| e.exponents.alpha_tilde_hat);
        let au = med(&|e| e.exponents.alpha_under_hat);
        let bounds = predicted_bounds(at, au, n, d)?;
        let graph = mine[0].graph.as_ref().map(|_| med(&|e| e.graph.as_ref().map_or(f64::NAN, |g| g.value)));
        let range = mine[0].range.as_ref().map(|_| med(&|e| e.range.as_ref().map_or(f64::NAN, |g| g.value)));
        let trend = |pick: &dyn Fn(&Entry) -> Option<&DimensionRecord>| -> Vec<[f64; 2]> {
            let Some(first) = pick(mine[0]) else { return Vec::new() };
            first
                .estimates
                .iter()
                .enumerate()
                .filter_map(|(k, re)| {
                    let r = re.radius?;
                    let vals: Vec<f64> = mine.iter().filter_map(|e| pick(e).map(|g| g.estimates[k].estimate.slope)).collect();
                    Some([r, median(&vals)])
                })
                .collect()
        };
        let graph_trend = trend(&|e| e.graph.as_ref());
        let range_trend = trend(&|e| e.range.as_ref());
        let mut checks = all_checks((at, au), &bounds, reference[i], reference_bounds[i].as_ref(), graph, range, &tol);
        if let Some(sw) = &sandwich {
            checks.push(Check::new("sandwich_rho0_found", sw.rho0_found.unwrap_or(0.0), f64::MIN_POSITIVE, f64::INFINITY, 0.0));
        }
        aggregates.push(Aggregate {
            t0_index: i,
            t0: t0.clone(),
            alpha_tilde: at,
            alpha_under: au,
            bounds,
            graph,
            range,
            graph_trend,
            range_trend,
            sandwich,
            checks,
        });
    }

    let frostman = match (&config.frostman, &first_path) {
        (Some(fc), Some(path)) => {
            let clouds = fc
                .refinements
                .iter()
                .map(|&step| {
                    let sub = path.subsample(step)?;
                    match fc.target {
                        Target::Graph => graph_cloud(&sub),
                        Target::Range => range_cloud(&sub),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let ambient = clouds[0].dim as f64;
            let betas = beta_grid(fc.beta_step, fc.beta_max.unwrap_or(ambient));
            Some(frostman_probe(&clouds, &betas)?)
        }
        _ => None,
    };

    let passed = aggregates.iter().flat_map(|a| &a.checks).all(|c| c.pass);
    Ok(TheoremReport {
        schema: SCHEMA_VERSION,
        name: config.name.clone(),
        config: config.clone(),
        n,
        d,
        sampler: source.as_ref().map(Source::name),
        tolerances: tol,
        entries,
        aggregates,
        frostman,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: [f64; 2], b: [f64; 2]) -> bool {
        (a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12
    }

    #[test]
    fn bounds_examples() {
        let b = predicted_bounds(0.5, 0.5, 1, 1).unwrap();
        assert!(close(b.graph, [1.5, 1.5]) && close(b.range, [1.0, 1.0]));
        let b = predicted_bounds(0.4, 0.4, 2, 1).unwrap();
        assert!(close(b.graph, [2.6, 2.6]));
        let b = predicted_bounds(0.5, 0.5, 1, 3).unwrap();
        assert!(close(b.graph, [2.0, 2.0]) && close(b.range, [2.0, 2.0]));
        let b = predicted_bounds(0.3, 0.6, 1, 1).unwrap();
        assert!(close(b.graph, [1.4, 1.7]));
    }

    #[test]
    fn bounds_errors_and_infinite_sub_exponent() {
        assert!(predicted_bounds(0.0, 0.5, 1, 1).is_err());
        assert!(predicted_bounds(0.6, 0.5, 1, 1).is_err());
        assert!(predicted_bounds(f64::NAN, 0.5, 1, 1).is_err());
        let b = predicted_bounds(0.5, f64::INFINITY, 1, 1).unwrap();
        assert_eq!(b.graph[0], 0.0);
        assert_eq!(b.range[0], 0.0);
    }

    #[test]
    fn verdicts() {
        assert!(Check::new("x", 1.55, 1.5, 1.5, 0.1).pass);
        assert!(!Check::new("x", 1.65, 1.5, 1.5, 0.1).pass);
        assert!(Check::new("x", -1.0, f64::NEG_INFINITY, 0.0, 0.0).pass);
        assert!(!Check::new("x", f64::NAN, 0.0, 1.0, 0.0).pass);
    }

    #[test]
    fn reference_values() {
        let t = Point::scalar(0.5).unwrap();
        assert_eq!(reference_exponents(&IncrementKernel::fbm(0.3).unwrap(), &t).unwrap(), Some((0.3, 0.3)));
        let k = IncrementKernel::mpfbm(0.4, 2).unwrap();
        assert_eq!(reference_exponents(&k, &Point::new(vec![1.0, 1.0]).unwrap()).unwrap(), Some((0.4, 0.4)));
        assert_eq!(reference_exponents(&k, &Point::new(vec![0.0, 1.0]).unwrap()).unwrap(), None);
        let p = crate::kernels::HurstProfile::power_cusp(0.7, 0.25, 0.5, 0.3, [0.0, 1.0]).unwrap();
        let k = IncrementKernel::mbm_asymptotic(p, 1.0, 1.0).unwrap();
        assert_eq!(reference_exponents(&k, &t).unwrap(), Some((0.3, 0.7)));
    }

    #[test]
    fn small_run_is_reproducible_and_sound() {
        let mut c = preset("fbm-h05").unwrap();
        c.grid = crate::sampler::GridSpec::interval(0.0, 1.0, 2049).unwrap();
        c.seeds = vec![1, 2];
        c.pairs_per_rho = 500;
        c.frostman = None;
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert!(a.verdicts_consistent());
        assert_eq!(a.entries.len(), 2);
        assert_eq!(a.sampler.as_deref(), Some("durbin_levinson"));
        let back = TheoremReport::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(back.to_json().unwrap(), a.to_json().unwrap());
    }

    #[test]
    fn par_map_keeps_order() {
        let v: Vec<u64> = (0..50).collect();
        assert_eq!(par_map(&v, |x| x * 2), v.iter().map(|x| x * 2).collect::<Vec<_>>());
    }
}
