//! Experiment configuration (`"schema": 1`) and built-in presets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{default_rho_ladder, geometric_ladder};
use crate::fractal::{Target, WindowPolicy};
use crate::geometry::{Point, Rect};
use crate::kernels::{HurstProfile, IncrementKernel, KernelSpec};
use crate::sampler::GridSpec;

pub const SCHEMA_VERSION: u32 = 1;

/// Output formats shared by the emitters and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Plotdata,
}

/// How paths are drawn. `auto` picks the exact Gaussian sampler for fBm and
/// MpfBm, the series for GW and the harmonizable spectral sum for mBm.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum SamplerConfig {
    #[default]
    Auto,
    Exact,
    Series,
    Spectral {
        #[serde(default)]
        freq_cutoff: Option<f64>,
        #[serde(default = "default_freq_bins")]
        freq_bins: usize,
    },
}

fn default_freq_bins() -> usize {
    2048
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionConfig {
    /// Ball radii around each `t0`, coarse to fine. Absent: whole-path dimensions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub localize: Option<Vec<f64>>,
    /// Box sizes; absent: each path (or ball) gets its default ladder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_ladder: Option<Vec<f64>>,
    #[serde(default)]
    pub window: WindowPolicy,
}

/// Absolute tolerances. Unset values default to 0.10 for graph dimensions
/// of one-parameter processes (0.30 otherwise), 0.05 for range dimensions
/// and 0.05 for exponents.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
}

/// Tolerances as applied, recorded in every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppliedTolerances {
    pub graph: f64,
    pub range: f64,
    pub exponent: f64,
    pub ordering: f64,
}

impl Tolerances {
    pub fn resolve(&self, n: usize) -> AppliedTolerances {
        AppliedTolerances {
            graph: self.graph.unwrap_or(if n == 1 { 0.10 } else { 0.30 }),
            range: self.range.unwrap_or(0.05),
            exponent: self.exponent.unwrap_or(0.05),
            ordering: crate::exponents::ORDERING_SLACK,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandwichConfig {
    pub epsilon: f64,
    /// Defaults to the exponent ladder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_ladder: Option<Vec<f64>>,
}

/// Energy probe on the graph of the first seed's path and its subsamples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrostmanConfig {
    #[serde(default = "default_beta_step")]
    pub beta_step: f64,
    /// Defaults to the ambient dimension of the cloud.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_max: Option<f64>,
    /// Subsampling steps, coarse to fine; `1` is the full path.
    #[serde(default = "default_refinements")]
    pub refinements: Vec<usize>,
    #[serde(default = "default_frostman_target")]
    pub target: Target,
}

fn default_beta_step() -> f64 {
    0.05
}

fn default_refinements() -> Vec<usize> {
    vec![4, 2, 1]
}

fn default_frostman_target() -> Target {
    Target::Graph
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default)]
    pub formats: Vec<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    #[serde(default)]
    pub name: String,
    pub process: KernelSpec,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default = "default_d")]
    pub d: usize,
    pub grid: GridSpec,
    pub t0_list: Vec<Point>,
    /// Radii for the exponent estimates.
    #[serde(default = "default_rho_ladder")]
    pub rho_ladder: Vec<f64>,
    #[serde(default = "default_pairs")]
    pub pairs_per_rho: usize,
    /// Absent: exponents only, no paths are drawn.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<DimensionConfig>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sandwich: Option<SandwichConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frostman: Option<FrostmanConfig>,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_d() -> usize {
    1
}

fn default_pairs() -> usize {
    10_000
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

fn check_ladder(name: &str, ladder: &[f64]) -> Result<()> {
    if ladder.is_empty() {
        return Err(config_err(format!("{name} is empty")));
    }
    if ladder.iter().any(|r| !(*r > 0.0 && r.is_finite())) || ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(config_err(format!("{name} must be positive and strictly decreasing")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text).map_err(config_err)?;
        c.validate()?;
        Ok(c)
    }

    /// Read and validate a config file; unreadable files are configuration errors.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        ExperimentConfig::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Build the kernel, reporting every failure as a configuration error.
    pub fn kernel(&self) -> Result<IncrementKernel> {
        IncrementKernel::from_spec(self.process.clone()).map_err(config_err)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(config_err(format!("unsupported schema {}; expected {SCHEMA_VERSION}", self.schema)));
        }
        if self.t0_list.is_empty() {
            return Err(config_err("t0_list is empty"));
        }
        if self.seeds.is_empty() {
            return Err(config_err("seeds is empty"));
        }
        if self.d < 1 {
            return Err(config_err("d must be >= 1"));
        }
        if self.pairs_per_rho < 1 {
            return Err(config_err("pairs_per_rho must be >= 1"));
        }
        let kernel = self.kernel()?;
        let n = self.grid.dim();
        if kernel.dim() != n {
            return Err(config_err(format!("process has {} parameters but the grid has {n}", kernel.dim())));
        }
        GridSpec::new(self.grid.domain.clone(), self.grid.resolution.clone()).map_err(config_err)?;
        for t0 in &self.t0_list {
            if t0.dim() != n {
                return Err(config_err(format!("t0 {:?} has dimension {}, grid has {n}", t0.coords(), t0.dim())));
            }
            if !self.grid.domain.contains(t0) {
                return Err(config_err(format!("t0 {:?} lies outside the grid domain", t0.coords())));
            }
        }
        if let Some(profile) = kernel.profile() {
            let [lo, hi] = [self.grid.domain.lower.first(), self.grid.domain.upper.first()];
            if !(profile.contains(lo) && profile.contains(hi)) {
                return Err(config_err("grid domain extends outside the profile domain"));
            }
        }
        check_ladder("rho_ladder", &self.rho_ladder)?;
        if let Some(dim) = &self.dimension {
            if let Some(radii) = &dim.localize {
                check_ladder("dimension.localize", radii)?;
            }
            if let Some(scales) = &dim.scale_ladder {
                check_ladder("dimension.scale_ladder", scales)?;
            }
        }
        let tol = [self.tolerances.graph, self.tolerances.range, self.tolerances.exponent];
        if tol.iter().flatten().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(config_err("tolerances must be finite and nonnegative"));
        }
        if let Some(s) = &self.sandwich {
            if !(s.epsilon > 0.0) {
                return Err(config_err("sandwich.epsilon must be positive"));
            }
            if let Some(l) = &s.rho_ladder {
                check_ladder("sandwich.rho_ladder", l)?;
            }
        }
        if let Some(f) = &self.frostman {
            if self.dimension.is_none() {
                return Err(config_err("frostman needs sampled paths; add a dimension section"));
            }
            if !(f.beta_step > 0.0) || f.beta_max.is_some_and(|m| !(m > 0.0)) {
                return Err(config_err("frostman beta grid must be positive"));
            }
            if f.refinements.len() < 2 || f.refinements.windows(2).any(|w| w[1] >= w[0]) || f.refinements.contains(&0) {
                return Err(config_err("frostman.refinements must be >= 2 decreasing positive steps"));
            }
        }
        match (self.sampler, &self.process) {
            (SamplerConfig::Exact, KernelSpec::MbmAsymptotic { .. }) => {
                Err(config_err("the asymptotic mBm kernel has no covariance; use the spectral sampler"))
            }
            (SamplerConfig::Series, p) if !matches!(p, KernelSpec::Gw { .. }) => {
                Err(config_err("the series sampler only draws GW processes"))
            }
            (SamplerConfig::Spectral { .. }, p) if !matches!(p, KernelSpec::MbmAsymptotic { .. }) => {
                Err(config_err("the spectral sampler only draws mBm processes"))
            }
            _ => Ok(()),
        }
    }
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: &[&str] = &[
    "fbm-h02",
    "fbm-h05",
    "fbm-h08",
    "mpfbm-h025",
    "mpfbm-h04",
    "mpfbm-h05",
    "gw-affine",
    "gw-const",
    "mbm-smooth",
    "mbm-cusp",
    "mbm-constructed",
];

fn unit_grid(points: usize) -> GridSpec {
    GridSpec::interval(0.0, 1.0, points).expect("static grid")
}

fn square_grid(side: usize) -> GridSpec {
    let p = |v: f64| Point::new(vec![v, v]).expect("static point");
    GridSpec::new(Rect::new(p(1.0), p(2.0)).expect("static rect"), vec![side, side]).expect("static grid")
}

fn scalar(t: f64) -> Point {
    Point::scalar(t).expect("static point")
}

fn base(name: &str, process: KernelSpec, grid: GridSpec, t0_list: Vec<Point>, seeds: u64) -> ExperimentConfig {
    ExperimentConfig {
        schema: SCHEMA_VERSION,
        name: name.into(),
        process,
        sampler: SamplerConfig::Auto,
        d: 1,
        grid,
        t0_list,
        rho_ladder: default_rho_ladder(),
        pairs_per_rho: default_pairs(),
        dimension: Some(DimensionConfig { localize: None, scale_ladder: None, window: WindowPolicy::default() }),
        seeds: (0..seeds).collect(),
        tolerances: Tolerances::default(),
        sandwich: None,
        frostman: None,
        outputs: Outputs::default(),
    }
}

fn profile(p: Result<HurstProfile>) -> HurstProfile {
    p.expect("static profile")
}

/// A built-in configuration by name.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let sandwich = |epsilon| Some(SandwichConfig { epsilon, rho_ladder: None });
    let fbm = |h: f64| KernelSpec::Fbm { hurst: h };
    let mpfbm = |h: f64| KernelSpec::Mpfbm { hurst: h, dim: 2 };
    let localized = |radii: Vec<f64>| Some(DimensionConfig { localize: Some(radii), scale_ladder: None, window: WindowPolicy::default() });
    let c = match name {
        "fbm-h02" | "fbm-h05" | "fbm-h08" => {
            let h = match name {
                "fbm-h02" => 0.2,
                "fbm-h05" => 0.5,
                _ => 0.8,
            };
            let mut c = base(name, fbm(h), unit_grid((1 << 14) + 1), vec![scalar(0.5)], 8);
            c.sandwich = sandwich(0.1);
            if h == 0.2 {
                c.dimension = None;
            }
            if h == 0.5 {
                c.frostman = Some(FrostmanConfig {
                    beta_step: default_beta_step(),
                    beta_max: None,
                    refinements: default_refinements(),
                    target: Target::Graph,
                });
            }
            c
        }
        "mpfbm-h025" | "mpfbm-h05" => {
            let h = if name == "mpfbm-h025" { 0.25 } else { 0.5 };
            let mut c = base(name, mpfbm(h), square_grid(64), vec![Point::new(vec![1.0, 1.0])?], 1);
            c.rho_ladder = vec![1e-3];
            c.dimension = None;
            c.sandwich = Some(SandwichConfig { epsilon: 0.1, rho_ladder: Some(default_rho_ladder()) });
            c.tolerances.exponent = Some(0.02);
            c
        }
        "mpfbm-h04" => {
            let mut c = base(name, mpfbm(0.4), square_grid(64), vec![Point::new(vec![1.5, 1.5])?], 4);
            c.sandwich = sandwich(0.1);
            c
        }
        "gw-affine" => {
            let process = KernelSpec::Gw { profile: profile(HurstProfile::affine(0.3, 0.4, [0.0, 1.0])), lambda: 2.0, truncation: None };
            let mut c = base(name, process, unit_grid((1 << 15) + 1), vec![scalar(0.25), scalar(0.5), scalar(0.75)], 8);
            c.dimension = localized(vec![0.2, 0.1, 0.05]);
            c.tolerances.exponent = Some(0.03);
            c
        }
        "gw-const" => {
            let process = KernelSpec::Gw { profile: profile(HurstProfile::constant(0.5, [0.0, 1.0])), lambda: 2.0, truncation: None };
            let mut c = base(name, process, unit_grid((1 << 15) + 1), vec![scalar(0.5)], 8);
            c.sandwich = Some(SandwichConfig { epsilon: 0.1, rho_ladder: Some(geometric_ladder(3, 24)) });
            c
        }
        "mbm-smooth" | "mbm-cusp" | "mbm-constructed" => {
            let (p, t0, ladder) = match name {
                "mbm-smooth" => (HurstProfile::smooth_periodic(0.5, 0.2, 1.0, 0.3, [0.0, 1.0]), 0.4, default_rho_ladder()),
                "mbm-cusp" => (HurstProfile::power_cusp(0.7, 0.25, 0.5, 0.3, [0.0, 1.0]), 0.5, geometric_ladder(3, 16)),
                _ => (HurstProfile::monotone_cusp(0.6, 0.25, 0.5, 0.3, [0.0, 1.0]), 0.5, geometric_ladder(3, 16)),
            };
            let process = KernelSpec::MbmAsymptotic { profile: profile(p), k: 1.0, l: 1.0 };
            let mut c = base(name, process, unit_grid((1 << 14) + 1), vec![scalar(t0)], 4);
            c.rho_ladder = ladder;
            c.dimension = localized(vec![0.2, 0.1]);
            c
        }
        other => {
            return Err(config_err(format!("unknown preset {other:?}; available: {}", PRESET_NAMES.join(", "))));
        }
    };
    c.validate()?;
    Ok(c)
}
