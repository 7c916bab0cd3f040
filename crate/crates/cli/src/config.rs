use std::path::PathBuf;

use dglab::counterexamples::FamilyKind;
use dglab::Family;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// `{"family": "quartic4d", "alpha": 0.333}`; meyers2d takes `mu` instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: FamilyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Passive coordinates for the cylindrical meyers2d extension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra_dims: Option<usize>,
}

impl FamilySpec {
    pub fn build(&self) -> Result<Family> {
        let name = self.family.parameter_name();
        let (value, other) = match self.family {
            FamilyKind::Meyers2d => (self.mu, self.alpha),
            _ => (self.alpha, self.mu),
        };
        if other.is_some() {
            return Err(CliError::Config(format!("{} is parametrized by `{name}` only", self.family)));
        }
        let value = value.ok_or_else(|| CliError::Config(format!("{} needs `{name}`", self.family)))?;
        Ok(match self.extra_dims {
            Some(k) if self.family == FamilyKind::Meyers2d => Family::meyers_cylindrical(value, k)?,
            Some(_) => return Err(CliError::Config("extra_dims applies to meyers2d only".into())),
            None => Family::new(self.family, value)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Config {
    Capacity(CapacityConfig),
    Counterexample(CounterexampleConfig),
    Solve(SolveConfig),
    Dgcheck(DgcheckConfig),
    Growth(GrowthConfig),
    Report(ReportConfig),
}

impl Config {
    pub fn kind(&self) -> &'static str {
        match self {
            Config::Capacity(_) => "capacity",
            Config::Counterexample(_) => "counterexample",
            Config::Solve(_) => "solve",
            Config::Dgcheck(_) => "dgcheck",
            Config::Growth(_) => "growth",
            Config::Report(_) => "report",
        }
    }

    /// Parses `text`; a missing `kind` is taken from the subcommand, a
    /// conflicting one is rejected.
    pub fn parse(text: &str, subcommand: &str) -> Result<Self> {
        let mut value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
        let obj = value.as_object_mut().ok_or_else(|| CliError::Config("config must be a JSON object".into()))?;
        match obj.get("kind") {
            None => {
                obj.insert("kind".into(), subcommand.into());
            }
            Some(k) if k == subcommand => {}
            Some(k) => {
                return Err(CliError::Config(format!("config kind {k} does not match subcommand `{subcommand}`")))
            }
        }
        serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
    }
}

fn default_tolerance() -> f64 {
    dglab::capacity::DEFAULT_TOLERANCE
}

fn default_capacity_acceptance() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum InnerSet {
    /// Closed ball around the origin.
    Ball { radius: f64 },
    /// Coordinate slab of dimension `m` cut by the closed ball.
    Slab { m: usize, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondenserSpec {
    pub dim: usize,
    pub p: f64,
    pub inner: InnerSet,
    /// Open ball around the origin; the grid is `[-R, R]^N`.
    pub outer_radius: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityConfig {
    pub condensers: Vec<CondenserSpec>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Relative error allowed against a closed form, where one exists.
    #[serde(default = "default_capacity_acceptance")]
    pub acceptance: f64,
}

fn default_points() -> usize {
    100
}

fn default_step() -> f64 {
    1e-4
}

fn default_bumps() -> usize {
    10
}

fn default_bump_cells() -> usize {
    24
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleConfig {
    #[serde(flatten)]
    pub family: FamilySpec,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_step")]
    pub step: f64,
    /// Test bumps for the weak sub-solution check (quartic4d only).
    #[serde(default = "default_bumps")]
    pub bumps: usize,
    #[serde(default = "default_bump_cells")]
    pub bump_cells: usize,
}

fn default_solve_tolerance() -> f64 {
    1e-12
}

fn default_max_iterations() -> usize {
    100_000
}

fn default_contraction() -> f64 {
    1.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    #[serde(flatten)]
    pub family: FamilySpec,
    /// Box corners; default `[0.1, 1.1] x [-0.5, 0.5]^{N-1}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<f64>>,
    /// Grid spacings, coarsest first.
    pub spacings: Vec<f64>,
    #[serde(default = "default_solve_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_contraction")]
    pub min_contraction: f64,
    /// Also store each solution as `field_<i>.bin`.
    #[serde(default)]
    pub write_fields: bool,
}

fn default_dg_h() -> f64 {
    1.0 / 16.0
}

fn default_half_width() -> f64 {
    8.0
}

fn default_radii() -> Vec<f64> {
    vec![1.0, 2.0, 4.0]
}

fn default_half() -> f64 {
    0.5
}

fn default_one() -> f64 {
    1.0
}

fn default_samples() -> usize {
    20
}

fn default_cells_per_radius() -> usize {
    16
}

fn default_spread_two() -> f64 {
    2.0
}

fn default_spread_three() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgcheckConfig {
    #[serde(flatten)]
    pub family: FamilySpec,
    /// The analytic field, zero off its positivity domain, is sampled on
    /// `[-half_width, half_width]^N` with spacing `h`.
    #[serde(default = "default_dg_h")]
    pub h: f64,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_half")]
    pub sigma: f64,
    #[serde(default = "default_half")]
    pub eta: f64,
    #[serde(default = "default_one")]
    pub q: f64,
    /// Random configurations for the lemma and energy checks.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Capacity grid resolution for `delta(R)`.
    #[serde(default = "default_cells_per_radius")]
    pub cells_per_radius: usize,
    #[serde(default = "default_spread_two")]
    pub harnack_spread: f64,
    #[serde(default = "default_spread_two")]
    pub sup_spread: f64,
    #[serde(default = "default_spread_three")]
    pub log_spread: f64,
}

fn default_tau() -> f64 {
    dglab::degiorgi::DEFAULT_TAU
}

fn default_count() -> usize {
    5
}

fn default_fit_tolerance() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledField {
    pub h: f64,
    pub half_width: f64,
    /// Allowed exponent error for the sampled curve.
    #[serde(default = "default_sampled_tolerance")]
    pub tolerance: f64,
}

fn default_sampled_tolerance() -> f64 {
    0.02
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthConfig {
    #[serde(flatten)]
    pub family: FamilySpec,
    /// Explicit radii; otherwise `base * 4^k` for `k < count`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default = "default_one")]
    pub base: f64,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_fit_tolerance")]
    pub tolerance: f64,
    /// Also measure the curve on the sampled field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<SampledField>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    /// CSV files with a `verdict` column, relative to the config file.
    pub inputs: Vec<PathBuf>,
}
