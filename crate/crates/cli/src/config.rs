//! TOML run configurations. Every struct rejects unknown keys so a typo'd
//! or mismatched file fails loudly instead of running a default.

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use spadsim_core::harness::grid::Grid;
use spadsim_core::harness::scene::{AttenuationPolicy, FluxField};
use spadsim_core::harness::sweep::DepthPrior;
use spadsim_core::PulseShape;
use std::path::Path;

/// Either an explicit list of values or a log-spaced range.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum AxisSpec {
    List(Vec<f64>),
    Log { lo: f64, hi: f64, points: usize },
}

impl AxisSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            AxisSpec::List(v) => Ok(v.clone()),
            AxisSpec::Log { lo, hi, points } => {
                if *points < 2 || *lo <= 0.0 || *hi <= *lo {
                    bail!("log axis needs points >= 2 and 0 < lo < hi, got lo={lo} hi={hi} points={points}");
                }
                let (a, b) = (lo.ln(), hi.ln());
                Ok((0..*points)
                    .map(|i| (a + (b - a) * i as f64 / (*points - 1) as f64).exp())
                    .collect())
            }
        }
    }
}

/// `"uniform"` or a fixed true depth bin.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DepthSpec {
    Fixed(usize),
    Named(String),
}

impl DepthSpec {
    pub fn prior(&self) -> Result<DepthPrior> {
        match self {
            DepthSpec::Fixed(tau) => Ok(DepthPrior::Fixed(*tau)),
            DepthSpec::Named(s) if s == "uniform" => Ok(DepthPrior::UniformRandom),
            DepthSpec::Named(s) => bail!("depth must be \"uniform\" or a bin number, got {s:?}"),
        }
    }
}

/// A scalar flux or the path of a per-pixel map, relative to the config.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Uniform(f64),
    MapPath(String),
}

impl FieldSpec {
    pub fn resolve(&self, base: &Path) -> Result<FluxField> {
        match self {
            FieldSpec::Uniform(v) => Ok(FluxField::Uniform(*v)),
            FieldSpec::MapPath(p) => {
                let path = base.join(p);
                let text = std::fs::read_to_string(&path)
                    .with_context(|| format!("reading flux map {}", path.display()))?;
                let grid: Grid<f64> = Grid::parse(&text)
                    .with_context(|| format!("parsing flux map {}", path.display()))?;
                Ok(FluxField::PerPixel(grid))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    /// `"delta"` or `"gaussian"`.
    pub kind: String,
    #[serde(default)]
    pub sigma_bins: Option<f64>,
    #[serde(default)]
    pub radius_bins: Option<usize>,
}

impl PulseConfig {
    pub fn shape(&self) -> Result<PulseShape> {
        match self.kind.as_str() {
            "delta" => Ok(PulseShape::Delta),
            "gaussian" => {
                let sigma = self.sigma_bins.context("gaussian pulse needs sigma_bins")?;
                let radius = self.radius_bins.context("gaussian pulse needs radius_bins")?;
                Ok(PulseShape::gaussian(sigma, radius)?)
            }
            other => bail!("pulse kind must be \"delta\" or \"gaussian\", got {other:?}"),
        }
    }
}

fn default_upsilon() -> f64 {
    1.0
}

fn default_bin_width() -> f64 {
    100e-12
}

fn default_trials() -> u32 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub phi_sig: f64,
    pub phi_bkg: f64,
    pub num_bins: usize,
    pub tau: usize,
    #[serde(default = "default_upsilon")]
    pub upsilon: f64,
    #[serde(default = "default_bin_width")]
    pub bin_width: f64,
    pub num_cycles: u64,
    #[serde(default = "default_trials")]
    pub trials: u32,
    pub seed: u64,
    #[serde(default)]
    pub pulse: Option<PulseConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub phi_sig: AxisSpec,
    pub phi_bkg: AxisSpec,
    pub upsilon: AxisSpec,
    pub num_bins: usize,
    pub num_cycles: u64,
    pub trials: u32,
    #[serde(default)]
    pub estimator: Option<String>,
    /// `"uniform"` or a fixed bin.
    pub depth: DepthSpec,
    #[serde(default = "default_bin_width")]
    pub bin_width: f64,
    pub seed: u64,
    #[serde(default)]
    pub drop_invalid: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    /// Path of the true depth map (bins), relative to the config file.
    pub depth_map: String,
    pub phi_sig: FieldSpec,
    pub phi_bkg: FieldSpec,
    pub num_bins: usize,
    pub num_cycles: u64,
    #[serde(default = "default_bin_width")]
    pub bin_width: f64,
    pub pixel_pitch: f64,
    /// `none`, `extreme`, `optimal-global`, or `optimal-per-pixel`.
    pub policy: String,
    #[serde(default)]
    pub estimator: Option<String>,
    #[serde(default = "default_laser_off")]
    pub laser_off_cycles: u64,
    pub inlier_threshold_bins: u32,
    pub seed: u64,
}

fn default_laser_off() -> u64 {
    30
}

pub fn parse_policy(name: &str) -> Result<AttenuationPolicy> {
    Ok(match name {
        "none" => AttenuationPolicy::None,
        "extreme" => AttenuationPolicy::Extreme,
        "optimal-global" => AttenuationPolicy::OptimalGlobal,
        "optimal-per-pixel" => AttenuationPolicy::OptimalPerPixel,
        other => bail!(
            "policy must be none, extreme, optimal-global or optimal-per-pixel, got {other:?}"
        ),
    })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptPoint {
    pub tau: usize,
    pub phi_bkg: f64,
    #[serde(default)]
    pub phi_sig: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptConfig {
    pub num_bins: usize,
    #[serde(default = "default_bin_width")]
    pub bin_width: f64,
    pub laser_off_cycles: u64,
    pub laser_on_cycles: u64,
    /// Default signal flux; points may override it.
    pub phi_sig: f64,
    pub points: Vec<AdaptPoint>,
    pub seed: u64,
}

/// Reads and parses one TOML config, with the path in every error.
pub fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}
