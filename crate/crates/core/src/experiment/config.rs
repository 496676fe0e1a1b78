use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::hawkes::SimulationOptions;
use crate::kernel::{AsymptoticSequence, KernelMatrixSpec};
use crate::limit::RoughCirForm;
use crate::{Error, Result};

/// Kernel matrix given inline or as a path to a JSON file holding one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelRef {
    Inline(KernelMatrixSpec),
    File(PathBuf),
}

/// One path count for every horizon, or one per horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PathCounts {
    Uniform(usize),
    PerHorizon(Vec<usize>),
}

impl PathCounts {
    pub fn for_index(&self, i: usize) -> usize {
        match self {
            Self::Uniform(n) => *n,
            Self::PerHorizon(v) => v[i],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSettings {
    /// Leverage window as a fraction of the rescaled horizon.
    #[serde(default = "default_window")]
    pub leverage_window: f64,
    #[serde(default = "default_moments")]
    pub hurst_moments: Vec<f64>,
    /// `[lo, hi, count]` lags in grid steps, log spaced.
    #[serde(default = "default_lags")]
    pub hurst_lags: [usize; 3],
}

fn default_window() -> f64 {
    0.02
}
fn default_moments() -> Vec<f64> {
    crate::estimators::HURST_MOMENTS.to_vec()
}
fn default_lags() -> [usize; 3] {
    [1, 64, 7]
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self { leverage_window: default_window(), hurst_moments: default_moments(), hurst_lags: default_lags() }
    }
}

/// Settings of the limit-model runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitSettings {
    /// Paths written by the `limit` command.
    #[serde(default = "default_limit_paths")]
    pub paths: usize,
    /// Steps on `[0, horizon]`; 1000 (light) or 1024 (heavy) when absent.
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default = "one")]
    pub horizon: f64,
    /// Rough CIR discretisation; heavy regime only.
    #[serde(default)]
    pub form: Option<RoughCirForm>,
}

fn default_limit_paths() -> usize {
    10
}
fn one() -> f64 {
    1.0
}

impl Default for LimitSettings {
    fn default() -> Self {
        Self { paths: default_limit_paths(), steps: None, horizon: 1.0, form: None }
    }
}

/// Tolerances and sample sizes of the `verify` command.
///
/// `tolerance_scale` multiplies every statistical band (half-widths, upper
/// bounds, critical values); identity rows ignore it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSettings {
    #[serde(default = "one")]
    pub tolerance_scale: f64,
    #[serde(default = "default_bracket")]
    pub bracket_tolerance: f64,
    #[serde(default = "default_no_arb")]
    pub no_arbitrage: f64,
    #[serde(default = "default_heavy_ks")]
    pub heavy_ks_max: f64,
    #[serde(default = "default_bracket")]
    pub hurst_half_width: f64,
    /// Limit-model samples for the marginal comparison at `t = 1`.
    #[serde(default = "default_limit_samples")]
    pub limit_samples: usize,
    #[serde(default = "default_hurst_paths")]
    pub hurst_paths: usize,
    #[serde(default = "default_hurst_steps")]
    pub hurst_steps: usize,
    #[serde(default = "yes")]
    pub identities: bool,
}

fn default_bracket() -> f64 {
    0.05
}
fn default_no_arb() -> f64 {
    0.02
}
fn default_heavy_ks() -> f64 {
    0.15
}
fn default_limit_samples() -> usize {
    10_000
}
fn default_hurst_paths() -> usize {
    200
}
fn default_hurst_steps() -> usize {
    1 << 12
}
fn yes() -> bool {
    true
}

impl Default for CheckSettings {
    fn default() -> Self {
        Self {
            tolerance_scale: 1.0,
            bracket_tolerance: default_bracket(),
            no_arbitrage: default_no_arb(),
            heavy_ks_max: default_heavy_ks(),
            hurst_half_width: default_bracket(),
            limit_samples: default_limit_samples(),
            hurst_paths: default_hurst_paths(),
            hurst_steps: default_hurst_steps(),
            identities: true,
        }
    }
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelRef,
    pub sequence: AsymptoticSequence,
    pub horizons: Vec<f64>,
    pub paths: PathCounts,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    /// Write full event files from `simulate`.
    #[serde(default = "yes")]
    pub write_events: bool,
    #[serde(default)]
    pub simulation: SimulationOptions,
    #[serde(default)]
    pub estimators: EstimatorSettings,
    #[serde(default)]
    pub limit: LimitSettings,
    #[serde(default)]
    pub checks: CheckSettings,
    /// Directory that relative model paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_value(serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?)
    }

    pub fn from_value(v: Value) -> Result<Self> {
        let cfg: Self = serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file, applying `key=value` overrides of top-level scalar fields.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut v: Value = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        apply_overrides(&mut v, overrides)?;
        let mut cfg = Self::from_value(v)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        self.sequence.validate()?;
        if self.horizons.is_empty() {
            return Err(Error::Config("`horizons` is empty".into()));
        }
        if self.horizons.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("`horizons` must be strictly increasing".into()));
        }
        if let Some(&t) = self.horizons.iter().find(|&&t| !(t > self.sequence.min_horizon()) || !t.is_finite()) {
            return Err(Error::Config(format!("horizon {t} gives a_T outside (0, 1)")));
        }
        match &self.paths {
            PathCounts::Uniform(n) if *n < 1 => return Err(Error::Config("`paths` must be at least 1".into())),
            PathCounts::PerHorizon(v) if v.len() != self.horizons.len() => {
                return Err(Error::Config(format!("`paths` has {} entries for {} horizons", v.len(), self.horizons.len())))
            }
            PathCounts::PerHorizon(v) if v.iter().any(|&n| n < 1) => {
                return Err(Error::Config("`paths` entries must be at least 1".into()))
            }
            _ => {}
        }
        if !self.sequence.is_heavy() && self.limit.form.is_some() {
            return Err(Error::Config("`limit.form` applies to the heavy regime only".into()));
        }
        if !(self.estimators.leverage_window > 0.0 && self.estimators.leverage_window < 1.0) {
            return Err(Error::Config("`estimators.leverage_window` must lie in (0, 1)".into()));
        }
        if !(self.checks.tolerance_scale >= 0.0) {
            return Err(Error::Config("`checks.tolerance_scale` must be nonnegative".into()));
        }
        Ok(())
    }

    /// The kernel matrix, reading it from disk when given by path.
    pub fn model_spec(&self) -> Result<KernelMatrixSpec> {
        let spec = match &self.model {
            ModelRef::Inline(s) => s.clone(),
            ModelRef::File(p) => {
                let p = match &self.base_dir {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.clone(),
                };
                let text = std::fs::read_to_string(&p)
                    .map_err(|e| Error::Config(format!("cannot read model {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("model {}: {e}", p.display())))?
            }
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn path_count(&self, ladder_index: usize) -> usize {
        self.paths.for_index(ladder_index)
    }

    pub fn output_dir(&self) -> PathBuf {
        match &self.base_dir {
            Some(b) if self.output_dir.is_relative() => b.join(&self.output_dir),
            _ => self.output_dir.clone(),
        }
    }
}

/// Sets top-level fields from `key=value` strings. Values parse as JSON when
/// they can and as strings otherwise; only scalar fields may be replaced.
pub fn apply_overrides(v: &mut Value, overrides: &[(String, String)]) -> Result<()> {
    let obj = v.as_object_mut().ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
    for (key, raw) in overrides {
        if let Some(old) = obj.get(key) {
            if old.is_object() || old.is_array() {
                return Err(Error::Config(format!("`{key}` is not a top-level scalar field")));
            }
        }
        let new = serde_json::from_str::<Value>(raw).unwrap_or_else(|_| Value::String(raw.clone()));
        if new.is_object() || new.is_array() {
            return Err(Error::Config(format!("override of `{key}` must be a scalar")));
        }
        obj.insert(key.clone(), new);
    }
    Ok(())
}
