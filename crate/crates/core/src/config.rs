//! Run configuration: one TOML document per experiment.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::neural::{Activation, ModelConfig, TrainConfig};
use crate::wavelet::{BoundaryMode, FilterBank};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("`{field}`: {message}")]
    Invalid { field: &'static str, message: String },
    #[error("`paths.{field}` points to {path}, which does not exist")]
    MissingFile { field: &'static str, path: PathBuf },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

/// Input and output locations. Relative paths are resolved against the
/// directory holding the config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Edge list (`source,target`) or road table.
    pub graph: Option<PathBuf>,
    pub records: Option<PathBuf>,
    pub matrix: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    /// Leading days used for training; the rest are test days.
    pub training_days: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self { training_days: 24 }
    }
}

/// How band values are produced for window inputs and targets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandPolicy {
    /// The value at `t` comes from decomposing the trailing
    /// `causal_window` samples ending at `t` and reading the last index.
    /// Training and test indices are treated alike.
    #[default]
    Causal,
    /// Training indices take their values from one decomposition of the
    /// whole training split; each test index `t` from a decomposition of
    /// everything up to `t`.
    TrainingSplit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveletConfig {
    pub name: String,
    pub level: usize,
    pub boundary: BoundaryMode,
    pub band_policy: BandPolicy,
    pub causal_window: usize,
}

impl Default for WaveletConfig {
    fn default() -> Self {
        Self {
            name: "db4".into(),
            level: 3,
            boundary: BoundaryMode::Symmetric,
            band_policy: BandPolicy::Causal,
            causal_window: 128,
        }
    }
}

impl WaveletConfig {
    pub fn bank(&self) -> Result<FilterBank, ConfigError> {
        FilterBank::by_name(&self.name).map_err(|e| invalid("wavelet.name", e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianChoice {
    /// Normalized Laplacian of the symmetrized motif adjacency.
    #[default]
    Motif,
    /// Normalized Laplacian of the symmetrized plain adjacency.
    Adjacency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSettings {
    /// Chebyshev order `K`.
    pub cheb_order: usize,
    /// Recent-trend window `m`.
    pub trend_window: usize,
    /// Daily-period window `n`.
    pub period_window: usize,
    pub hidden_size: usize,
    pub mgc_filters: Vec<usize>,
    pub activation: Activation,
    pub laplacian: LaplacianChoice,
}

impl Default for ModelSettings {
    fn default() -> Self {
        let m = ModelConfig::new(1);
        Self {
            cheb_order: m.cheb_order,
            trend_window: m.trend_window,
            period_window: m.period_window,
            hidden_size: m.hidden_size,
            mgc_filters: m.mgc_filters,
            activation: m.activation,
            laplacian: LaplacianChoice::Motif,
        }
    }
}

impl ModelSettings {
    pub fn model_config(&self, node_count: usize) -> ModelConfig {
        ModelConfig {
            node_count,
            mgc_filters: self.mgc_filters.clone(),
            cheb_order: self.cheb_order,
            hidden_size: self.hidden_size,
            trend_window: self.trend_window,
            period_window: self.period_window,
            activation: self.activation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArmaSettings {
    pub max_p: usize,
    pub max_q: usize,
}

impl Default for ArmaSettings {
    fn default() -> Self {
        Self { max_p: 3, max_q: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// Actual speeds below this are left out of MAPE.
    pub mape_epsilon: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self { mape_epsilon: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub paths: PathsConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub wavelet: WaveletConfig,
    #[serde(default)]
    pub model: ModelSettings,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub arma: ArmaSettings,
    #[serde(default)]
    pub metrics: MetricsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            paths: PathsConfig::default(),
            split: SplitConfig::default(),
            wavelet: WaveletConfig::default(),
            model: ModelSettings::default(),
            train: TrainConfig::default(),
            arma: ArmaSettings::default(),
            metrics: MetricsConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads and validates a config file, resolving relative paths against
    /// its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::from_toml(&text)
            .map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let p = &mut config.paths;
        for slot in [&mut p.graph, &mut p.records, &mut p.matrix, &mut p.output_dir] {
            if let Some(rel) = slot.as_mut().filter(|r| r.is_relative()) {
                *rel = base.join(&*rel);
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Range checks on every numeric field.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.version != CONFIG_VERSION {
            return Err(invalid("version", format!("unsupported version {}", self.version)));
        }
        if self.split.training_days == 0 {
            return Err(invalid("split.training_days", "must be at least 1"));
        }
        let w = &self.wavelet;
        self.wavelet.bank()?;
        if !(1..=10).contains(&w.level) {
            return Err(invalid("wavelet.level", "must lie in 1..=10"));
        }
        if w.causal_window < (1 << w.level) {
            return Err(invalid("wavelet.causal_window", format!("must be at least 2^level = {}", 1 << w.level)));
        }
        let m = &self.model;
        if m.trend_window == 0 {
            return Err(invalid("model.trend_window", "must be at least 1"));
        }
        if m.hidden_size == 0 {
            return Err(invalid("model.hidden_size", "must be at least 1"));
        }
        if m.mgc_filters.contains(&0) {
            return Err(invalid("model.mgc_filters", "entries must be positive"));
        }
        self.train
            .validate()
            .map_err(|e| invalid("train", e.to_string()))?;
        if self.arma.max_p == 0 || self.arma.max_q == 0 {
            return Err(invalid("arma", "max_p and max_q must be at least 1"));
        }
        let eps = self.metrics.mape_epsilon;
        if !(eps.is_finite() && eps > 0.0) {
            return Err(invalid("metrics.mape_epsilon", "must be positive"));
        }
        Ok(())
    }

    /// Checks that every configured input file exists.
    pub fn validate_paths(&self) -> Result<(), ConfigError> {
        let p = &self.paths;
        for (field, path) in [("graph", &p.graph), ("records", &p.records), ("matrix", &p.matrix)] {
            if let Some(path) = path {
                if !path.exists() {
                    return Err(ConfigError::MissingFile {
                        field,
                        path: path.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}
