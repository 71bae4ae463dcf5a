use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use ratedml_core::dml::{FoldMode, Score};
use ratedml_core::panel_data::FilterCriteria;
use ratedml_core::preprocess::{EncodingOptions, SignificanceLevel};

use crate::error::CliError;

/// Largest order tried when the lag is chosen by AIC.
pub const AUTO_LAG_MAX: usize = 12;
/// Default lag order when none is configured.
pub const DEFAULT_LAG: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagSetting {
    Fixed(usize),
    Auto,
}

impl Default for LagSetting {
    fn default() -> Self {
        LagSetting::Fixed(DEFAULT_LAG)
    }
}

impl FromStr for LagSetting {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(LagSetting::Auto);
        }
        s.parse().map(LagSetting::Fixed).map_err(|_| format!("lag must be a non-negative integer or `auto`, got `{s}`"))
    }
}

impl std::fmt::Display for LagSetting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LagSetting::Fixed(p) => write!(f, "{p}"),
            LagSetting::Auto => f.write_str("auto"),
        }
    }
}

impl Serialize for LagSetting {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            LagSetting::Fixed(p) => s.serialize_u64(*p as u64),
            LagSetting::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for LagSetting {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(usize),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Number(p) => Ok(LagSetting::Fixed(p)),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LearnerChoice {
    Linear,
    Boosted,
    #[default]
    Both,
}

impl FromStr for LearnerChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(LearnerChoice::Linear),
            "boosted" => Ok(LearnerChoice::Boosted),
            "both" => Ok(LearnerChoice::Both),
            _ => Err(format!("learner must be linear, boosted or both, got `{s}`")),
        }
    }
}

pub fn parse_fold_mode(s: &str) -> Result<FoldMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "row" => Ok(FoldMode::Row),
        "unit" | "unit_blocked" => Ok(FoldMode::UnitBlocked),
        "time" | "time_blocked" => Ok(FoldMode::TimeBlocked),
        _ => Err(format!("fold mode must be row, unit or time, got `{s}`")),
    }
}

/// Two folds for both tuning and cross-fitting.
fn default_k() -> usize {
    2
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("ratedml-out")
}

fn default_time_column() -> String {
    "date".to_string()
}

fn default_encoding() -> EncodingOptions {
    EncodingOptions::default()
}

/// A complete run description. Relative paths in a config file are
/// resolved against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Wide monthly fund returns, one column per ticker.
    pub funds: PathBuf,
    /// Wide monthly macro series in levels.
    #[serde(rename = "macro")]
    pub macro_vars: PathBuf,
    #[serde(default)]
    pub metadata: Option<PathBuf>,
    #[serde(default)]
    pub filter: Option<FilterCriteria>,
    /// Macro column used as the treatment.
    pub treatment: String,
    #[serde(default)]
    pub lag_order: LagSetting,
    #[serde(default)]
    pub learner: LearnerChoice,
    /// JSON list of boosted-tree hyperparameters to search.
    #[serde(default)]
    pub grid: Option<PathBuf>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub level: SignificanceLevel,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub fold_mode: FoldMode,
    #[serde(default = "default_encoding")]
    pub encoding: EncodingOptions,
    #[serde(default)]
    pub score: Score,
    #[serde(default = "default_time_column")]
    pub time_column: String,
}

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub learner: Option<LearnerChoice>,
    pub lag: Option<LagSetting>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub fold_mode: Option<FoldMode>,
    pub output_dir: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.funds);
        fix(&mut self.macro_vars);
        if let Some(m) = self.metadata.as_mut() {
            fix(m);
        }
        if let Some(g) = self.grid.as_mut() {
            fix(g);
        }
        fix(&mut self.output_dir);
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.learner {
            self.learner = v;
        }
        if let Some(v) = o.lag {
            self.lag_order = v;
        }
        if let Some(v) = o.k {
            self.k = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.fold_mode {
            self.fold_mode = v;
        }
        if let Some(v) = &o.output_dir {
            self.output_dir = v.clone();
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.k < 2 {
            return Err(CliError::Config(format!("k must be at least 2, got {}", self.k)));
        }
        if self.treatment.trim().is_empty() {
            return Err(CliError::Config("treatment name is empty".into()));
        }
        if self.filter.is_some() && self.metadata.is_none() {
            return Err(CliError::Config("a fund filter needs a metadata file".into()));
        }
        if self.lag_order == LagSetting::Fixed(0) {
            return Err(CliError::Config("lag order must be at least 1".into()));
        }
        Ok(())
    }

    /// SHA-256 of the config as JSON, leaving out the output directory.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut v = serde_json::to_value(self).expect("config serialises");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("output_dir");
        }
        hex::encode(Sha256::digest(v.to_string().as_bytes()))
    }
}
