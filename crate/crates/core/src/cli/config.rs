use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::eval::CvConfig;
use crate::features::FeatureSet;
use crate::models::{ModelKind, TrainConfig};
use crate::{Error, Result};

/// File locations. Relative paths resolve against the working directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub dump: Option<PathBuf>,
    pub trees: Option<PathBuf>,
    pub snippets: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub lexicon_dir: Option<PathBuf>,
    pub sidecar_dir: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvSettings {
    pub k: usize,
    pub tune_fold: usize,
    pub l2_grid: Vec<f64>,
    pub min_count_grid: Vec<usize>,
}

impl Default for CvSettings {
    fn default() -> Self {
        let d = CvConfig::default();
        CvSettings {
            k: d.k,
            tune_fold: d.tune_fold,
            l2_grid: d.l2_grid,
            min_count_grid: d.min_count_grid,
        }
    }
}

/// Everything one run needs. Loaded from TOML, then overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    pub features: FeatureSet,
    pub model: ModelKind,
    pub keyword: String,
    pub max_edit: usize,
    /// Abort ingestion on the first malformed record.
    pub strict: bool,
    pub paths: Paths,
    pub cv: CvSettings,
    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            threads: 0,
            features: FeatureSet::Basic,
            model: ModelKind::Baseline,
            keyword: "troll".into(),
            max_edit: 1,
            strict: false,
            paths: Paths {
                out: PathBuf::from("out"),
                ..Default::default()
            },
            cv: CvSettings::default(),
            train: TrainConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Training settings with the run seed.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            ..self.train.clone()
        }
    }

    pub fn cv_config(&self) -> CvConfig {
        CvConfig {
            k: self.cv.k,
            seed: self.seed,
            tune_fold: self.cv.tune_fold,
            l2_grid: self.cv.l2_grid.clone(),
            min_count_grid: self.cv.min_count_grid.clone(),
            train: self.train_config(),
        }
    }

    /// Checks enumerations, ranges and that every configured input exists.
    pub fn validate(&self) -> Result<()> {
        if self.keyword.trim().is_empty() {
            return Err(Error::Config("keyword must be nonempty".into()));
        }
        if self.cv.k < 2 || self.cv.tune_fold >= self.cv.k {
            return Err(Error::Config(format!(
                "need k ≥ 2 and tune_fold < k, got k={} tune_fold={}",
                self.cv.k, self.cv.tune_fold
            )));
        }
        if self.cv.l2_grid.is_empty() || self.cv.min_count_grid.is_empty() {
            return Err(Error::Config("tuning grids must be nonempty".into()));
        }
        if self.cv.l2_grid.iter().chain([&self.train.l2]).any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(Error::Config("l2 values must be finite and non-negative".into()));
        }
        self.train.optim.validate().map_err(|e| Error::Config(e.to_string()))?;
        let p = &self.paths;
        for (name, path) in [
            ("dump", &p.dump),
            ("trees", &p.trees),
            ("snippets", &p.snippets),
            ("annotations", &p.annotations),
            ("lexicon_dir", &p.lexicon_dir),
            ("sidecar_dir", &p.sidecar_dir),
        ] {
            if let Some(path) = path {
                if !path.exists() {
                    return Err(Error::Config(format!("{name} path {} does not exist", path.display())));
                }
            }
        }
        Ok(())
    }
}
