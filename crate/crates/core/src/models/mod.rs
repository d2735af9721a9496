//! The three end-to-end systems and their model files.

mod file;
mod hybrid;
mod joint;
mod pipeline;

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use file::{load_model, read_model, save_model, write_model, ModelFile, ModelMeta, FORMAT, FORMAT_VERSION};
pub use hybrid::{train_hybrid, HybridModel};
pub use joint::{train_joint, CrfVocabularies, JointModel};
pub use pipeline::{train_pipeline, PipelineModel, Stage, Upstream};

use crate::crf::Decoding;
use crate::eval::make_folds;
use crate::features::{featurize_snippet, FeatureSet, SidecarIndex, SnippetFeatures, SparseVector};
use crate::lexicons::LexiconSet;
use crate::optim::{train_logreg, LogRegWeights, OptimConfig};
use crate::snippets::{SnippetLabels, SnippetRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Baseline,
    Joint,
    Hybrid,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Baseline, ModelKind::Joint, ModelKind::Hybrid];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Baseline => "baseline",
            ModelKind::Joint => "joint",
            ModelKind::Hybrid => "hybrid",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" | "pipeline" => Ok(ModelKind::Baseline),
            "joint" => Ok(ModelKind::Joint),
            "hybrid" | "2-pass" | "two-pass" => Ok(ModelKind::Hybrid),
            other => Err(Error::Config(format!("unknown model `{other}`"))),
        }
    }
}

/// Source of the upstream labels used as features when training later
/// stages.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DownstreamFeatures {
    #[default]
    Gold,
    /// Labels predicted for each training snippet by a model trained on
    /// the other inner folds.
    CrossValPredicted,
}

impl std::str::FromStr for DownstreamFeatures {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "gold" => Ok(DownstreamFeatures::Gold),
            "cross_val_predicted" => Ok(DownstreamFeatures::CrossValPredicted),
            other => Err(Error::Config(format!("unknown downstream_features `{other}`"))),
        }
    }
}

/// Inner folds used by [`DownstreamFeatures::CrossValPredicted`].
pub const INNER_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub l2: f64,
    pub min_count: usize,
    pub optim: OptimConfig,
    pub downstream_features: DownstreamFeatures,
    pub decoding: Decoding,
    /// Seeds the inner folds of cross-validated upstream labels.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2: 0.1,
            min_count: 1,
            optim: OptimConfig::default(),
            downstream_features: DownstreamFeatures::Gold,
            decoding: Decoding::Map,
            seed: 0,
        }
    }
}

/// A trained system of any kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Pipeline(PipelineModel),
    Joint(JointModel),
    Hybrid(HybridModel),
}

/// Anything that labels a featurized snippet.
pub trait Predictor: Send + Sync {
    fn predict(&self, features: &SnippetFeatures) -> Result<SnippetLabels>;
}

impl Predictor for PipelineModel {
    fn predict(&self, f: &SnippetFeatures) -> Result<SnippetLabels> {
        PipelineModel::predict(self, f)
    }
}

impl Predictor for JointModel {
    fn predict(&self, f: &SnippetFeatures) -> Result<SnippetLabels> {
        JointModel::predict(self, f)
    }
}

impl Predictor for HybridModel {
    fn predict(&self, f: &SnippetFeatures) -> Result<SnippetLabels> {
        HybridModel::predict(self, f)
    }
}

impl Predictor for Model {
    fn predict(&self, f: &SnippetFeatures) -> Result<SnippetLabels> {
        match self {
            Model::Pipeline(m) => m.predict(f),
            Model::Joint(m) => m.predict(f),
            Model::Hybrid(m) => m.predict(f),
        }
    }
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Pipeline(_) => ModelKind::Baseline,
            Model::Joint(_) => ModelKind::Joint,
            Model::Hybrid(_) => ModelKind::Hybrid,
        }
    }
}

pub fn train_model(kind: ModelKind, data: &[(SnippetFeatures, SnippetLabels)], cfg: &TrainConfig) -> Result<Model> {
    Ok(match kind {
        ModelKind::Baseline => Model::Pipeline(train_pipeline(data, cfg)?),
        ModelKind::Joint => Model::Joint(train_joint(data, cfg)?),
        ModelKind::Hybrid => Model::Hybrid(train_hybrid(data, cfg)?),
    })
}

/// Predicts every snippet, in parallel, preserving order.
pub fn predict_all<P: Predictor + ?Sized>(model: &P, features: &[SnippetFeatures]) -> Result<Vec<SnippetLabels>> {
    use rayon::prelude::*;
    features.par_iter().map(|f| model.predict(f)).collect()
}

/// Featurizes records, in parallel, preserving order.
pub fn featurize_records(
    records: &[SnippetRecord],
    sidecars: Option<&SidecarIndex>,
    lexicons: &LexiconSet,
    set: FeatureSet,
) -> Vec<SnippetFeatures> {
    use rayon::prelude::*;
    records
        .par_iter()
        .map(|r| featurize_snippet(&r.snippet(), sidecars, lexicons, set))
        .collect()
}

/// Featurized records paired with their gold labels; unlabeled records are
/// an error.
pub fn labeled_features(
    records: &[SnippetRecord],
    sidecars: Option<&SidecarIndex>,
    lexicons: &LexiconSet,
    set: FeatureSet,
) -> Result<Vec<(SnippetFeatures, SnippetLabels)>> {
    let feats = featurize_records(records, sidecars, lexicons, set);
    records
        .iter()
        .zip(feats)
        .map(|(r, f)| {
            let y = r
                .labels
                .clone()
                .ok_or_else(|| Error::Label(format!("{} has no labels", r.snippet_id)))?;
            Ok((f, y))
        })
        .collect()
}

pub(crate) fn check_training_data(data: &[(SnippetFeatures, SnippetLabels)]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Data("no labeled training snippets".into()));
    }
    for (f, y) in data {
        if f.responses.is_empty() {
            return Err(Error::Data(format!("{} has no responses", f.snippet_id)));
        }
        if f.responses.len() != y.per_response.len() {
            return Err(Error::Label(format!(
                "{}: {} responses but {} response labels",
                f.snippet_id,
                f.responses.len(),
                y.per_response.len()
            )));
        }
    }
    Ok(())
}

/// Logistic regression, or a constant classifier when the training labels
/// are all the same.
pub(crate) fn fit_classifier(
    xs: &[SparseVector],
    ys: &[usize],
    labels: Vec<String>,
    cfg: &TrainConfig,
) -> Result<LogRegWeights> {
    let dim = xs.first().map_or(0, |x| x.dim());
    match ys.first() {
        Some(&y) if ys.iter().all(|&v| v == y) => {
            let mut w = LogRegWeights::zeros(labels, dim);
            w.bias[y] = 1.0;
            Ok(w)
        }
        _ => train_logreg(xs, ys, labels, cfg.l2, &cfg.optim),
    }
}

type Trainer = fn(&[(SnippetFeatures, SnippetLabels)], &TrainConfig) -> Result<Box<dyn Predictor>>;

/// Held-out predictions for every training snippet from gold-trained models
/// over inner folds.
pub(crate) fn cross_val_upstream(
    data: &[(SnippetFeatures, SnippetLabels)],
    cfg: &TrainConfig,
    train: Trainer,
) -> Result<Vec<SnippetLabels>> {
    let k = INNER_FOLDS.min(data.len());
    if k < 2 {
        return Err(Error::Data("cross-validated upstream labels need at least 2 snippets".into()));
    }
    let ids: Vec<String> = data.iter().map(|(f, _)| f.snippet_id.clone()).collect();
    let plan = make_folds(&ids, k, cfg.seed, 0)?;
    let gold_cfg = TrainConfig {
        downstream_features: DownstreamFeatures::Gold,
        ..cfg.clone()
    };
    let mut out: Vec<Option<SnippetLabels>> = vec![None; data.len()];
    for fold in 0..k {
        let in_fold = |id: &str| plan.fold_of(id) == Some(fold);
        let train_set: Vec<_> = data.iter().filter(|(f, _)| !in_fold(&f.snippet_id)).cloned().collect();
        let model = train(&train_set, &gold_cfg)?;
        for (idx, (f, _)) in data.iter().enumerate() {
            if in_fold(&f.snippet_id) {
                out[idx] = Some(model.predict(f)?);
            }
        }
    }
    Ok(out.into_iter().map(|l| l.expect("every snippet in one fold")).collect())
}

/// One line of a prediction file; same shape as a gold label record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub snippet_id: String,
    #[serde(flatten)]
    pub labels: SnippetLabels,
}

pub fn write_predictions<W: Write>(mut w: W, header: Option<&str>, records: &[PredictionRecord]) -> std::io::Result<()> {
    if let Some(h) = header {
        writeln!(w, "{h}")?;
    }
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_predictions_from<R: BufRead>(reader: R) -> Result<Vec<PredictionRecord>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Record {
            line: n + 1,
            message: e.to_string(),
        })?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(serde_json::from_str(t).map_err(|e| Error::Record {
            line: n + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_predictions_from(std::io::BufReader::new(f))
}
