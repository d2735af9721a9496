use serde::{Deserialize, Serialize};

use super::TrainConfig;
use crate::crf::{crf_dataset, predict_crf, train_crf, CrfInstance, CrfParams, CrfTasks};
use crate::features::{build_vocabulary, vectorize, FeatureBag, SnippetFeatures, Vocabulary};
use crate::snippets::SnippetLabels;
use crate::Result;

/// Vocabularies and vectorization shared by the CRF-based models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrfVocabularies {
    pub context: Vocabulary,
    pub response: Vocabulary,
}

impl CrfVocabularies {
    pub fn build(data: &[(SnippetFeatures, SnippetLabels)], min_count: usize) -> Result<Self> {
        let ctx: Vec<FeatureBag> = data.iter().map(|(f, _)| f.context.clone()).collect();
        let resp: Vec<FeatureBag> = data.iter().flat_map(|(f, _)| f.responses.iter().cloned()).collect();
        Ok(CrfVocabularies {
            context: build_vocabulary(&ctx, min_count)?,
            response: build_vocabulary(&resp, min_count)?,
        })
    }

    pub fn instance(&self, f: &SnippetFeatures) -> CrfInstance {
        CrfInstance {
            snippet_id: f.snippet_id.clone(),
            context: vectorize(&f.context, &self.context),
            responses: f.responses.iter().map(|b| vectorize(b, &self.response)).collect(),
        }
    }
}

pub(crate) fn train_crf_part(
    data: &[(SnippetFeatures, SnippetLabels)],
    cfg: &TrainConfig,
    tasks: CrfTasks,
) -> Result<(CrfVocabularies, CrfParams)> {
    let vocabularies = CrfVocabularies::build(data, cfg.min_count)?;
    let instances = data.iter().map(|(f, _)| vocabularies.instance(f)).collect();
    let labels: Vec<SnippetLabels> = data.iter().map(|(_, y)| y.clone()).collect();
    let dataset = crf_dataset(instances, &labels, tasks)?;
    let params = train_crf(&dataset, cfg.l2, &cfg.optim, tasks)?;
    Ok((vocabularies, params))
}

/// The four-task CRF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointModel {
    pub vocabularies: CrfVocabularies,
    pub params: CrfParams,
    pub decoding: crate::crf::Decoding,
}

pub fn train_joint(data: &[(SnippetFeatures, SnippetLabels)], cfg: &TrainConfig) -> Result<JointModel> {
    super::check_training_data(data)?;
    let (vocabularies, params) = train_crf_part(data, cfg, CrfTasks::All)?;
    Ok(JointModel {
        vocabularies,
        params,
        decoding: cfg.decoding,
    })
}

impl JointModel {
    pub fn predict(&self, f: &SnippetFeatures) -> Result<SnippetLabels> {
        let a = predict_crf(&self.params, &self.vocabularies.instance(f), self.decoding)?;
        Ok(a.to_labels())
    }
}
