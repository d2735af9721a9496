use serde::{Deserialize, Serialize};

use super::joint::{train_crf_part, CrfVocabularies};
use super::pipeline::{Stage, Upstream};
use super::{cross_val_upstream, fit_classifier, DownstreamFeatures, TrainConfig};
use crate::crf::{predict_crf, CrfParams, CrfTasks, Decoding};
use crate::features::{build_vocabulary_with, vectorize, FeatureBag, SnippetFeatures, SparseVector};
use crate::snippets::{
    DisclosureLabel, IntentionLabel, InterpretationLabel, Label, ResponseLabels, SnippetLabels,
    StrategyLabel,
};
use crate::{Error, Result};

/// A three-task CRF over (i, d, r) followed by a strategy classifier that
/// sees the response and the inferred i, d and r.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridModel {
    pub vocabularies: CrfVocabularies,
    pub params: CrfParams,
    pub strategy: Stage,
    pub decoding: Decoding,
}

pub fn train_hybrid(data: &[(SnippetFeatures, SnippetLabels)], cfg: &TrainConfig) -> Result<HybridModel> {
    super::check_training_data(data)?;
    let (vocabularies, params) = train_crf_part(data, cfg, CrfTasks::Idr)?;
    let upstream_labels: Vec<SnippetLabels> = match cfg.downstream_features {
        DownstreamFeatures::Gold => data.iter().map(|(_, y)| y.clone()).collect(),
        DownstreamFeatures::CrossValPredicted => {
            cross_val_upstream(data, cfg, |d, c| Ok(Box::new(train_hybrid(d, c)?)))?
        }
    };

    let mut bags: Vec<FeatureBag> = Vec::new();
    let mut upstream = Vec::new();
    let mut ys = Vec::new();
    for ((f, y), u) in data.iter().zip(&upstream_labels) {
        for (k, bag) in f.responses.iter().enumerate() {
            bags.push(bag.clone());
            upstream.push(Upstream {
                intention: Some(u.intention),
                disclosure: Some(u.disclosure),
                interpretation: Some(u.per_response[k].interpretation),
            });
            ys.push(y.per_response[k].strategy.index());
        }
    }
    let mut reserved = IntentionLabel::indicators();
    reserved.extend(DisclosureLabel::indicators());
    reserved.extend(InterpretationLabel::indicators());
    let vocabulary = build_vocabulary_with(&bags, cfg.min_count, &reserved)?;
    let xs: Vec<SparseVector> = bags
        .iter()
        .zip(&upstream)
        .map(|(b, u)| vectorize(&b.with_indicators(u.indicators()), &vocabulary))
        .collect();
    let labels = StrategyLabel::all().iter().map(|l| l.name().to_string()).collect();
    let weights = fit_classifier(&xs, &ys, labels, cfg)?;
    Ok(HybridModel {
        vocabularies,
        params,
        strategy: Stage { vocabulary, weights },
        decoding: cfg.decoding,
    })
}

impl HybridModel {
    pub fn predict(&self, f: &SnippetFeatures) -> Result<SnippetLabels> {
        let a = predict_crf(&self.params, &self.vocabularies.instance(f), self.decoding)?;
        let idr = a.to_labels();
        let mut per_response = Vec::with_capacity(idr.per_response.len());
        for (bag, r) in f.responses.iter().zip(&idr.per_response) {
            let u = Upstream {
                intention: Some(idr.intention),
                disclosure: Some(idr.disclosure),
                interpretation: Some(r.interpretation),
            };
            let x = self.strategy.vector(bag, &u);
            let (b, _) = crate::optim::predict_logreg(&self.strategy.weights, &x)?;
            per_response.push(ResponseLabels {
                interpretation: r.interpretation,
                strategy: StrategyLabel::from_index(b)
                    .ok_or_else(|| Error::Label(format!("strategy index {b} out of range")))?,
            });
        }
        Ok(SnippetLabels {
            per_response,
            ..idr
        })
    }
}
