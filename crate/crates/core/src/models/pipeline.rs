use serde::{Deserialize, Serialize};

use super::{cross_val_upstream, fit_classifier, TrainConfig};
use crate::features::{build_vocabulary_with, vectorize, FeatureBag, SnippetFeatures, SparseVector, Vocabulary};
use crate::optim::{predict_logreg, LogRegWeights};
use crate::snippets::{
    DisclosureLabel, IntentionLabel, InterpretationLabel, Label, ResponseLabels, SnippetLabels,
    StrategyLabel,
};
use crate::{Error, Result};

/// Upstream labels available to a pipeline stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Upstream {
    pub intention: Option<IntentionLabel>,
    pub disclosure: Option<DisclosureLabel>,
    pub interpretation: Option<InterpretationLabel>,
}

impl Upstream {
    pub fn indicators(&self) -> Vec<String> {
        let mut v = Vec::new();
        if let Some(i) = self.intention {
            v.push(i.indicator());
        }
        if let Some(d) = self.disclosure {
            v.push(d.indicator());
        }
        if let Some(r) = self.interpretation {
            v.push(r.indicator());
        }
        v
    }
}

/// One classifier stage: its vocabulary and weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub vocabulary: Vocabulary,
    pub weights: LogRegWeights,
}

impl Stage {
    pub fn vector(&self, bag: &FeatureBag, upstream: &Upstream) -> SparseVector {
        vectorize(&bag.with_indicators(upstream.indicators()), &self.vocabulary)
    }

    fn predict(&self, bag: &FeatureBag, upstream: &Upstream) -> Result<usize> {
        Ok(predict_logreg(&self.weights, &self.vector(bag, upstream))?.0)
    }
}

/// Chained classifiers I → D → R → B; each stage sees the earlier labels as
/// `task:*` indicator features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineModel {
    pub intention: Stage,
    pub disclosure: Stage,
    pub interpretation: Stage,
    pub strategy: Stage,
}

fn names<L: Label>() -> Vec<String> {
    L::all().iter().map(|l| l.name().to_string()).collect()
}

fn train_stage(
    bags: &[FeatureBag],
    upstream: &[Upstream],
    ys: &[usize],
    reserved: &[String],
    labels: Vec<String>,
    cfg: &TrainConfig,
) -> Result<Stage> {
    let vocabulary = build_vocabulary_with(bags, cfg.min_count, reserved)?;
    let xs: Vec<SparseVector> = bags
        .iter()
        .zip(upstream)
        .map(|(b, u)| vectorize(&b.with_indicators(u.indicators()), &vocabulary))
        .collect();
    let weights = fit_classifier(&xs, ys, labels, cfg)?;
    Ok(Stage { vocabulary, weights })
}

pub fn train_pipeline(data: &[(SnippetFeatures, SnippetLabels)], cfg: &TrainConfig) -> Result<PipelineModel> {
    super::check_training_data(data)?;
    // Upstream labels fed to training of later stages: gold, or held-out
    // predictions of a gold-trained pipeline.
    let upstream_labels: Vec<SnippetLabels> = match cfg.downstream_features {
        super::DownstreamFeatures::Gold => data.iter().map(|(_, y)| y.clone()).collect(),
        super::DownstreamFeatures::CrossValPredicted => {
            cross_val_upstream(data, cfg, |d, c| Ok(Box::new(train_pipeline(d, c)?)))?
        }
    };

    let ctx: Vec<FeatureBag> = data.iter().map(|(f, _)| f.context.clone()).collect();
    let none = Upstream {
        intention: None,
        disclosure: None,
        interpretation: None,
    };
    let ui: Vec<Upstream> = vec![none; data.len()];
    let yi: Vec<usize> = data.iter().map(|(_, y)| y.intention.index()).collect();
    let intention = train_stage(&ctx, &ui, &yi, &[], names::<IntentionLabel>(), cfg)?;

    let ud: Vec<Upstream> = upstream_labels
        .iter()
        .map(|u| Upstream {
            intention: Some(u.intention),
            ..none
        })
        .collect();
    let yd: Vec<usize> = data.iter().map(|(_, y)| y.disclosure.index()).collect();
    let disclosure = train_stage(&ctx, &ud, &yd, &IntentionLabel::indicators(), names::<DisclosureLabel>(), cfg)?;

    let mut resp = Vec::new();
    let mut ur = Vec::new();
    let mut ub = Vec::new();
    let mut yr = Vec::new();
    let mut yb = Vec::new();
    for ((f, y), u) in data.iter().zip(&upstream_labels) {
        for (k, bag) in f.responses.iter().enumerate() {
            resp.push(bag.clone());
            let base = Upstream {
                intention: Some(u.intention),
                disclosure: Some(u.disclosure),
                interpretation: None,
            };
            ur.push(base);
            ub.push(Upstream {
                interpretation: Some(u.per_response[k].interpretation),
                ..base
            });
            yr.push(y.per_response[k].interpretation.index());
            yb.push(y.per_response[k].strategy.index());
        }
    }
    let mut reserved_r = IntentionLabel::indicators();
    reserved_r.extend(DisclosureLabel::indicators());
    let interpretation = train_stage(&resp, &ur, &yr, &reserved_r, names::<InterpretationLabel>(), cfg)?;
    let mut reserved_b = reserved_r.clone();
    reserved_b.extend(InterpretationLabel::indicators());
    let strategy = train_stage(&resp, &ub, &yb, &reserved_b, names::<StrategyLabel>(), cfg)?;

    Ok(PipelineModel {
        intention,
        disclosure,
        interpretation,
        strategy,
    })
}

fn label<L: Label>(idx: usize) -> Result<L> {
    L::from_index(idx).ok_or_else(|| Error::Label(format!("{} index {idx} out of range", L::TASK)))
}

impl PipelineModel {
    /// Predicts I, then D from the predicted I, then per response R and B
    /// from the predicted upstream labels.
    pub fn predict(&self, f: &SnippetFeatures) -> Result<SnippetLabels> {
        let none = Upstream {
            intention: None,
            disclosure: None,
            interpretation: None,
        };
        let i: IntentionLabel = label(self.intention.predict(&f.context, &none)?)?;
        let d: DisclosureLabel = label(self.disclosure.predict(
            &f.context,
            &Upstream {
                intention: Some(i),
                ..none
            },
        )?)?;
        let mut per_response = Vec::with_capacity(f.responses.len());
        for bag in &f.responses {
            let base = Upstream {
                intention: Some(i),
                disclosure: Some(d),
                interpretation: None,
            };
            let r: InterpretationLabel = label(self.interpretation.predict(bag, &base)?)?;
            let b: StrategyLabel = label(self.strategy.predict(
                bag,
                &Upstream {
                    interpretation: Some(r),
                    ..base
                },
            )?)?;
            per_response.push(ResponseLabels {
                interpretation: r,
                strategy: b,
            });
        }
        Ok(SnippetLabels {
            intention: i,
            disclosure: d,
            per_response,
        })
    }
}
