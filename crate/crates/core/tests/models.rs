use trollgraph::crf::{crf_dataset, train_crf, CrfTasks};
use trollgraph::eval::evaluate_labels;
use trollgraph::features::{FeatureSet, SnippetFeatures};
use trollgraph::lexicons::LexiconSet;
use trollgraph::models::{
    labeled_features, load_model, predict_all, save_model, train_hybrid, train_joint, train_model,
    train_pipeline, DownstreamFeatures, Model, ModelKind, ModelMeta, Predictor, TrainConfig, Upstream,
};
use trollgraph::snippets::{
    validate_labels, DisclosureLabel, IntentionLabel, InterpretationLabel, Label, SnippetLabels,
    Task,
};
use trollgraph::synth::{planted_dataset, strategy_follows_interpretation, SynthConfig};

fn planted(n: usize) -> Vec<(SnippetFeatures, SnippetLabels)> {
    let cfg = SynthConfig {
        snippets: n,
        ..Default::default()
    };
    labeled_features(&planted_dataset(&cfg), None, &LexiconSet::bundled(), FeatureSet::Basic).unwrap()
}

fn split(data: &[(SnippetFeatures, SnippetLabels)]) -> (Vec<SnippetFeatures>, Vec<SnippetLabels>) {
    data.iter().cloned().unzip()
}

fn accuracy(model: &dyn Predictor, data: &[(SnippetFeatures, SnippetLabels)]) -> Vec<f64> {
    let (f, y) = split(data);
    let pred = predict_all(model, &f).unwrap();
    for (p, (feat, _)) in pred.iter().zip(data) {
        assert_eq!(p.per_response.len(), feat.responses.len());
    }
    evaluate_labels(&y, &pred).unwrap().iter().map(|m| m.accuracy).collect()
}

#[test]
fn pipeline_fits_planted_data_and_has_indicator_features() {
    let data = planted(60);
    let cfg = TrainConfig::default();
    let model = train_pipeline(&data, &cfg).unwrap();
    let acc = accuracy(&model, &data);
    assert_eq!(acc[0], 1.0);
    assert_eq!(acc[1], 1.0);
    assert!(model.strategy.vocabulary.contains("task:r:trolling"));
    assert!(model.strategy.vocabulary.contains("task:i:none"));
    assert!(!model.intention.vocabulary.names().any(|n| n.starts_with("task:")));

    let (_, labels) = split(&data);
    let responses: usize = labels.iter().map(|l| l.per_response.len()).sum();
    let m = evaluate_labels(&labels, &labels).unwrap();
    assert_eq!(m[0].instances, data.len());
    assert_eq!(m[2].instances, responses);
}

#[test]
fn forcing_intention_changes_strategy_vector_only_at_intention_indicators() {
    let data = planted(30);
    let model = train_pipeline(&data, &TrainConfig::default()).unwrap();
    let bag = &data[0].0.responses[0];
    let stage = &model.strategy;
    let base = Upstream {
        intention: Some(IntentionLabel::None),
        disclosure: Some(DisclosureLabel::None),
        interpretation: Some(InterpretationLabel::Trolling),
    };
    let flipped = Upstream {
        intention: Some(IntentionLabel::Trolling),
        ..base
    };
    let a = stage.vector(bag, &base);
    let b = stage.vector(bag, &flipped);
    let dense = |v: &trollgraph::features::SparseVector| {
        let mut d = vec![0.0; v.dim()];
        v.axpy(1.0, &mut d);
        d
    };
    let (da, db) = (dense(&a), dense(&b));
    let changed: Vec<&str> = (0..da.len())
        .filter(|&j| da[j] != db[j])
        .map(|j| stage.vocabulary.name(j).unwrap())
        .collect();
    assert_eq!(changed, ["task:i:none", "task:i:trolling"]);
}

#[test]
fn zero_weight_models_predict_lowest_labels() {
    let data = planted(20);
    let mut pipeline = train_pipeline(&data, &TrainConfig::default()).unwrap();
    for s in [
        &mut pipeline.intention,
        &mut pipeline.disclosure,
        &mut pipeline.interpretation,
        &mut pipeline.strategy,
    ] {
        s.weights.weights.iter_mut().for_each(|w| *w = 0.0);
        s.weights.bias.iter_mut().for_each(|w| *w = 0.0);
    }
    let mut hybrid = train_hybrid(&data, &TrainConfig::default()).unwrap();
    let layout = hybrid.params.layout();
    hybrid.params = trollgraph::crf::CrfParams::from_flat(&layout, &vec![0.0; layout.len]).unwrap();
    hybrid.strategy.weights.weights.iter_mut().for_each(|w| *w = 0.0);
    hybrid.strategy.weights.bias.iter_mut().for_each(|w| *w = 0.0);
    for (f, _) in &data {
        let lowest = SnippetLabels::lowest(f.responses.len());
        assert_eq!(pipeline.predict(f).unwrap(), lowest);
        assert_eq!(hybrid.predict(f).unwrap(), lowest);
    }
}

#[test]
fn zeroed_indicator_weights_make_stages_independent() {
    let data = planted(30);
    let mut model = train_pipeline(&data, &TrainConfig::default()).unwrap();
    for s in [&mut model.disclosure, &mut model.interpretation, &mut model.strategy] {
        let dim = s.weights.dim;
        for j in 0..dim {
            if s.vocabulary.name(j).unwrap().starts_with("task:") {
                for k in 0..s.weights.n_labels() {
                    s.weights.weights[k * dim + j] = 0.0;
                }
            }
        }
    }
    let none = Upstream {
        intention: None,
        disclosure: None,
        interpretation: None,
    };
    let independent = |stage: &trollgraph::models::Stage, bag| {
        trollgraph::optim::predict_logreg(&stage.weights, &stage.vector(bag, &none)).unwrap().0
    };
    for (f, _) in &data {
        let p = model.predict(f).unwrap();
        assert_eq!(p.intention.index(), independent(&model.intention, &f.context));
        assert_eq!(p.disclosure.index(), independent(&model.disclosure, &f.context));
        for (r, bag) in p.per_response.iter().zip(&f.responses) {
            assert_eq!(r.interpretation.index(), independent(&model.interpretation, bag));
            assert_eq!(r.strategy.index(), independent(&model.strategy, bag));
        }
    }
}

#[test]
fn hybrid_crf_is_the_three_task_crf_and_retrains_identically() {
    let data = planted(40);
    let cfg = TrainConfig::default();
    let hybrid = train_hybrid(&data, &cfg).unwrap();
    let (feats, labels) = split(&data);
    let instances = feats.iter().map(|f| hybrid.vocabularies.instance(f)).collect();
    let direct = train_crf(&crf_dataset(instances, &labels, CrfTasks::Idr).unwrap(), cfg.l2, &cfg.optim, CrfTasks::Idr).unwrap();
    assert_eq!(hybrid.params, direct);
    assert!(hybrid.params.strategy.is_none() && hybrid.params.t_rb.is_none());
    for family in ["task:i:", "task:d:", "task:r:"] {
        assert!(hybrid.strategy.vocabulary.names().any(|n| n.starts_with(family)));
    }
    assert_eq!(train_hybrid(&data, &cfg).unwrap(), hybrid);

    for (f, _) in &data {
        let p = hybrid.predict(f).unwrap();
        let idr = trollgraph::crf::predict_crf(&hybrid.params, &hybrid.vocabularies.instance(f), cfg.decoding).unwrap();
        assert_eq!(p.intention.index(), idr.i);
        assert_eq!(p.disclosure.index(), idr.d);
        assert_eq!(p.per_response.iter().map(|r| r.interpretation.index()).collect::<Vec<_>>(), idr.r);
    }
}

#[test]
fn hybrid_strategy_accuracy_tracks_interpretation_when_strategy_follows() {
    let records = strategy_follows_interpretation(
        &SynthConfig {
            snippets: 150,
            seed: 3,
            ..Default::default()
        },
        0.15,
    );
    let data = labeled_features(&records, None, &LexiconSet::bundled(), FeatureSet::Basic).unwrap();
    let (train, test) = data.split_at(100);
    let model = train_hybrid(train, &TrainConfig::default()).unwrap();
    let acc = accuracy(&model, test);
    let (r, b) = (acc[2], acc[3]);
    assert!(r < 1.0, "noise should cause some interpretation errors");
    assert_eq!(r, b);
}

#[test]
fn joint_fits_planted_data() {
    let data = planted(60);
    let model = train_joint(&data, &TrainConfig::default()).unwrap();
    for a in accuracy(&model, &data) {
        assert!(a >= 0.99, "{a}");
    }
}

#[test]
fn cross_val_predicted_upstream_trains() {
    let data = planted(40);
    let cfg = TrainConfig {
        downstream_features: DownstreamFeatures::CrossValPredicted,
        ..Default::default()
    };
    for kind in [ModelKind::Baseline, ModelKind::Hybrid] {
        let m = train_model(kind, &data, &cfg).unwrap();
        for (f, _) in &data {
            let (snippet, labels) = (f, m.predict(f).unwrap());
            assert_eq!(labels.per_response.len(), snippet.responses.len());
        }
    }
}

#[test]
fn model_files_round_trip_with_identical_predictions() {
    let data = planted(30);
    let dir = tempfile::tempdir().unwrap();
    let meta = ModelMeta {
        feature_set: FeatureSet::Basic,
        l2: 0.1,
        min_count: 1,
        downstream_features: DownstreamFeatures::Gold,
    };
    for kind in ModelKind::ALL {
        let model = train_model(kind, &data, &TrainConfig::default()).unwrap();
        let path = dir.path().join(format!("{kind}.json"));
        save_model(&path, Some("#trollgraph v0 seed=0 cmd=train"), &model, &meta).unwrap();
        let (back, back_meta) = load_model(&path).unwrap();
        assert_eq!(back, model, "{kind}");
        assert_eq!(back_meta, meta);
        let (f, _) = split(&data);
        assert_eq!(predict_all(&back, &f).unwrap(), predict_all(&model, &f).unwrap());
        let text = std::fs::read_to_string(&path).unwrap();
        if let Model::Joint(_) = model {
            for block in ["W_I", "W_D", "W_R", "W_B", "T_IR", "T_DR", "T_RB"] {
                assert!(text.contains(&format!("\"{block}\"")), "{block}");
            }
        }
    }
}

#[test]
fn predictions_pass_structural_validation() {
    let cfg = SynthConfig {
        snippets: 20,
        ..Default::default()
    };
    let records = planted_dataset(&cfg);
    let data = labeled_features(&records, None, &LexiconSet::bundled(), FeatureSet::Enhanced).unwrap();
    for kind in ModelKind::ALL {
        let m = train_model(kind, &data, &TrainConfig::default()).unwrap();
        for (rec, (f, _)) in records.iter().zip(&data) {
            let p = m.predict(f).unwrap();
            let v = validate_labels(&rec.snippet(), &p);
            assert!(
                !v.iter().any(|x| matches!(x, trollgraph::snippets::Violation::ResponseCount { .. })),
                "{kind}"
            );
        }
    }
    assert_eq!(Task::ALL.len(), 4);
    let _ = InterpretationLabel::COUNT;
}
