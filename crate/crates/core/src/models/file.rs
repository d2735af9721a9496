use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CrfVocabularies, DownstreamFeatures, HybridModel, JointModel, Model, ModelKind, PipelineModel, Stage};
use crate::crf::{CrfParams, CrfTasks, Decoding, NB, ND, NI, NR};
use crate::features::{FeatureSet, Vocabulary};
use crate::optim::LogRegWeights;
use crate::snippets::Task;
use crate::{Error, Result};

pub const FORMAT: &str = "trollgraph-model";
pub const FORMAT_VERSION: u32 = 1;

/// Training settings recorded with a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub feature_set: FeatureSet,
    pub l2: f64,
    pub min_count: usize,
    pub downstream_features: DownstreamFeatures,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Block {
    Unary(LogRegWeights),
    Table(Vec<Vec<f64>>),
}

/// On-disk model: named weight blocks, vocabularies and label orderings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub kind: ModelKind,
    #[serde(flatten)]
    pub meta: ModelMeta,
    pub decoding: Option<Decoding>,
    /// Tasks of the CRF part, or all four for the pipeline.
    pub tasks: Vec<String>,
    pub labels: BTreeMap<String, Vec<String>>,
    pub vocabularies: BTreeMap<String, Vocabulary>,
    blocks: BTreeMap<String, Block>,
}

fn table<const R: usize, const C: usize>(t: &[[f64; C]; R]) -> Block {
    Block::Table(t.iter().map(|row| row.to_vec()).collect())
}

fn from_table<const R: usize, const C: usize>(name: &str, b: Option<&Block>) -> Result<[[f64; C]; R]> {
    let Some(Block::Table(rows)) = b else {
        return Err(Error::ModelFile(format!("missing table {name}")));
    };
    if rows.len() != R || rows.iter().any(|r| r.len() != C) {
        return Err(Error::ModelFile(format!("table {name} is not {R}×{C}")));
    }
    let mut t = [[0.0; C]; R];
    for (dst, src) in t.iter_mut().zip(rows) {
        dst.copy_from_slice(src);
    }
    Ok(t)
}

fn unary(name: &str, b: Option<&Block>) -> Result<LogRegWeights> {
    match b {
        Some(Block::Unary(w)) => {
            let k = w.labels.len();
            if k == 0 || w.bias.len() != k || w.weights.len() != k * w.dim {
                return Err(Error::ModelFile(format!("block {name} has the wrong shape")));
            }
            Ok(w.clone())
        }
        _ => Err(Error::ModelFile(format!("missing block {name}"))),
    }
}

fn vocab(file: &ModelFile, name: &str) -> Result<Vocabulary> {
    file.vocabularies
        .get(name)
        .cloned()
        .ok_or_else(|| Error::ModelFile(format!("missing vocabulary `{name}`")))
}

fn crf_blocks(p: &CrfParams, blocks: &mut BTreeMap<String, Block>) {
    blocks.insert("W_I".into(), Block::Unary(p.intention.clone()));
    blocks.insert("W_D".into(), Block::Unary(p.disclosure.clone()));
    blocks.insert("W_R".into(), Block::Unary(p.interpretation.clone()));
    if let Some(w) = &p.strategy {
        blocks.insert("W_B".into(), Block::Unary(w.clone()));
    }
    blocks.insert("T_IR".into(), table(&p.t_ir));
    blocks.insert("T_DR".into(), table(&p.t_dr));
    if let Some(t) = &p.t_rb {
        blocks.insert("T_RB".into(), table(t));
    }
}

fn crf_from_blocks(file: &ModelFile, tasks: CrfTasks) -> Result<CrfParams> {
    let b = |n: &str| file.blocks.get(n);
    let all = tasks.has_strategy();
    let params = CrfParams {
        tasks,
        intention: unary("W_I", b("W_I"))?,
        disclosure: unary("W_D", b("W_D"))?,
        interpretation: unary("W_R", b("W_R"))?,
        strategy: if all { Some(unary("W_B", b("W_B"))?) } else { None },
        t_ir: from_table::<NI, NR>("T_IR", b("T_IR"))?,
        t_dr: from_table::<ND, NR>("T_DR", b("T_DR"))?,
        t_rb: if all { Some(from_table::<NR, NB>("T_RB", b("T_RB"))?) } else { None },
    };
    params.validate()?;
    Ok(params)
}

fn task_letters(tasks: &[&str]) -> Vec<String> {
    tasks.iter().map(|s| s.to_string()).collect()
}

impl ModelFile {
    pub fn from_model(model: &Model, meta: &ModelMeta) -> Self {
        let mut vocabularies = BTreeMap::new();
        let mut blocks = BTreeMap::new();
        let (tasks, decoding) = match model {
            Model::Pipeline(m) => {
                for (letter, stage) in [
                    ("I", &m.intention),
                    ("D", &m.disclosure),
                    ("R", &m.interpretation),
                    ("B", &m.strategy),
                ] {
                    vocabularies.insert(letter.to_string(), stage.vocabulary.clone());
                    blocks.insert(format!("W_{letter}"), Block::Unary(stage.weights.clone()));
                }
                (task_letters(CrfTasks::All.letters()), None)
            }
            Model::Joint(m) => {
                vocabularies.insert("context".into(), m.vocabularies.context.clone());
                vocabularies.insert("response".into(), m.vocabularies.response.clone());
                crf_blocks(&m.params, &mut blocks);
                (task_letters(m.params.tasks.letters()), Some(m.decoding))
            }
            Model::Hybrid(m) => {
                vocabularies.insert("context".into(), m.vocabularies.context.clone());
                vocabularies.insert("response".into(), m.vocabularies.response.clone());
                vocabularies.insert("B".into(), m.strategy.vocabulary.clone());
                crf_blocks(&m.params, &mut blocks);
                blocks.insert("W_B".into(), Block::Unary(m.strategy.weights.clone()));
                (task_letters(m.params.tasks.letters()), Some(m.decoding))
            }
        };
        let labels = Task::ALL
            .iter()
            .map(|t| {
                (
                    t.short().to_string(),
                    t.class_names().iter().map(|s| s.to_string()).collect(),
                )
            })
            .collect();
        ModelFile {
            format: FORMAT.into(),
            version: FORMAT_VERSION,
            kind: model.kind(),
            meta: meta.clone(),
            decoding,
            tasks,
            labels,
            vocabularies,
            blocks,
        }
    }

    pub fn into_model(self) -> Result<(Model, ModelMeta)> {
        if self.format != FORMAT {
            return Err(Error::ModelFile(format!("not a model file (format `{}`)", self.format)));
        }
        if self.version != FORMAT_VERSION {
            return Err(Error::ModelFile(format!("unsupported model version {}", self.version)));
        }
        for t in Task::ALL {
            let want: Vec<&str> = t.class_names();
            let have = self.labels.get(t.short()).map(|v| v.iter().map(String::as_str).collect::<Vec<_>>());
            if have.as_deref() != Some(want.as_slice()) {
                return Err(Error::ModelFile(format!("label ordering for {} does not match", t.short())));
            }
        }
        let b = |n: &str| self.blocks.get(n);
        let model = match self.kind {
            ModelKind::Baseline => {
                let stage = |letter: &str| -> Result<Stage> {
                    let vocabulary = vocab(&self, letter)?;
                    let weights = unary(&format!("W_{letter}"), b(&format!("W_{letter}")))?;
                    if weights.dim != vocabulary.dimension() {
                        return Err(Error::ModelFile(format!("W_{letter} does not match its vocabulary")));
                    }
                    Ok(Stage { vocabulary, weights })
                };
                Model::Pipeline(PipelineModel {
                    intention: stage("I")?,
                    disclosure: stage("D")?,
                    interpretation: stage("R")?,
                    strategy: stage("B")?,
                })
            }
            ModelKind::Joint | ModelKind::Hybrid => {
                let tasks = if self.kind == ModelKind::Joint {
                    CrfTasks::All
                } else {
                    CrfTasks::Idr
                };
                if self.tasks != task_letters(tasks.letters()) {
                    return Err(Error::ModelFile(format!("task set {:?} does not fit a {} model", self.tasks, self.kind)));
                }
                let vocabularies = CrfVocabularies {
                    context: vocab(&self, "context")?,
                    response: vocab(&self, "response")?,
                };
                let params = if tasks == CrfTasks::All {
                    crf_from_blocks(&self, tasks)?
                } else {
                    // The hybrid's W_B block belongs to its classifier.
                    let mut idr = self.clone();
                    idr.blocks.remove("W_B");
                    crf_from_blocks(&idr, tasks)?
                };
                if params.dim_ctx() != vocabularies.context.dimension()
                    || params.dim_resp() != vocabularies.response.dimension()
                {
                    return Err(Error::ModelFile("CRF blocks do not match the vocabularies".into()));
                }
                let decoding = self.decoding.unwrap_or_default();
                if tasks == CrfTasks::All {
                    Model::Joint(JointModel {
                        vocabularies,
                        params,
                        decoding,
                    })
                } else {
                    let vocabulary = vocab(&self, "B")?;
                    let weights = unary("W_B", b("W_B"))?;
                    if weights.dim != vocabulary.dimension() {
                        return Err(Error::ModelFile("W_B does not match its vocabulary".into()));
                    }
                    Model::Hybrid(HybridModel {
                        vocabularies,
                        params,
                        strategy: Stage { vocabulary, weights },
                        decoding,
                    })
                }
            }
        };
        Ok((model, self.meta))
    }
}

/// Writes an optional header line and the model as one JSON document.
pub fn write_model<W: Write>(mut w: W, header: Option<&str>, model: &Model, meta: &ModelMeta) -> Result<()> {
    let file = ModelFile::from_model(model, meta);
    let io = |e| Error::io(Path::new("<model>"), e);
    if let Some(h) = header {
        writeln!(w, "{h}").map_err(io)?;
    }
    serde_json::to_writer_pretty(&mut w, &file)?;
    writeln!(w).map_err(io)?;
    Ok(())
}

pub fn read_model<R: BufRead>(reader: R) -> Result<(Model, ModelMeta)> {
    let mut body = String::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(Path::new("<model>"), e))?;
        if body.is_empty() && line.starts_with('#') {
            continue;
        }
        body.push_str(&line);
        body.push('\n');
    }
    let file: ModelFile = serde_json::from_str(&body).map_err(|e| Error::ModelFile(e.to_string()))?;
    file.into_model()
}

pub fn save_model(path: &Path, header: Option<&str>, model: &Model, meta: &ModelMeta) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(f);
    write_model(&mut w, header, model, meta)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<(Model, ModelMeta)> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(std::io::BufReader::new(f))
}
