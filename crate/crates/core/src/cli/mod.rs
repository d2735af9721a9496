//! The `trollgraph` command line.

mod config;
mod selfcheck;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

pub use config::{CvSettings, Paths, RunConfig};
pub use selfcheck::{selfcheck, SelfCheck, GRADIENT_TOLERANCE, INFERENCE_TOLERANCE};

use crate::eval::{fleiss_kappa, read_annotations, report, run_cv, REFERENCE_KAPPA, SHARE_THRESHOLD};
use crate::features::{FeatureSet, SidecarIndex, SnippetFeatures};
use crate::lexicons::{load_lexicons, LexiconSet};
use crate::models::{
    featurize_records, labeled_features, load_model, predict_all, save_model, train_model, write_predictions,
    ModelKind, ModelMeta, PredictionRecord,
};
use crate::snippets::{
    build_trees, mine_snippets, parse_comment_dump, read_snippets, read_snippets_from, write_snippets, Comment,
    SnippetLabels, SnippetRecord,
};
use crate::{artifact_header, synth, Error, Result};

#[derive(Debug, Parser)]
#[command(name = "trollgraph", version, about = "Trolling event analysis over forum snippets")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// basic or enhanced
    #[arg(long, global = true)]
    pub features: Option<FeatureSet>,
    /// baseline, joint or hybrid
    #[arg(long, global = true)]
    pub model: Option<ModelKind>,
    #[arg(long, global = true, value_name = "STR")]
    pub keyword: Option<String>,
    #[arg(long, global = true, value_name = "N")]
    pub max_edit: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Lexicon directory; the bundled lexicons are used otherwise.
    #[arg(long, global = true, value_name = "DIR")]
    pub lexicons: Option<PathBuf>,
    /// Sidecar annotation file or directory (enhanced features).
    #[arg(long, global = true, value_name = "PATH")]
    pub sidecars: Option<PathBuf>,
    /// Model file to write (train) or read (predict).
    #[arg(long, global = true, value_name = "PATH")]
    pub model_file: Option<PathBuf>,
}

/// Snippet input shared by the modelling subcommands.
#[derive(Debug, Args)]
pub struct SnippetInput {
    /// Snippet JSONL file.
    pub input: Option<PathBuf>,
    /// Use the bundled synthetic snippets.
    #[arg(long, conflicts_with = "input")]
    pub synthetic: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Comment dump to conversation trees (trees.jsonl).
    Ingest {
        dump: Option<PathBuf>,
        /// Abort on the first malformed record.
        #[arg(long)]
        strict: bool,
    },
    /// Conversation trees to snippets (snippets.jsonl).
    Mine { trees: Option<PathBuf> },
    /// Snippets to feature bags (features.jsonl).
    Featurize(SnippetInput),
    /// Train one model on labeled snippets (model.json).
    Train(SnippetInput),
    /// Predict labels with a trained model (predictions.jsonl).
    Predict(SnippetInput),
    /// Tune and cross-validate a model (report.txt, report.jsonl).
    Evaluate(SnippetInput),
    /// Fleiss' kappa per aspect of an annotation file (kappa.txt).
    Kappa { annotations: Option<PathBuf> },
    /// Check exact inference against enumeration and gradients against
    /// finite differences.
    Selfcheck {
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest { .. } => "ingest",
            Command::Mine { .. } => "mine",
            Command::Featurize(_) => "featurize",
            Command::Train(_) => "train",
            Command::Predict(_) => "predict",
            Command::Evaluate(_) => "evaluate",
            Command::Kappa { .. } => "kappa",
            Command::Selfcheck { .. } => "selfcheck",
        }
    }
}

pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Exit status for an error: configuration problems are usage errors.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

/// Parses arguments, runs, and returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// The config file (if any) with flag overrides applied, validated.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let g = &cli.global;
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = g.threads {
        cfg.threads = v;
    }
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    if let Some(v) = g.features {
        cfg.features = v;
    }
    if let Some(v) = g.model {
        cfg.model = v;
    }
    if let Some(v) = &g.keyword {
        cfg.keyword = v.clone();
    }
    if let Some(v) = g.max_edit {
        cfg.max_edit = v;
    }
    if let Some(v) = &g.out {
        cfg.paths.out = v.clone();
    }
    if let Some(v) = &g.lexicons {
        cfg.paths.lexicon_dir = Some(v.clone());
    }
    if let Some(v) = &g.sidecars {
        cfg.paths.sidecar_dir = Some(v.clone());
    }
    if let Some(v) = &g.model_file {
        cfg.paths.model = Some(v.clone());
    }
    match &cli.command {
        Command::Ingest { dump, strict } => {
            set_if(&mut cfg.paths.dump, dump);
            cfg.strict |= strict;
        }
        Command::Mine { trees } => set_if(&mut cfg.paths.trees, trees),
        Command::Featurize(s) | Command::Train(s) | Command::Predict(s) | Command::Evaluate(s) => {
            set_if(&mut cfg.paths.snippets, &s.input)
        }
        Command::Kappa { annotations } => set_if(&mut cfg.paths.annotations, annotations),
        Command::Selfcheck { .. } => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn set_if(slot: &mut Option<PathBuf>, value: &Option<PathBuf>) {
    if value.is_some() {
        slot.clone_from(value);
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = resolve_config(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let ctx = Context {
        header: artifact_header(cfg.seed, cli.command.name()),
        cfg,
    };
    pool.install(|| match &cli.command {
        Command::Ingest { .. } => ctx.ingest(),
        Command::Mine { .. } => ctx.mine(),
        Command::Featurize(s) => ctx.featurize(s.synthetic),
        Command::Train(s) => ctx.train(s.synthetic),
        Command::Predict(s) => ctx.predict(s.synthetic),
        Command::Evaluate(s) => ctx.evaluate(s.synthetic),
        Command::Kappa { .. } => ctx.kappa(),
        Command::Selfcheck { trials } => ctx.selfcheck(*trials),
    })
}

/// One line of trees.jsonl.
#[derive(Debug, Serialize, Deserialize)]
struct TreeRecord {
    thread_id: String,
    /// Pre-order.
    comments: Vec<Comment>,
}

/// One line of features.jsonl.
#[derive(Debug, Serialize)]
struct FeatureRecord<'a> {
    #[serde(flatten)]
    features: &'a SnippetFeatures,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<&'a SnippetLabels>,
}

struct Context {
    cfg: RunConfig,
    header: String,
}

fn required<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::Config(format!("no {what} given (pass a path or set it in the config)")))
}

fn lines_of(path: &Path) -> Result<impl Iterator<Item = Result<(usize, String)>> + use<>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let path = path.to_path_buf();
    Ok(BufReader::new(file)
        .lines()
        .enumerate()
        .map(move |(n, l)| l.map(|l| (n + 1, l)).map_err(|e| Error::io(&path, e))))
}

impl Context {
    fn out_path(&self, name: &str) -> Result<PathBuf> {
        let dir = &self.cfg.paths.out;
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(dir.join(name))
    }

    /// Writes `body` after the artifact header.
    fn write_artifact(&self, path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "{}", self.header)
            .and_then(|_| body(&mut w))
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }

    /// Input snippets: the bundled synthetic set, the given file, or
    /// snippets.jsonl in the output directory.
    fn snippets(&self, synthetic: bool) -> Result<Vec<SnippetRecord>> {
        if synthetic {
            return read_snippets_from(synth::BUNDLED_SNIPPETS.as_bytes());
        }
        let fallback = self.cfg.paths.out.join("snippets.jsonl");
        let path = match &self.cfg.paths.snippets {
            Some(p) => p.clone(),
            None if fallback.exists() => fallback,
            None => return Err(Error::Config("no snippet file given".into())),
        };
        read_snippets(&path)
    }

    fn lexicons(&self) -> Result<LexiconSet> {
        match &self.cfg.paths.lexicon_dir {
            Some(dir) => load_lexicons(dir),
            None => Ok(LexiconSet::bundled()),
        }
    }

    fn sidecars(&self) -> Result<Option<SidecarIndex>> {
        self.cfg.paths.sidecar_dir.as_deref().map(SidecarIndex::load).transpose()
    }

    fn labeled(&self, synthetic: bool, set: FeatureSet) -> Result<Vec<(SnippetFeatures, SnippetLabels)>> {
        let records = self.snippets(synthetic)?;
        labeled_features(&records, self.sidecars()?.as_ref(), &self.lexicons()?, set)
    }

    fn model_path(&self) -> Result<PathBuf> {
        match &self.cfg.paths.model {
            Some(p) => Ok(p.clone()),
            None => self.out_path("model.json"),
        }
    }

    fn ingest(&self) -> Result<()> {
        let path = required(&self.cfg.paths.dump, "dump")?;
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let parsed = parse_comment_dump(BufReader::new(file), self.cfg.strict)?;
        for e in &parsed.errors {
            eprintln!("warning: {}:{}: {}", path.display(), e.line, e.message);
        }
        let trees = build_trees(parsed.comments)?;
        eprintln!(
            "{} trees, {} malformed records, {} deleted",
            trees.len(),
            parsed.errors.len(),
            parsed.deleted
        );
        let out = self.out_path("trees.jsonl")?;
        self.write_artifact(&out, |w| {
            for t in &trees {
                let rec = TreeRecord {
                    thread_id: t.thread_id.clone(),
                    comments: t.preorder().into_iter().cloned().collect(),
                };
                serde_json::to_writer(&mut *w, &rec)?;
                writeln!(w)?;
            }
            Ok(())
        })
    }

    fn mine(&self) -> Result<()> {
        let fallback = self.cfg.paths.out.join("trees.jsonl");
        let path = match &self.cfg.paths.trees {
            Some(p) => p.clone(),
            None if fallback.exists() => fallback,
            None => return Err(Error::Config("no trees file given".into())),
        };
        let mut comments = Vec::new();
        for line in lines_of(&path)? {
            let (n, line) = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let rec: TreeRecord = serde_json::from_str(t).map_err(|e| Error::Record {
                line: n,
                message: e.to_string(),
            })?;
            comments.extend(rec.comments);
        }
        let trees = build_trees(comments)?;
        let (snippets, summary) = mine_snippets(&trees, &self.cfg.keyword, self.cfg.max_edit);
        eprintln!("{}", serde_json::to_string(&summary)?);
        let records: Vec<SnippetRecord> = snippets.into_iter().map(|s| SnippetRecord::new(s, None)).collect();
        let out = self.out_path("snippets.jsonl")?;
        self.write_artifact(&out, |w| write_snippets(w, None, &records))
    }

    fn featurize(&self, synthetic: bool) -> Result<()> {
        let records = self.snippets(synthetic)?;
        let feats = featurize_records(&records, self.sidecars()?.as_ref(), &self.lexicons()?, self.cfg.features);
        let out = self.out_path("features.jsonl")?;
        self.write_artifact(&out, |w| {
            for (r, f) in records.iter().zip(&feats) {
                let rec = FeatureRecord {
                    features: f,
                    labels: r.labels.as_ref(),
                };
                serde_json::to_writer(&mut *w, &rec)?;
                writeln!(w)?;
            }
            Ok(())
        })
    }

    fn train(&self, synthetic: bool) -> Result<()> {
        let data = self.labeled(synthetic, self.cfg.features)?;
        let tc = self.cfg.train_config();
        let model = train_model(self.cfg.model, &data, &tc)?;
        let meta = ModelMeta {
            feature_set: self.cfg.features,
            l2: tc.l2,
            min_count: tc.min_count,
            downstream_features: tc.downstream_features,
        };
        let path = self.model_path()?;
        save_model(&path, Some(&self.header), &model, &meta)?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }

    fn predict(&self, synthetic: bool) -> Result<()> {
        let (model, meta) = load_model(&self.model_path()?)?;
        let records = self.snippets(synthetic)?;
        let feats = featurize_records(&records, self.sidecars()?.as_ref(), &self.lexicons()?, meta.feature_set);
        let preds = predict_all(&model, &feats)?;
        let out: Vec<PredictionRecord> = feats
            .iter()
            .zip(preds)
            .map(|(f, labels)| PredictionRecord {
                snippet_id: f.snippet_id.clone(),
                labels,
            })
            .collect();
        let path = self.out_path("predictions.jsonl")?;
        self.write_artifact(&path, |w| write_predictions(w, None, &out))
    }

    fn evaluate(&self, synthetic: bool) -> Result<()> {
        let data = self.labeled(synthetic, self.cfg.features)?;
        let cv = self.cfg.cv_config();
        let outcome = run_cv(self.cfg.model, &data, &cv)?;
        let features = match self.cfg.features {
            FeatureSet::Basic => "basic",
            FeatureSet::Enhanced => "enhanced",
        };
        let mut preamble = vec![
            format!("snippets: {}  folds: {}  tune fold: {}", data.len(), cv.k, cv.tune_fold),
            format!("fold sizes: {:?}", outcome.plan.sizes()),
        ];
        for p in &outcome.tuning {
            preamble.push(format!("tune l2={} min_count={} score={:.4}", p.l2, p.min_count, p.score));
        }
        preamble.push(format!("chosen l2={} min_count={}", outcome.chosen.l2, outcome.chosen.min_count));
        for m in &outcome.metrics {
            preamble.push(format!("{} accuracy {:.4} over {}", m.task.name(), m.accuracy, m.instances));
        }
        let rep = report(self.cfg.model.name(), features, &outcome.metrics, &outcome.distribution, SHARE_THRESHOLD)
            .with_preamble(preamble);
        let text = self.out_path("report.txt")?;
        self.write_artifact(&text, |w| w.write_all(rep.render_text().as_bytes()))?;
        let jsonl = self.out_path("report.jsonl")?;
        self.write_artifact(&jsonl, |w| w.write_all(rep.render_jsonl().as_bytes()))
    }

    fn kappa(&self) -> Result<()> {
        let path = required(&self.cfg.paths.annotations, "annotation file")?;
        let tables = read_annotations(path)?;
        let mut text = String::new();
        for t in &tables {
            let k = fleiss_kappa(t)?;
            let reference = REFERENCE_KAPPA
                .iter()
                .find(|(a, _)| a.eq_ignore_ascii_case(&t.aspect))
                .map_or(String::new(), |(_, r)| format!("  (reference {r:.3})"));
            text.push_str(&format!(
                "{:<16} kappa={:.4}  items={} raters={}{reference}\n",
                t.aspect,
                k,
                t.items.len(),
                t.raters
            ));
        }
        print!("{text}");
        let out = self.out_path("kappa.txt")?;
        self.write_artifact(&out, |w| w.write_all(text.as_bytes()))
    }

    fn selfcheck(&self, trials: usize) -> Result<()> {
        let r = selfcheck(self.cfg.seed, trials);
        println!("{}", self.header);
        println!("max inference deviation: {:.3e} over {} graphs", r.max_inference_deviation, r.trials);
        println!("MAP mismatches: {}", r.map_mismatches);
        println!("CRF gradient relative error: {:.3e}", r.crf_gradient_error);
        println!("logreg gradient relative error: {:.3e}", r.logreg_gradient_error);
        if r.passed() {
            println!("PASS");
            Ok(())
        } else {
            println!("FAIL");
            Err(Error::Data("self-check failed".into()))
        }
    }
}
