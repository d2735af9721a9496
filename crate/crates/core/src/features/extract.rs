use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tokenize::{tokenize_with, Token};
use crate::lexicons::{sentiment_scores, LexiconSet};
use crate::snippets::{Comment, Snippet};
use crate::{Error, Result};

/// The four real-valued sentiment feature names, in vector order.
pub const SENTIMENT_FEATURES: [&str; 4] = [
    "senti:positive",
    "senti:neutral",
    "senti:negative",
    "senti:compound",
];

/// Prefix of parent-comment features in a context bag.
pub const CONTEXT_PREFIX: &str = "ctx:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSet {
    Basic,
    Enhanced,
}

impl std::str::FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(FeatureSet::Basic),
            "enhanced" => Ok(FeatureSet::Enhanced),
            _ => Err(Error::Config(format!("unknown feature set `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidecarToken {
    pub text: String,
    #[serde(default)]
    pub pos: Option<String>,
    #[serde(default)]
    pub lemma: Option<String>,
    #[serde(default)]
    pub sentence: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameArg {
    pub role: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub frame: String,
    pub target: String,
    #[serde(default)]
    pub args: Vec<FrameArg>,
}

/// Offline linguistic annotation of one comment: tokens with POS tags and
/// lemmas, and frame-semantic parses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidecarAnnotation {
    pub comment_id: String,
    #[serde(default)]
    pub tokens: Vec<SidecarToken>,
    #[serde(default)]
    pub frames: Vec<Frame>,
}

/// Sidecar annotations by comment id.
#[derive(Debug, Clone, Default)]
pub struct SidecarIndex {
    by_comment: HashMap<String, SidecarAnnotation>,
}

impl SidecarIndex {
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut index = SidecarIndex::default();
        index.extend_from(reader)?;
        Ok(index)
    }

    fn extend_from<R: BufRead>(&mut self, reader: R) -> Result<()> {
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Record {
                line: idx + 1,
                message: e.to_string(),
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let ann: SidecarAnnotation =
                serde_json::from_str(trimmed).map_err(|e| Error::Record {
                    line: idx + 1,
                    message: e.to_string(),
                })?;
            self.by_comment.insert(ann.comment_id.clone(), ann);
        }
        Ok(())
    }

    /// Loads one sidecar file, or every `*.jsonl` file of a directory in
    /// name order.
    pub fn load(path: &Path) -> Result<Self> {
        let mut files = Vec::new();
        if path.is_dir() {
            let entries = std::fs::read_dir(path).map_err(|e| Error::io(path, e))?;
            for entry in entries {
                let p = entry.map_err(|e| Error::io(path, e))?.path();
                if p.extension().is_some_and(|x| x == "jsonl") {
                    files.push(p);
                }
            }
            files.sort();
        } else {
            files.push(path.to_path_buf());
        }
        let mut index = SidecarIndex::default();
        for f in files {
            let file = File::open(&f).map_err(|e| Error::io(&f, e))?;
            index.extend_from(BufReader::new(file))?;
        }
        Ok(index)
    }

    pub fn insert(&mut self, ann: SidecarAnnotation) {
        self.by_comment.insert(ann.comment_id.clone(), ann);
    }

    pub fn get(&self, comment_id: &str) -> Option<&SidecarAnnotation> {
        self.by_comment.get(comment_id)
    }

    pub fn len(&self) -> usize {
        self.by_comment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_comment.is_empty()
    }
}

/// Named features of one comment (or of a suspect with its parent).
///
/// Names are `family:payload`. `notes` records feature families that were
/// disabled because their inputs were missing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureBag {
    pub features: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub notes: BTreeSet<String>,
}

impl FeatureBag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: impl Into<String>, value: f64) {
        self.features.insert(name.into(), value);
    }

    pub fn mark(&mut self, name: impl Into<String>) {
        self.set(name, 1.0);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.features.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.features.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.features.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.features.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// A copy with extra binary indicators.
    pub fn with_indicators<I, S>(&self, names: I) -> FeatureBag
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out = self.clone();
        for n in names {
            out.mark(n);
        }
        out
    }
}

pub fn is_real_valued(name: &str) -> bool {
    let base = name.strip_prefix(CONTEXT_PREFIX).unwrap_or(name);
    base.starts_with("senti:")
}

fn tokens_for(comment: &Comment, sidecar: Option<&SidecarAnnotation>, lex: &LexiconSet) -> Vec<Token> {
    match sidecar {
        Some(ann) if !ann.tokens.is_empty() => ann
            .tokens
            .iter()
            .map(|t| Token {
                text: t.text.clone(),
                lowered: t.text.to_lowercase(),
                pos: t.pos.clone(),
                lemma: t.lemma.as_ref().map(|l| l.to_lowercase()),
                sentence: t.sentence.unwrap_or(0),
            })
            .collect(),
        _ => {
            let emoticons: Vec<&str> = lex.emoticons.keys().map(String::as_str).collect();
            tokenize_with(&comment.body, &emoticons)
        }
    }
}

/// Contiguous matches of multi-token `entries` in `tokens`.
fn phrase_hits<'a>(tokens: &[&str], entries: impl Iterator<Item = &'a String>) -> Vec<&'a String> {
    entries
        .filter(|entry| {
            let parts: Vec<&str> = entry.split(' ').collect();
            !parts.is_empty()
                && parts.len() <= tokens.len()
                && tokens.windows(parts.len()).any(|w| w == parts.as_slice())
        })
        .collect()
}

fn phrase_payload(entry: &str) -> String {
    entry.replace(' ', "_")
}

/// Features of one comment.
///
/// Basic: unigrams, bigrams, lemmas (sidecar lemma, else the lowered token),
/// POS-conjoined n-grams (sidecar only), harmful-word and emotion hits.
/// Enhanced adds emoticons, the four sentiment scores, subjectivity-lexicon
/// tokens, swear hits, frame features (sidecar only) and politeness cues.
pub fn extract_features(
    comment: &Comment,
    sidecar: Option<&SidecarAnnotation>,
    lexicons: &LexiconSet,
    set: FeatureSet,
) -> FeatureBag {
    let tokens = tokens_for(comment, sidecar, lexicons);
    let mut bag = FeatureBag::new();
    let has_pos = tokens.iter().any(|t| t.pos.is_some());
    if !has_pos {
        bag.notes.insert("no-pos".into());
    }
    if sidecar.is_none() {
        bag.notes.insert("no-sidecar".into());
    }

    for t in &tokens {
        bag.mark(format!("uni:{}", t.lowered));
        let lemma = t.lemma.as_deref().unwrap_or(&t.lowered);
        bag.mark(format!("lemma:{lemma}"));
        if let Some(pos) = &t.pos {
            bag.mark(format!("unipos:{}/{pos}", t.lowered));
        }
        if lexicons.harmful_words.contains(&t.lowered) {
            bag.mark(format!("harm:{}", t.lowered));
        }
        for (emotion, lemmas) in &lexicons.emotion_lemmas {
            if lemmas.contains(lemma) || lemmas.contains(&t.lowered) {
                bag.mark(format!("emo:{emotion}"));
            }
        }
    }
    for w in tokens.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.sentence != b.sentence {
            continue;
        }
        bag.mark(format!("bi:{}_{}", a.lowered, b.lowered));
        if let (Some(pa), Some(pb)) = (&a.pos, &b.pos) {
            bag.mark(format!("bipos:{}/{pa}_{}/{pb}", a.lowered, b.lowered));
        }
    }

    if set == FeatureSet::Enhanced {
        for t in &tokens {
            if lexicons.emoticons.contains_key(&t.lowered) {
                bag.mark(format!("emoticon:{}", t.lowered));
            }
            if lexicons.subjectivity_entries.contains_key(&t.lowered) {
                bag.mark(format!("subj:{}", t.lowered));
            }
        }
        let s = sentiment_scores(&comment.body, lexicons);
        for (name, v) in SENTIMENT_FEATURES
            .iter()
            .zip([s.positive, s.neutral, s.negative, s.compound])
        {
            bag.set(*name, v);
        }

        let lowered: Vec<&str> = tokens.iter().map(|t| t.lowered.as_str()).collect();
        for hit in phrase_hits(&lowered, lexicons.swear_entries.iter()) {
            bag.mark(format!("swear:{}", phrase_payload(hit)));
        }
        for hit in phrase_hits(&lowered, lexicons.polite_cues.iter()) {
            bag.mark(format!("polite:{}", phrase_payload(hit)));
        }
        for hit in phrase_hits(&lowered, lexicons.impolite_cues.iter()) {
            bag.mark(format!("impolite:{}", phrase_payload(hit)));
        }

        match sidecar {
            Some(ann) => {
                for f in &ann.frames {
                    bag.mark(format!("frame:{}", f.frame));
                    bag.mark(format!("frametgt:{}:{}", f.frame, f.target.to_lowercase()));
                    for arg in &f.args {
                        bag.mark(format!("framearg:{}:{}", arg.role, arg.text.to_lowercase()));
                    }
                }
            }
            None => {
                bag.notes.insert("no-frames".into());
            }
        }
    }
    bag
}

/// Suspect features unchanged plus parent features under `ctx:`.
pub fn combine_context(suspect: &FeatureBag, parent: &FeatureBag) -> FeatureBag {
    let mut out = suspect.clone();
    for (name, v) in parent.iter() {
        out.set(format!("{CONTEXT_PREFIX}{name}"), v);
    }
    out.notes.extend(parent.notes.iter().map(|n| format!("{CONTEXT_PREFIX}{n}")));
    out
}

/// Feature bags of one snippet: the suspect⊕parent context and one bag per
/// response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnippetFeatures {
    pub snippet_id: String,
    pub context: FeatureBag,
    pub responses: Vec<FeatureBag>,
}

pub fn featurize_snippet(
    snippet: &Snippet,
    sidecars: Option<&SidecarIndex>,
    lexicons: &LexiconSet,
    set: FeatureSet,
) -> SnippetFeatures {
    let side = |c: &Comment| sidecars.and_then(|s| s.get(&c.id));
    let extract = |c: &Comment| extract_features(c, side(c), lexicons, set);
    SnippetFeatures {
        snippet_id: snippet.snippet_id.clone(),
        context: combine_context(&extract(&snippet.suspect), &extract(&snippet.parent)),
        responses: snippet.responses.iter().map(extract).collect(),
    }
}
