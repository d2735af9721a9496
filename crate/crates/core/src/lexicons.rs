//! Dictionary resources behind the basic and enhanced feature sets, and a
//! valence-sum sentiment scorer.
//!
//! A lexicon directory holds:
//!
//! ```text
//! harmful.txt                 one word per line
//! swear.txt                   one word or short phrase per line
//! emotions/<emotion>.txt      one lemma per line, for each of EMOTIONS
//! subjectivity.tsv            token<TAB>polarity<TAB>strength
//! emoticons.tsv               emoticon<TAB>polarity
//! politeness_polite.txt       one cue per line
//! politeness_impolite.txt     one cue per line
//! sentiment_valence.tsv       token<TAB>valence
//! ```
//!
//! Lines starting with `#` are comments. Entries are lowercased and
//! deduplicated; multi-word entries are normalized to single-space joins.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;

use crate::text::normalized_tokens;
use crate::{Error, Result};

/// The seven emotion synset groups.
pub const EMOTIONS: [&str; 7] = [
    "anger",
    "embarrassment",
    "empathy",
    "fear",
    "pride",
    "relief",
    "sadness",
];

/// Normalization constant of the compound score.
pub const COMPOUND_ALPHA: f64 = 15.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubjectivityEntry {
    pub polarity: String,
    pub strength: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexiconSet {
    pub harmful_words: BTreeSet<String>,
    pub swear_entries: BTreeSet<String>,
    pub emotion_lemmas: BTreeMap<String, BTreeSet<String>>,
    pub subjectivity_entries: BTreeMap<String, SubjectivityEntry>,
    pub emoticons: BTreeMap<String, String>,
    pub polite_cues: BTreeSet<String>,
    pub impolite_cues: BTreeSet<String>,
    pub sentiment_valence: BTreeMap<String, f64>,
}

/// Loads a lexicon directory.
pub fn load_lexicons(dir: &Path) -> Result<LexiconSet> {
    LexiconSet::parse(|name| {
        let path = dir.join(name);
        std::fs::read_to_string(&path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::Lexicon {
                    file: name.to_string(),
                    message: "file not found".into(),
                }
            } else {
                Error::io(path, e)
            }
        })
    })
}

macro_rules! bundled_file {
    ($name:literal) => {
        ($name, include_str!(concat!("../data/lexicons/", $name)))
    };
}

const BUNDLED: [(&str, &str); 14] = [
    bundled_file!("harmful.txt"),
    bundled_file!("swear.txt"),
    bundled_file!("emotions/anger.txt"),
    bundled_file!("emotions/embarrassment.txt"),
    bundled_file!("emotions/empathy.txt"),
    bundled_file!("emotions/fear.txt"),
    bundled_file!("emotions/pride.txt"),
    bundled_file!("emotions/relief.txt"),
    bundled_file!("emotions/sadness.txt"),
    bundled_file!("subjectivity.tsv"),
    bundled_file!("emoticons.tsv"),
    bundled_file!("politeness_polite.txt"),
    bundled_file!("politeness_impolite.txt"),
    bundled_file!("sentiment_valence.tsv"),
];

impl LexiconSet {
    /// The tiny lexicon shipped in `data/lexicons`, compiled into the binary.
    pub fn bundled() -> Self {
        Self::parse(|name| {
            BUNDLED
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, text)| text.to_string())
                .ok_or_else(|| Error::Lexicon {
                    file: name.to_string(),
                    message: "not bundled".into(),
                })
        })
        .expect("bundled lexicon is well formed")
    }

    fn parse(mut read: impl FnMut(&str) -> Result<String>) -> Result<Self> {
        let mut list = |name: &str| -> Result<BTreeSet<String>> {
            let text = read(name)?;
            let set: BTreeSet<String> = entries(&text).map(normalize_phrase).collect();
            nonempty(name, set)
        };
        let harmful_words = list("harmful.txt")?;
        let swear_entries = list("swear.txt")?;
        let polite_cues = list("politeness_polite.txt")?;
        let impolite_cues = list("politeness_impolite.txt")?;
        let mut emotion_lemmas = BTreeMap::new();
        for emotion in EMOTIONS {
            let name = format!("emotions/{emotion}.txt");
            emotion_lemmas.insert(emotion.to_string(), list(&name)?);
        }

        let subjectivity_entries = table(&read("subjectivity.tsv")?, "subjectivity.tsv", 3)?
            .into_iter()
            .map(|mut cols| {
                let strength = cols.pop().unwrap_or_default();
                let polarity = cols.pop().unwrap_or_default();
                let token = cols.pop().unwrap_or_default();
                (token, SubjectivityEntry { polarity, strength })
            })
            .collect();
        let emoticons = table(&read("emoticons.tsv")?, "emoticons.tsv", 2)?
            .into_iter()
            .map(|mut cols| {
                let polarity = cols.pop().unwrap_or_default();
                (cols.pop().unwrap_or_default(), polarity)
            })
            .collect();
        let mut sentiment_valence = BTreeMap::new();
        for (line, cols) in table_lines(&read("sentiment_valence.tsv")?, "sentiment_valence.tsv", 2)? {
            let value: f64 = cols[1].parse().map_err(|_| Error::Lexicon {
                file: "sentiment_valence.tsv".into(),
                message: format!("line {line}: bad valence `{}`", cols[1]),
            })?;
            if !value.is_finite() {
                return Err(Error::Lexicon {
                    file: "sentiment_valence.tsv".into(),
                    message: format!("line {line}: non-finite valence"),
                });
            }
            sentiment_valence.entry(cols[0].clone()).or_insert(value);
        }

        Ok(LexiconSet {
            harmful_words,
            swear_entries,
            emotion_lemmas,
            subjectivity_entries,
            emoticons,
            polite_cues,
            impolite_cues,
            sentiment_valence,
        })
    }
}

fn entries(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn normalize_phrase(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

fn nonempty<T>(name: &str, set: BTreeSet<T>) -> Result<BTreeSet<T>> {
    if set.is_empty() {
        return Err(Error::Lexicon {
            file: name.to_string(),
            message: "no entries".into(),
        });
    }
    Ok(set)
}

fn table_lines(text: &str, name: &str, columns: usize) -> Result<Vec<(usize, Vec<String>)>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cols: Vec<String> = trimmed.split('\t').map(|c| c.trim().to_lowercase()).collect();
        if cols.len() != columns || cols.iter().any(String::is_empty) {
            return Err(Error::Lexicon {
                file: name.to_string(),
                message: format!("line {}: expected {columns} tab-separated columns", idx + 1),
            });
        }
        out.push((idx + 1, cols));
    }
    if out.is_empty() {
        return Err(Error::Lexicon {
            file: name.to_string(),
            message: "no entries".into(),
        });
    }
    Ok(out)
}

fn table(text: &str, name: &str, columns: usize) -> Result<Vec<Vec<String>>> {
    // First occurrence of a key wins; reversing lets the collect keep it.
    let mut rows: Vec<Vec<String>> = table_lines(text, name, columns)?
        .into_iter()
        .map(|(_, c)| c)
        .collect();
    rows.reverse();
    Ok(rows)
}

/// Output of the sentiment scorer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SentimentScores {
    pub positive: f64,
    pub neutral: f64,
    pub negative: f64,
    pub compound: f64,
}

impl SentimentScores {
    pub const NEUTRAL: SentimentScores = SentimentScores {
        positive: 0.0,
        neutral: 1.0,
        negative: 0.0,
        compound: 0.0,
    };
}

/// Compound normalization `S / sqrt(S² + α)`.
pub fn normalize_compound(sum: f64) -> f64 {
    sum / (sum * sum + COMPOUND_ALPHA).sqrt()
}

/// Valence-sum sentiment: the shares of positive, negative and unmatched
/// tokens, and the normalized valence sum.
pub fn sentiment_scores(text: &str, lexicon: &LexiconSet) -> SentimentScores {
    let tokens = normalized_tokens(text);
    if tokens.is_empty() {
        return SentimentScores::NEUTRAL;
    }
    let (mut sum, mut pos, mut neg) = (0.0, 0usize, 0usize);
    for tok in &tokens {
        match lexicon.sentiment_valence.get(tok) {
            Some(&v) if v > 0.0 => {
                sum += v;
                pos += 1;
            }
            Some(&v) if v < 0.0 => {
                sum += v;
                neg += 1;
            }
            _ => {}
        }
    }
    let n = tokens.len() as f64;
    SentimentScores {
        positive: pos as f64 / n,
        neutral: (tokens.len() - pos - neg) as f64 / n,
        negative: neg as f64 / n,
        compound: normalize_compound(sum),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write_dir(dir: &Path) {
        for (name, text) in BUNDLED.iter() {
            let path = dir.join(name);
            fs::create_dir_all(path.parent().unwrap()).unwrap();
            fs::write(path, text).unwrap();
        }
    }

    #[test]
    fn loading_is_idempotent_and_matches_bundled() {
        let tmp = tempfile::tempdir().unwrap();
        write_dir(tmp.path());
        let a = load_lexicons(tmp.path()).unwrap();
        let b = load_lexicons(tmp.path()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, LexiconSet::bundled());
        assert_eq!(a.emotion_lemmas.len(), 7);
        assert!(a.emoticons.contains_key(":)"));
        assert!(a.emoticons.contains_key(":d"));
        assert!(a.swear_entries.contains("shut up"));
    }

    #[test]
    fn swear_file_with_1061_entries() {
        let tmp = tempfile::tempdir().unwrap();
        write_dir(tmp.path());
        let text: String = (0..1061).map(|i| format!("swear{i}\n")).collect();
        fs::write(tmp.path().join("swear.txt"), text).unwrap();
        let lex = load_lexicons(tmp.path()).unwrap();
        assert_eq!(lex.swear_entries.len(), 1061);
    }

    #[test]
    fn duplicates_and_case_are_folded() {
        let tmp = tempfile::tempdir().unwrap();
        write_dir(tmp.path());
        fs::write(tmp.path().join("harmful.txt"), "Idiot\nidiot\n# c\n\nmoron\n").unwrap();
        let lex = load_lexicons(tmp.path()).unwrap();
        assert_eq!(lex.harmful_words.len(), 2);
    }

    #[test]
    fn missing_and_empty_files() {
        let tmp = tempfile::tempdir().unwrap();
        write_dir(tmp.path());
        fs::remove_file(tmp.path().join("emoticons.tsv")).unwrap();
        let err = load_lexicons(tmp.path()).unwrap_err();
        assert!(err.to_string().contains("emoticons.tsv"), "{err}");

        write_dir(tmp.path());
        fs::write(tmp.path().join("politeness_polite.txt"), "# only comments\n").unwrap();
        let err = load_lexicons(tmp.path()).unwrap_err();
        assert!(err.to_string().contains("politeness_polite.txt"), "{err}");
    }

    #[test]
    fn sentiment_without_lexicon_tokens() {
        let lex = LexiconSet::bundled();
        assert_eq!(sentiment_scores("the sky is blue", &lex), SentimentScores::NEUTRAL);
        assert_eq!(sentiment_scores("", &lex), SentimentScores::NEUTRAL);
    }

    #[test]
    fn single_token_compound() {
        let mut lex = LexiconSet::bundled();
        lex.sentiment_valence.insert("zap".into(), 1.5);
        lex.sentiment_valence.insert("unzap".into(), -1.5);
        let s = sentiment_scores("zap", &lex);
        // 1.5 / sqrt(2.25 + 15) = 1.5 / 4.1533...
        assert!((s.compound - 0.361_157_559_1).abs() < 1e-9, "{}", s.compound);
        assert_eq!((s.positive, s.neutral, s.negative), (1.0, 0.0, 0.0));
        let m = sentiment_scores("unzap", &lex);
        assert_eq!(m.compound, -s.compound);
        assert_eq!((m.positive, m.neutral, m.negative), (0.0, 0.0, 1.0));
    }

    #[test]
    fn proportions_sum_to_one() {
        let lex = LexiconSet::bundled();
        let s = sentiment_scores("good bad and ugly :)", &lex);
        assert!((s.positive + s.neutral + s.negative - 1.0).abs() < 1e-12);
        assert_eq!(s.positive, 0.4);
        assert_eq!(s.negative, 0.2);
    }
}
