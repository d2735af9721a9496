//! Synthetic labeled snippets with planted marker tokens, for end-to-end
//! checks where the right answer is known.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::snippets::{
    Comment, DisclosureLabel, IntentionLabel, InterpretationLabel, Label, ResponseLabels, Snippet,
    SnippetLabels, SnippetRecord, StrategyLabel,
};

/// Neutral filler that no bundled lexicon lists.
const FILLER: [&str; 24] = [
    "alder", "basalt", "cobalt", "dune", "ember", "fjord", "gravel", "harbor", "inlet", "juniper",
    "kelp", "lichen", "marsh", "nickel", "onyx", "pebble", "quartz", "reed", "slate", "tundra",
    "umber", "vale", "willow", "yarrow",
];

pub const BUNDLED_SNIPPETS: &str = include_str!("../data/synthetic/snippets.jsonl");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthConfig {
    pub snippets: usize,
    pub seed: u64,
    pub max_responses: usize,
    /// Filler words per comment.
    pub filler: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            snippets: 200,
            seed: 7,
            max_responses: 3,
            filler: 4,
        }
    }
}

/// The marker token that plants `label`.
pub fn marker<L: Label>(label: L) -> String {
    format!("mk{}{}", L::TASK, label.name())
}

fn filler(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    (0..n).map(|_| FILLER.choose(rng).expect("nonempty").to_string()).collect()
}

fn body(mut words: Vec<String>, markers: &[String], rng: &mut ChaCha8Rng) -> String {
    for m in markers {
        let at = rng.random_range(0..=words.len());
        words.insert(at, m.clone());
    }
    words.join(" ")
}

fn comment(id: String, parent: Option<String>, thread: &str, author: String, body: String, t: i64) -> Comment {
    Comment {
        id,
        parent_id: parent,
        thread_id: thread.to_string(),
        author,
        body,
        created_utc: t,
    }
}

/// Builds one snippet; response 0 is written by the parent's author.
fn assemble(
    n: usize,
    parent_body: String,
    suspect_body: String,
    response_bodies: Vec<String>,
    labels: SnippetLabels,
) -> SnippetRecord {
    let sid = format!("syn{n:04}");
    let thread = format!("t_{sid}");
    let t0 = 1_500_000_000 + 1000 * n as i64;
    let parent = comment(format!("{sid}p"), None, &thread, format!("u{n}a"), parent_body, t0);
    let suspect = comment(sid.clone(), Some(parent.id.clone()), &thread, format!("u{n}b"), suspect_body, t0 + 1);
    let responses = response_bodies
        .into_iter()
        .enumerate()
        .map(|(k, b)| {
            let author = if k == 0 { parent.author.clone() } else { format!("u{n}r{k}") };
            comment(format!("{sid}r{k}"), Some(sid.clone()), &thread, author, b, t0 + 2 + k as i64)
        })
        .collect();
    SnippetRecord::new(
        Snippet {
            snippet_id: sid,
            parent,
            suspect,
            responses,
        },
        Some(labels),
    )
}

fn pick_intention(rng: &mut ChaCha8Rng) -> IntentionLabel {
    match rng.random_range(0..10) {
        0..=4 => IntentionLabel::None,
        5..=8 => IntentionLabel::Trolling,
        _ => IntentionLabel::Playing,
    }
}

fn disclosure_for(i: IntentionLabel, rng: &mut ChaCha8Rng) -> DisclosureLabel {
    match i {
        IntentionLabel::None => DisclosureLabel::None,
        _ if rng.random_bool(0.5) => DisclosureLabel::Hidden,
        _ => DisclosureLabel::Exposed,
    }
}

/// Every label is a function of a marker token: `i` and `d` in the suspect,
/// `r_k` and `b_k` in response `k`. `d` is `none` exactly when `i` is.
pub fn planted_dataset(cfg: &SynthConfig) -> Vec<SnippetRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.snippets)
        .map(|n| {
            let i = pick_intention(&mut rng);
            let d = disclosure_for(i, &mut rng);
            let responses = rng.random_range(1..=cfg.max_responses.max(1));
            let per_response: Vec<ResponseLabels> = (0..responses)
                .map(|_| ResponseLabels {
                    interpretation: *InterpretationLabel::all().choose(&mut rng).expect("nonempty"),
                    strategy: *StrategyLabel::all().choose(&mut rng).expect("nonempty"),
                })
                .collect();
            let parent = body(filler(&mut rng, cfg.filler), &[], &mut rng);
            let words = filler(&mut rng, cfg.filler);
            let suspect = body(words, &[marker(i), marker(d)], &mut rng);
            let bodies = per_response
                .iter()
                .map(|r| {
                    let words = filler(&mut rng, cfg.filler);
                    body(words, &[marker(r.interpretation), marker(r.strategy)], &mut rng)
                })
                .collect();
            assemble(
                n,
                parent,
                suspect,
                bodies,
                SnippetLabels {
                    intention: i,
                    disclosure: d,
                    per_response,
                },
            )
        })
        .collect()
}

/// The strategy each interpretation forces in [`strategy_follows_interpretation`].
pub fn strategy_of(r: InterpretationLabel) -> StrategyLabel {
    match r {
        InterpretationLabel::None => StrategyLabel::Normal,
        InterpretationLabel::Trolling => StrategyLabel::FalseAccusation,
        InterpretationLabel::Playing => StrategyLabel::Engage,
    }
}

/// Responses carry no information: every `r_k` equals the intention, which
/// the suspect's marker reveals except for a `noise` share of snippets whose
/// labels are redrawn, and `b_k = strategy_of(r_k)`.
pub fn strategy_follows_interpretation(cfg: &SynthConfig, noise: f64) -> Vec<SnippetRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.snippets)
        .map(|n| {
            let shown = pick_intention(&mut rng);
            let i = if rng.random_bool(noise) { pick_intention(&mut rng) } else { shown };
            let d = disclosure_for(i, &mut rng);
            let r = InterpretationLabel::from_index(i.index()).expect("same arity");
            let responses = rng.random_range(1..=cfg.max_responses.max(1));
            let per_response = vec![
                ResponseLabels {
                    interpretation: r,
                    strategy: strategy_of(r),
                };
                responses
            ];
            let parent = body(filler(&mut rng, cfg.filler), &[], &mut rng);
            let words = filler(&mut rng, cfg.filler);
            let suspect = body(words, &[marker(shown), marker(d)], &mut rng);
            let bodies = vec!["same reply".to_string(); responses];
            assemble(
                n,
                parent,
                suspect,
                bodies,
                SnippetLabels {
                    intention: i,
                    disclosure: d,
                    per_response,
                },
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snippets::{read_snippets_from, validate_labels, write_snippets};

    #[test]
    fn planted_records_are_valid_and_deterministic() {
        let cfg = SynthConfig::default();
        let a = planted_dataset(&cfg);
        assert_eq!(a, planted_dataset(&cfg));
        assert_eq!(a.len(), 200);
        for rec in &a {
            let labels = rec.labels.as_ref().unwrap();
            assert!(validate_labels(&rec.snippet(), labels).is_empty());
            assert!(rec.suspect.body.contains(&marker(labels.intention)));
        }
    }

    #[test]
    fn bundled_file_matches_generator() {
        let mut buf = Vec::new();
        write_snippets(&mut buf, None, &planted_dataset(&SynthConfig::default())).unwrap();
        if std::env::var_os("TROLLGRAPH_REGENERATE").is_some() {
            let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic/snippets.jsonl");
            std::fs::write(path, &buf).unwrap();
            return;
        }
        assert!(String::from_utf8(buf).unwrap() == BUNDLED_SNIPPETS, "regenerate data/synthetic/snippets.jsonl");
        assert_eq!(read_snippets_from(BUNDLED_SNIPPETS.as_bytes()).unwrap().len(), 200);
    }

    #[test]
    fn strategy_set_follows_interpretation() {
        for rec in strategy_follows_interpretation(&SynthConfig::default(), 0.1) {
            let l = rec.labels.as_ref().unwrap();
            assert!(validate_labels(&rec.snippet(), l).is_empty());
            for r in &l.per_response {
                assert_eq!(r.strategy, strategy_of(r.interpretation));
            }
        }
    }
}
