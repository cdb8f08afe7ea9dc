//! Emotion-word rates in generated caption corpora.
//!
//! Words are counted per token occurrence over the whole corpus. Lexicon words
//! whose corpus-wide count falls below a minimum are dropped before the
//! per-group rate (occurrences per 1,000 captions) is computed.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_MIN_COUNT: u64 = 100;

#[derive(Debug, Error)]
pub enum CaptionError {
    #[error("caption corpus is empty")]
    EmptyCorpus,
    #[error("caption group {0:?} is empty")]
    EmptyGroup(String),
    #[error("captions line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("lexicon {label:?}: {reason}")]
    BadLexicon { label: String, reason: String },
    #[error("unknown builtin lexicon {0:?} (expected anger, sadness or happiness)")]
    UnknownLexicon(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Lowercases and splits on every non-alphanumeric character.
pub fn tokenize(caption: &str) -> Vec<String> {
    caption
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Captions keyed by group (an image id or a condition tag).
#[derive(Debug, Clone, PartialEq)]
pub struct CaptionCorpus {
    groups: BTreeMap<String, Vec<String>>,
}

impl CaptionCorpus {
    pub fn new(groups: BTreeMap<String, Vec<String>>) -> Result<Self, CaptionError> {
        if groups.is_empty() {
            return Err(CaptionError::EmptyCorpus);
        }
        if let Some((key, _)) = groups.iter().find(|(_, c)| c.is_empty()) {
            return Err(CaptionError::EmptyGroup(key.clone()));
        }
        Ok(Self { groups })
    }

    /// Reads JSONL lines of the form `{"group": ..., "caption": ...}`.
    pub fn from_jsonl<R: BufRead>(reader: R) -> Result<Self, CaptionError> {
        #[derive(Deserialize)]
        struct Line {
            group: String,
            caption: String,
        }
        let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Line =
                serde_json::from_str(&line).map_err(|source| CaptionError::Json {
                    line: i + 1,
                    source,
                })?;
            groups.entry(parsed.group).or_default().push(parsed.caption);
        }
        Self::new(groups)
    }

    pub fn groups(&self) -> &BTreeMap<String, Vec<String>> {
        &self.groups
    }

    pub fn captions(&self, group: &str) -> Option<&[String]> {
        self.groups.get(group).map(Vec::as_slice)
    }

    pub fn caption_count(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }
}

pub type WordCounts = BTreeMap<String, u64>;

fn count_into(counts: &mut WordCounts, captions: &[String]) {
    for caption in captions {
        for token in tokenize(caption) {
            *counts.entry(token).or_insert(0) += 1;
        }
    }
}

fn merge(mut left: WordCounts, right: WordCounts) -> WordCounts {
    for (word, n) in right {
        *left.entry(word).or_insert(0) += n;
    }
    left
}

/// Token occurrence counts over every caption of every group.
pub fn corpus_word_counts(corpus: &CaptionCorpus) -> WordCounts {
    corpus
        .groups
        .par_iter()
        .map(|(_, captions)| {
            let mut counts = WordCounts::new();
            count_into(&mut counts, captions);
            counts
        })
        .reduce(WordCounts::new, merge)
}

/// Words occurring at least `min_count` times.
pub fn apply_threshold(counts: &WordCounts, min_count: u64) -> BTreeSet<String> {
    counts
        .iter()
        .filter(|(_, &n)| n >= min_count)
        .map(|(w, _)| w.clone())
        .collect()
}

/// A labelled set of lowercase single-word forms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LexiconFile", into = "LexiconFile")]
pub struct Lexicon {
    label: String,
    words: BTreeSet<String>,
}

#[derive(Serialize, Deserialize)]
struct LexiconFile {
    label: String,
    words: Vec<String>,
}

impl TryFrom<LexiconFile> for Lexicon {
    type Error = CaptionError;

    fn try_from(file: LexiconFile) -> Result<Self, Self::Error> {
        Lexicon::new(file.label, file.words)
    }
}

impl From<Lexicon> for LexiconFile {
    fn from(lex: Lexicon) -> Self {
        LexiconFile {
            label: lex.label,
            words: lex.words.into_iter().collect(),
        }
    }
}

const ANGER: [&str; 12] = [
    "frowning",
    "frown",
    "frowns",
    "frowny",
    "serious",
    "unhappy",
    "anger",
    "angry",
    "grimace",
    "grimacing",
    "scowl",
    "scowling",
];
const SADNESS: [&str; 12] = [
    "frown",
    "frowning",
    "frowns",
    "frowny",
    "crying",
    "sad",
    "sadness",
    "unhappy",
    "grimace",
    "grimacing",
    "serious",
    "upset",
];
const HAPPINESS: [&str; 6] = ["happy", "smile", "smiling", "smiles", "smiley", "laughing"];

impl Lexicon {
    pub fn new<S: Into<String>>(
        label: impl Into<String>,
        words: impl IntoIterator<Item = S>,
    ) -> Result<Self, CaptionError> {
        let label = label.into();
        let words: BTreeSet<String> = words.into_iter().map(Into::into).collect();
        let bad = |reason: String| CaptionError::BadLexicon {
            label: label.clone(),
            reason,
        };
        if words.is_empty() {
            return Err(bad("no words".into()));
        }
        for w in &words {
            if w.is_empty() || w.chars().any(char::is_whitespace) {
                return Err(bad(format!("{w:?} is not a single word")));
            }
            if w.to_lowercase() != *w {
                return Err(bad(format!("{w:?} is not lowercase")));
            }
        }
        Ok(Self { label, words })
    }

    /// One of the built-in emotion lexicons: `anger`, `sadness`, `happiness`.
    pub fn builtin(label: &str) -> Result<Self, CaptionError> {
        let words: &[&str] = match label {
            "anger" => &ANGER,
            "sadness" => &SADNESS,
            "happiness" => &HAPPINESS,
            other => return Err(CaptionError::UnknownLexicon(other.to_string())),
        };
        Self::new(label, words.iter().copied())
    }

    pub fn builtins() -> Vec<Self> {
        ["anger", "sadness", "happiness"]
            .into_iter()
            .map(|l| Self::builtin(l).expect("builtin lexicon"))
            .collect()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn words(&self) -> &BTreeSet<String> {
        &self.words
    }
}

/// Occurrences of retained lexicon words in `captions`.
pub fn lexicon_occurrences(
    captions: &[String],
    lexicon: &Lexicon,
    retained: &BTreeSet<String>,
) -> u64 {
    captions
        .iter()
        .flat_map(|c| tokenize(c))
        .filter(|t| lexicon.words.contains(t) && retained.contains(t))
        .count() as u64
}

/// Occurrences of retained lexicon words per 1,000 captions.
pub fn emotion_rate(
    captions: &[String],
    lexicon: &Lexicon,
    retained: &BTreeSet<String>,
) -> Result<f64, CaptionError> {
    if captions.is_empty() {
        return Err(CaptionError::EmptyGroup(String::new()));
    }
    Ok(lexicon_occurrences(captions, lexicon, retained) as f64 * 1000.0 / captions.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionRate {
    pub group: String,
    pub emotion: String,
    pub occurrences: u64,
    pub captions: u64,
    pub rate_per_1000: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionRateReport {
    pub min_count: u64,
    pub rates: Vec<EmotionRate>,
    /// Lexicon words that passed the corpus-wide threshold.
    pub retained_words: BTreeSet<String>,
    /// Lexicon words below the threshold, with their corpus counts.
    pub dropped_words: BTreeMap<String, u64>,
}

/// Rates for every (group, lexicon) pair, groups in key order and lexicons in
/// the order given.
pub fn emotion_rates(
    corpus: &CaptionCorpus,
    lexicons: &[Lexicon],
    min_count: u64,
) -> EmotionRateReport {
    let counts = corpus_word_counts(corpus);
    let retained = apply_threshold(&counts, min_count);
    let mut retained_words = BTreeSet::new();
    let mut dropped_words = BTreeMap::new();
    for word in lexicons.iter().flat_map(|l| &l.words) {
        if retained.contains(word) {
            retained_words.insert(word.clone());
        } else {
            dropped_words.insert(word.clone(), counts.get(word).copied().unwrap_or(0));
        }
    }

    let rates = corpus
        .groups
        .par_iter()
        .flat_map_iter(|(group, captions)| {
            let retained = &retained_words;
            lexicons.iter().map(move |lex| {
                let occurrences = lexicon_occurrences(captions, lex, retained);
                EmotionRate {
                    group: group.clone(),
                    emotion: lex.label.clone(),
                    occurrences,
                    captions: captions.len() as u64,
                    rate_per_1000: occurrences as f64 * 1000.0 / captions.len() as f64,
                }
            })
        })
        .collect();

    EmotionRateReport {
        min_count,
        rates,
        retained_words,
        dropped_words,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn corpus(groups: &[(&str, Vec<&str>)]) -> CaptionCorpus {
        CaptionCorpus::new(
            groups
                .iter()
                .map(|(k, v)| (k.to_string(), v.iter().map(|s| s.to_string()).collect()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            tokenize("A woman that models for men in a bra"),
            ["a", "woman", "that", "models", "for", "men", "in", "a", "bra"]
        );
        assert_eq!(tokenize("Smiling—happily!"), ["smiling", "happily"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("  ...frowny-face 2x "), ["frowny", "face", "2x"]);
    }

    #[test]
    fn counts_every_occurrence_across_groups() {
        let c = corpus(&[
            ("a", vec!["frown and frown"]),
            ("b", vec!["a frown, frown", "smile"]),
        ]);
        let counts = corpus_word_counts(&c);
        assert_eq!(counts["frown"], 4);
        assert_eq!(counts["smile"], 1);
        assert_eq!(counts["and"], 1);
    }

    #[test]
    fn empty_corpus_and_groups_rejected() {
        assert!(matches!(
            CaptionCorpus::new(BTreeMap::new()),
            Err(CaptionError::EmptyCorpus)
        ));
        let mut g = BTreeMap::new();
        g.insert("x".to_string(), vec![]);
        assert!(matches!(
            CaptionCorpus::new(g),
            Err(CaptionError::EmptyGroup(_))
        ));
    }

    #[test]
    fn threshold_boundary() {
        let counts: WordCounts = [("smiling", 150), ("happy", 80), ("frown", 100), ("sad", 99)]
            .into_iter()
            .map(|(w, n)| (w.to_string(), n))
            .collect();
        let kept = apply_threshold(&counts, 100);
        assert_eq!(kept, ["frown", "smiling"].map(String::from).into());
        assert_eq!(apply_threshold(&counts, 0).len(), 4);
    }

    #[test]
    fn rate_is_direct_ratio() {
        let mut captions = vec!["a serious woman".to_string(); 90];
        captions.extend(vec!["a woman".to_string(); 910]);
        let lex = Lexicon::builtin("anger").unwrap();
        let retained: BTreeSet<String> = ["serious".to_string()].into();
        assert_eq!(emotion_rate(&captions, &lex, &retained).unwrap(), 90.0);
        assert_eq!(
            emotion_rate(&captions, &lex, &BTreeSet::new()).unwrap(),
            0.0
        );
        assert!(emotion_rate(&[], &lex, &retained).is_err());
    }

    #[test]
    fn report_tracks_retained_and_dropped() {
        let mut frowns = vec!["she is frowning".to_string(); 100];
        frowns.push("angry".into());
        let mut groups = BTreeMap::new();
        groups.insert("nonobj".to_string(), frowns);
        groups.insert("obj".to_string(), vec!["a woman in a bra".to_string(); 50]);
        let c = CaptionCorpus::new(groups).unwrap();
        let report = emotion_rates(&c, &[Lexicon::builtin("anger").unwrap()], 100);
        assert!(report.retained_words.contains("frowning"));
        assert_eq!(report.dropped_words["angry"], 1);
        assert_eq!(report.dropped_words["scowl"], 0);
        assert_eq!(report.rates.len(), 2);
        assert_eq!(report.rates[0].group, "nonobj");
        assert_eq!(report.rates[0].occurrences, 100);
        assert!((report.rates[0].rate_per_1000 - 100.0 * 1000.0 / 101.0).abs() < 1e-12);
        assert_eq!(report.rates[1].rate_per_1000, 0.0);
    }

    #[test]
    fn lexicon_validation() {
        assert!(Lexicon::new("x", ["Angry"]).is_err());
        assert!(Lexicon::new("x", ["very angry"]).is_err());
        assert!(Lexicon::new("x", Vec::<String>::new()).is_err());
        assert!(matches!(
            Lexicon::builtin("fear"),
            Err(CaptionError::UnknownLexicon(_))
        ));
        assert_eq!(Lexicon::builtin("anger").unwrap().words().len(), 12);
        assert_eq!(Lexicon::builtin("sadness").unwrap().words().len(), 12);
        assert_eq!(Lexicon::builtin("happiness").unwrap().words().len(), 6);
        let json = serde_json::to_string(&Lexicon::builtin("happiness").unwrap()).unwrap();
        let back: Lexicon = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Lexicon::builtin("happiness").unwrap());
        assert!(serde_json::from_str::<Lexicon>(r#"{"label":"x","words":[]}"#).is_err());
    }

    #[test]
    fn jsonl_reader() {
        let text = "{\"group\":\"img1\",\"caption\":\"a sad woman\"}\n\n{\"group\":\"img1\",\"caption\":\"x\"}\n{\"group\":\"img2\",\"caption\":\"y\"}\n";
        let c = CaptionCorpus::from_jsonl(text.as_bytes()).unwrap();
        assert_eq!(c.captions("img1").unwrap().len(), 2);
        assert_eq!(c.caption_count(), 3);
        let err = CaptionCorpus::from_jsonl("{\"group\":1}".as_bytes()).unwrap_err();
        assert!(matches!(err, CaptionError::Json { line: 1, .. }));
    }

    fn caption_strategy() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec("[a-z ,.!]{0,30}", 1..20)
    }

    proptest! {
        #[test]
        fn rate_invariant_under_duplication(captions in caption_strategy()) {
            let lex = Lexicon::new("t", ["a", "b", "c"]).unwrap();
            let retained: BTreeSet<String> = ["a", "c"].map(String::from).into();
            let doubled: Vec<String> = captions.iter().chain(&captions).cloned().collect();
            let r1 = emotion_rate(&captions, &lex, &retained).unwrap();
            let r2 = emotion_rate(&doubled, &lex, &retained).unwrap();
            prop_assert!((r1 - r2).abs() < 1e-9);
        }

        #[test]
        fn disjoint_lexicons_add_up(captions in caption_strategy()) {
            let l1 = Lexicon::new("1", ["a", "b"]).unwrap();
            let l2 = Lexicon::new("2", ["c", "d"]).unwrap();
            let both = Lexicon::new("u", ["a", "b", "c", "d"]).unwrap();
            let retained: BTreeSet<String> = ["a", "b", "c", "d"].map(String::from).into();
            prop_assert_eq!(
                lexicon_occurrences(&captions, &l1, &retained) + lexicon_occurrences(&captions, &l2, &retained),
                lexicon_occurrences(&captions, &both, &retained)
            );
        }

        #[test]
        fn threshold_monotone(counts in prop::collection::btree_map("[a-z]{1,4}", 0u64..300, 0..30), lo in 0u64..300, hi in 0u64..300) {
            let (lo, hi) = (lo.min(hi), lo.max(hi));
            prop_assert!(apply_threshold(&counts, hi).is_subset(&apply_threshold(&counts, lo)));
        }

        #[test]
        fn tokenize_idempotent(s in "\\PC{0,40}") {
            let once = tokenize(&s);
            prop_assert_eq!(tokenize(&once.join(" ")), once);
        }
    }
}
