//! Corpus data model: items, utterances, ratings, and the JSON manifest that
//! ties recordings to them.

mod coding;
mod lexicon;
mod manifest;
mod nonprosodic;

pub use coding::{
    binary_certainty, code_correctness, corpus_rates, self_awareness, transparency, Certainty,
    CodingError, CorpusRates, SelfAwareness, Transparency,
};
pub use lexicon::{normalize_word, LexEntry, Lexicon, LexiconError, Pos};
pub use lexicon::{heuristic_phonemes, heuristic_syllables};
pub use manifest::{load_manifest, parse_manifest, validate_manifest, Corpus};
pub use nonprosodic::{
    nonprosodic_features, nonprosodic_features_for_span, NonprosodicFeatureVector, NonprosodicId,
    NONPROSODIC_COUNT,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::AudioError;

/// Manifest schema identifier written and accepted by this version.
pub const SCHEMA_VERSION: &str = "certainty-corpus/1";

/// Marker for a slot inside an item's context text.
pub const SLOT_MARKER: &str = "___";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("schema violation at `{path}`: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("rating {value} at `{path}` is outside 1..=5")]
    RatingOutOfRange { path: String, value: i64 },
    #[error("utterance {utterance_id}: audio file {path} does not exist")]
    MissingAudio { utterance_id: String, path: String },
    #[error("utterance {utterance_id}: audio rejected: {source}")]
    AudioRejected {
        utterance_id: String,
        #[source]
        source: AudioError,
    },
    #[error("utterance {0} has more than one target span")]
    MultipleTargets(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CorpusError {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::SchemaViolation {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Transit,
    Vocabulary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correctness {
    Correct,
    Incorrect,
}

/// A word of the fixed context used as a stand-in target for localization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlWord {
    pub text: String,
    /// Index of the word among the whitespace-separated tokens of the
    /// context text, where each slot marker counts as one token.
    pub word_index: usize,
}

/// One elicitation prompt: a context sentence with one or more slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub item_id: String,
    pub domain: Domain,
    /// The fixed sentence, with each slot written as `___`.
    pub context_text: String,
    /// Candidate fillers per slot.
    pub options: Vec<Vec<String>>,
    /// Index of the correct option per slot.
    pub correct_options: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_word: Option<ControlWord>,
}

impl Item {
    pub fn context_tokens(&self) -> Vec<&str> {
        self.context_text.split_whitespace().collect()
    }

    pub fn slot_count(&self) -> usize {
        self.context_tokens()
            .iter()
            .filter(|t| t.contains(SLOT_MARKER))
            .count()
    }

    /// Expands the context with the chosen option per slot, returning the
    /// transcript words and the half-open word span each slot occupies.
    pub fn fill(&self, chosen: &[usize]) -> Option<(Vec<String>, Vec<(usize, usize)>)> {
        let mut words = Vec::new();
        let mut spans = Vec::new();
        let mut slot = 0;
        for tok in self.context_tokens() {
            if let Some(pos) = tok.find(SLOT_MARKER) {
                let option = self.options.get(slot)?.get(*chosen.get(slot)?)?;
                let mut filled: Vec<String> =
                    option.split_whitespace().map(String::from).collect();
                if filled.is_empty() {
                    return None;
                }
                let prefix = &tok[..pos];
                let suffix = &tok[pos + SLOT_MARKER.len()..];
                filled[0].insert_str(0, prefix);
                filled.last_mut().unwrap().push_str(suffix);
                let start = words.len();
                words.extend(filled);
                spans.push((start, words.len()));
                slot += 1;
            } else {
                words.push(tok.to_string());
            }
        }
        Some((words, spans))
    }

    /// Word span of the control word in a transcript produced by [`Item::fill`].
    pub fn control_word_span(&self, chosen: &[usize]) -> Option<(usize, usize)> {
        let control = self.control_word.as_ref()?;
        let mut offset = 0;
        let mut slot = 0;
        for (i, tok) in self.context_tokens().iter().enumerate() {
            if i == control.word_index {
                return Some((offset, offset + 1));
            }
            if tok.contains(SLOT_MARKER) {
                let option = self.options.get(slot)?.get(*chosen.get(slot)?)?;
                offset += option.split_whitespace().count();
                slot += 1;
            } else {
                offset += 1;
            }
        }
        None
    }
}

/// Half-open word span `[start_word, end_word)` of a transcript with its
/// optional time alignment in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WordSpan {
    pub start_word: usize,
    pub end_word: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_s: Option<f64>,
}

impl WordSpan {
    pub fn words(start_word: usize, end_word: usize) -> Self {
        Self {
            start_word,
            end_word,
            start_s: None,
            end_s: None,
        }
    }

    pub fn aligned(start_word: usize, end_word: usize, start_s: f64, end_s: f64) -> Self {
        Self {
            start_word,
            end_word,
            start_s: Some(start_s),
            end_s: Some(end_s),
        }
    }

    pub fn time(&self) -> Option<(f64, f64)> {
        Some((self.start_s?, self.end_s?))
    }

    pub fn word_count(&self) -> usize {
        self.end_word.saturating_sub(self.start_word)
    }
}

/// One recorded answer with its ratings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub utterance_id: String,
    pub speaker_id: String,
    pub item_id: String,
    /// WAV path relative to the manifest.
    pub audio: String,
    pub sample_rate: u32,
    pub transcript: Vec<String>,
    /// One span per slot, in slot order.
    pub target_spans: Vec<WordSpan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_span: Option<WordSpan>,
    pub chosen_options: Vec<usize>,
    pub correctness: Correctness,
    pub self_rating: u8,
    pub listener_ratings: Vec<u8>,
    /// 1-based position in the speaker's randomized session.
    pub presentation_ordinal: u32,
}

impl Utterance {
    /// Mean of the listeners' ratings.
    pub fn perceived_mean(&self) -> f64 {
        let sum: u32 = self.listener_ratings.iter().map(|&r| r as u32).sum();
        sum as f64 / self.listener_ratings.len() as f64
    }

    pub fn is_single_target(&self) -> bool {
        self.target_spans.len() == 1
    }
}

/// The serialized corpus description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    #[serde(default)]
    pub items: Vec<Item>,
    #[serde(default)]
    pub utterances: Vec<Utterance>,
}

impl Default for Manifest {
    fn default() -> Self {
        Self {
            schema: SCHEMA_VERSION.to_string(),
            items: Vec::new(),
            utterances: Vec::new(),
        }
    }
}
