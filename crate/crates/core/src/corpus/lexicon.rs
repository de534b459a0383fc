//! Word-level lexical data: phoneme and syllable counts, parts of speech,
//! and unigram log probabilities.
//!
//! Words missing from the lexicon fall back to spelling heuristics for
//! lengths, `Other` for part of speech, and a log probability one below the
//! lexicon's rarest entry.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pos {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Other,
}

impl Pos {
    pub const ALL: [Pos; 5] = [Pos::Noun, Pos::Verb, Pos::Adjective, Pos::Adverb, Pos::Other];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexEntry {
    pub word: String,
    pub phonemes: u32,
    pub syllables: u32,
    pub pos: Vec<Pos>,
    /// Natural-log unigram probability.
    pub log_prob: f64,
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("lexicon is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("lexicon entry `{word}`: {message}")]
    InvalidEntry { word: String, message: String },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct LexiconFile {
    entries: Vec<LexEntry>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    entries: BTreeMap<String, LexEntry>,
    floor: f64,
}

/// Lowercases and strips everything but letters, digits, and apostrophes.
pub fn normalize_word(word: &str) -> String {
    word.chars()
        .filter(|c| c.is_alphanumeric() || *c == '\'')
        .flat_map(char::to_lowercase)
        .collect()
}

const VOWELS: &[char] = &['a', 'e', 'i', 'o', 'u', 'y'];

/// Counts vowel clusters, discounting a silent final `e`. Never below 1.
pub fn heuristic_syllables(word: &str) -> u32 {
    let w: Vec<char> = normalize_word(word).chars().filter(|c| c.is_alphabetic()).collect();
    let mut groups = 0u32;
    let mut in_vowel = false;
    for &c in &w {
        let v = VOWELS.contains(&c);
        if v && !in_vowel {
            groups += 1;
        }
        in_vowel = v;
    }
    let n = w.len();
    if groups > 1 && n >= 2 && w[n - 1] == 'e' && !VOWELS.contains(&w[n - 2]) {
        let consonant_le = n >= 3 && w[n - 2] == 'l' && !VOWELS.contains(&w[n - 3]);
        if !consonant_le {
            groups -= 1;
        }
    }
    groups.max(1)
}

const DIGRAPHS: &[&str] = &["ch", "sh", "th", "ph", "ng", "ck", "wh", "gh"];

/// Letters minus doubled letters, common digraphs, and a silent final `e`.
pub fn heuristic_phonemes(word: &str) -> u32 {
    let w: String = normalize_word(word).chars().filter(|c| c.is_alphabetic()).collect();
    if w.is_empty() {
        return 1;
    }
    let chars: Vec<char> = w.chars().collect();
    let mut count = chars.len() as i64;
    count -= chars.windows(2).filter(|p| p[0] == p[1]).count() as i64;
    count -= DIGRAPHS.iter().map(|d| w.matches(d).count() as i64).sum::<i64>();
    if heuristic_syllables(&w) < chars.iter().filter(|c| VOWELS.contains(c)).count() as u32
        && w.ends_with('e')
        && chars.len() > 2
    {
        count -= 1;
    }
    count.max(1) as u32
}

impl Lexicon {
    pub fn new(entries: impl IntoIterator<Item = LexEntry>) -> Result<Self, LexiconError> {
        let mut map = BTreeMap::new();
        for mut e in entries {
            let key = normalize_word(&e.word);
            let bad = |m: &str| LexiconError::InvalidEntry {
                word: e.word.clone(),
                message: m.to_string(),
            };
            if key.is_empty() {
                return Err(bad("empty word"));
            }
            if !(e.log_prob <= 0.0) {
                return Err(bad("log probability must be <= 0"));
            }
            if e.syllables == 0 || e.phonemes == 0 {
                return Err(bad("syllable and phoneme counts must be positive"));
            }
            if e.pos.is_empty() {
                e.pos.push(Pos::Other);
            }
            e.word = key.clone();
            map.insert(key, e);
        }
        let min = map.values().map(|e| e.log_prob).fold(f64::INFINITY, f64::min);
        let floor = if min.is_finite() { min - 1.0 } else { -1.0 };
        Ok(Self {
            entries: map,
            floor,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, LexiconError> {
        let file: LexiconFile = serde_json::from_str(text)?;
        Self::new(file.entries)
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let file = LexiconFile {
            entries: self.entries.values().cloned().collect(),
        };
        serde_json::to_string_pretty(&file).expect("lexicon serializes")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&LexEntry> {
        self.entries.get(&normalize_word(word))
    }

    pub fn syllables(&self, word: &str) -> u32 {
        self.get(word)
            .map_or_else(|| heuristic_syllables(word), |e| e.syllables)
    }

    pub fn phonemes(&self, word: &str) -> u32 {
        self.get(word)
            .map_or_else(|| heuristic_phonemes(word), |e| e.phonemes)
    }

    pub fn pos(&self, word: &str) -> &[Pos] {
        self.get(word).map_or(&[Pos::Other], |e| &e.pos)
    }

    pub fn log_prob(&self, word: &str) -> f64 {
        self.get(word).map_or(self.floor, |e| e.log_prob)
    }

    /// Log probability assigned to unknown words.
    pub fn floor(&self) -> f64 {
        self.floor
    }
}
