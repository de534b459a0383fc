//! Lexical, positional, and session features of the target phrase.

use serde::{Deserialize, Serialize};

use super::{normalize_word, CorpusError, Lexicon, Pos, Utterance, WordSpan};

pub const NONPROSODIC_COUNT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonprosodicId {
    TargetNoun,
    TargetVerb,
    TargetAdjective,
    TargetAdverb,
    TargetOther,
    PrecedingNoun,
    PrecedingVerb,
    PrecedingAdjective,
    PrecedingAdverb,
    PrecedingOther,
    PresentationOrdinal,
    IndexFromStart,
    IndexFromEnd,
    RelativePosition,
    CharCount,
    PhonemeCount,
    SyllableCount,
    Familiarity,
    LogProb,
    HasPrecedingWord,
}

impl NonprosodicId {
    pub const ALL: [NonprosodicId; NONPROSODIC_COUNT] = {
        use NonprosodicId::*;
        [
            TargetNoun,
            TargetVerb,
            TargetAdjective,
            TargetAdverb,
            TargetOther,
            PrecedingNoun,
            PrecedingVerb,
            PrecedingAdjective,
            PrecedingAdverb,
            PrecedingOther,
            PresentationOrdinal,
            IndexFromStart,
            IndexFromEnd,
            RelativePosition,
            CharCount,
            PhonemeCount,
            SyllableCount,
            Familiarity,
            LogProb,
            HasPrecedingWord,
        ]
    };

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        use NonprosodicId::*;
        match self {
            TargetNoun => "target_noun",
            TargetVerb => "target_verb",
            TargetAdjective => "target_adjective",
            TargetAdverb => "target_adverb",
            TargetOther => "target_other",
            PrecedingNoun => "preceding_noun",
            PrecedingVerb => "preceding_verb",
            PrecedingAdjective => "preceding_adjective",
            PrecedingAdverb => "preceding_adverb",
            PrecedingOther => "preceding_other",
            PresentationOrdinal => "presentation_ordinal",
            IndexFromStart => "index_from_start",
            IndexFromEnd => "index_from_end",
            RelativePosition => "relative_position",
            CharCount => "char_count",
            PhonemeCount => "phoneme_count",
            SyllableCount => "syllable_count",
            Familiarity => "familiarity",
            LogProb => "log_prob",
            HasPrecedingWord => "has_preceding_word",
        }
    }
}

impl std::fmt::Display for NonprosodicId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for NonprosodicId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| format!("unknown nonprosodic feature `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonprosodicFeatureVector {
    values: [f64; NONPROSODIC_COUNT],
}

impl NonprosodicFeatureVector {
    pub fn get(&self, id: NonprosodicId) -> f64 {
        self.values[id.index()]
    }

    pub fn values(&self) -> &[f64; NONPROSODIC_COUNT] {
        &self.values
    }
}

/// Features of the single target phrase of `utterance`.
///
/// `history` may contain any utterances; only those by the same speaker with
/// an earlier presentation ordinal count toward familiarity.
pub fn nonprosodic_features(
    utterance: &Utterance,
    lexicon: &Lexicon,
    history: &[&Utterance],
) -> Result<NonprosodicFeatureVector, CorpusError> {
    match utterance.target_spans.as_slice() {
        [span] => Ok(nonprosodic_features_for_span(utterance, span, lexicon, history)),
        [] => Err(CorpusError::schema(
            format!("{}.target_spans", utterance.utterance_id),
            "no target span",
        )),
        _ => Err(CorpusError::MultipleTargets(utterance.utterance_id.clone())),
    }
}

fn set_pos(values: &mut [f64], tags: &[Pos]) {
    for tag in tags {
        let i = Pos::ALL.iter().position(|p| p == tag).expect("tag in ALL");
        values[i] = 1.0;
    }
}

fn contains_phrase(haystack: &[String], phrase: &[String]) -> bool {
    if phrase.is_empty() || haystack.len() < phrase.len() {
        return false;
    }
    let hay: Vec<String> = haystack.iter().map(|w| normalize_word(w)).collect();
    hay.windows(phrase.len()).any(|w| w == phrase)
}

/// Features for an arbitrary word span, used per slot for multi-slot
/// utterances and for control words.
pub fn nonprosodic_features_for_span(
    utterance: &Utterance,
    span: &WordSpan,
    lexicon: &Lexicon,
    history: &[&Utterance],
) -> NonprosodicFeatureVector {
    use NonprosodicId::*;
    let mut v = [0.0; NONPROSODIC_COUNT];
    let n = utterance.transcript.len();
    let start = span.start_word.min(n);
    let end = span.end_word.clamp(start, n);
    let words = &utterance.transcript[start..end];

    let mut target_tags: Vec<Pos> = words.iter().flat_map(|w| lexicon.pos(w).to_vec()).collect();
    target_tags.dedup();
    set_pos(&mut v[TargetNoun.index()..=TargetOther.index()], &target_tags);
    if start > 0 {
        let prev = &utterance.transcript[start - 1];
        set_pos(&mut v[PrecedingNoun.index()..=PrecedingOther.index()], lexicon.pos(prev));
        v[HasPrecedingWord.index()] = 1.0;
    }

    v[PresentationOrdinal.index()] = utterance.presentation_ordinal as f64;
    v[IndexFromStart.index()] = start as f64;
    v[IndexFromEnd.index()] = (n - end) as f64;
    v[RelativePosition.index()] = if n > 0 { start as f64 / n as f64 } else { 0.0 };

    v[CharCount.index()] = words
        .iter()
        .map(|w| w.chars().filter(|c| c.is_alphabetic()).count() as f64)
        .sum();
    v[PhonemeCount.index()] = words.iter().map(|w| lexicon.phonemes(w) as f64).sum();
    v[SyllableCount.index()] = words.iter().map(|w| lexicon.syllables(w) as f64).sum();
    v[LogProb.index()] = words.iter().map(|w| lexicon.log_prob(w)).sum();

    let phrase: Vec<String> = words.iter().map(|w| normalize_word(w)).collect();
    v[Familiarity.index()] = history
        .iter()
        .filter(|h| {
            h.speaker_id == utterance.speaker_id
                && h.presentation_ordinal < utterance.presentation_ordinal
                && contains_phrase(&h.transcript, &phrase)
        })
        .count() as f64;

    NonprosodicFeatureVector { values: v }
}
