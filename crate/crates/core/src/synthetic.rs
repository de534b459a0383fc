//! A generated study with known structure, for end-to-end testing.
//!
//! Every word is a pitched tone whose length follows its syllable count and
//! the speaker's speaking rate. Utterances drawn as uncertain get a long
//! pause before each slot word and a slowed slot word. Perceived scores are
//! a fixed linear function of five extracted features, so a regression over a
//! feature set containing them can recover the listener scores.

use std::path::{Path, PathBuf};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::audio::{decode_wav, encode_wav, synthesize_chirp, AudioClip, AudioError};
use crate::corpus::{
    code_correctness, heuristic_phonemes, heuristic_syllables, normalize_word, ControlWord,
    Corpus, CorpusError, Domain, Item, LexEntry, Lexicon, Manifest, Pos, Utterance,
    WordSpan,
};
use crate::experiments::{prepare_corpus, ExperimentError, PreparedUtterance};
use crate::featuresets::{FeatureSetError, Member};
use crate::prosody::{FeatureId, Scope, TrackerConfig};
use crate::stats;

const GAP: f64 = 0.05;
const LEAD: f64 = 0.2;
const TRAIL: f64 = 0.25;
const NOISE: f64 = 0.002;
const FADE: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub speakers: usize,
    pub sample_rate: u32,
    pub seed: u64,
    /// Probability that an utterance is produced with hesitation.
    pub uncertain_rate: f64,
    pub judges: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            speakers: 8,
            sample_rate: 16000,
            seed: 7,
            uncertain_rate: 0.4,
            judges: 5,
        }
    }
}

/// `score = 1 + scale * (Σ weight·x − offset)` over normalized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedModel {
    pub terms: Vec<(Member, f64)>,
    pub offset: f64,
    pub scale: f64,
}

impl PlantedModel {
    pub fn linear_score(&self, u: &PreparedUtterance) -> Result<f64, FeatureSetError> {
        self.terms.iter().try_fold(0.0, |acc, (m, w)| Ok(acc + w * member_value(u, m)?))
    }

    /// Score on the 1..=5 scale before quantization.
    pub fn score(&self, u: &PreparedUtterance) -> Result<f64, FeatureSetError> {
        Ok(1.0 + self.scale * (self.linear_score(u)? - self.offset))
    }
}

fn member_value(u: &PreparedUtterance, m: &Member) -> Result<f64, FeatureSetError> {
    let (scope, feature) = match *m {
        Member::Utterance(f) => (Scope::Utterance, f),
        Member::Context(f) => (Scope::Context, f),
        Member::Target(f) => (Scope::Target, f),
        Member::Nonprosodic(_) => return Err(FeatureSetError::InvalidSpec("planted terms are prosodic".into())),
    };
    u.features.scope(scope).get(feature).ok_or_else(|| FeatureSetError::MissingFeature {
        utterance_id: u.utterance_id.clone(),
        feature,
        scope,
    })
}

/// Planted weights in units of each feature's corpus standard deviation.
fn planted_directions() -> [(Member, f64); 5] {
    use FeatureId::*;
    [
        (Member::Utterance(SilenceTotal), -1.0),
        (Member::Target(SilencePercent), -1.0),
        (Member::Target(SpeakingRate), 0.8),
        (Member::Utterance(F0Mean), -0.25),
        (Member::Utterance(RmsMean), 0.25),
    ]
}

#[derive(Debug, Clone)]
pub struct SyntheticStudy {
    pub manifest: Manifest,
    pub lexicon: Lexicon,
    /// Encoded audio per utterance, in manifest order.
    pub wavs: Vec<Vec<u8>>,
    /// The encoded audio decoded again.
    pub clips: Vec<AudioClip>,
    /// Whether each utterance was produced with hesitation.
    pub uncertain: Vec<bool>,
    pub planted: PlantedModel,
}

impl SyntheticStudy {
    pub fn corpus(&self) -> Result<Corpus, CorpusError> {
        Corpus::from_parts(self.manifest.clone(), PathBuf::from("."), self.clips.clone())
    }

    /// Writes `manifest.json`, `lexicon.json`, and `audio/*.wav` under `dir`
    /// and returns the manifest path.
    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir.join("audio"))?;
        for (u, wav) in self.manifest.utterances.iter().zip(&self.wavs) {
            std::fs::write(dir.join(&u.audio), wav)?;
        }
        std::fs::write(dir.join("lexicon.json"), self.lexicon.to_json())?;
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

struct ItemDef {
    id: &'static str,
    domain: Domain,
    context: &'static str,
    options: &'static [&'static [&'static str]],
    correct: &'static [usize],
    control: Option<(&'static str, usize)>,
}

const ITEMS: &[ItemDef] = &[
    ItemDef {
        id: "t01",
        domain: Domain::Transit,
        context: "the blue train stops at ___ before the river bridge",
        options: &[&["maple", "union", "summit"]],
        correct: &[0],
        control: Some(("river", 8)),
    },
    ItemDef {
        id: "t02",
        domain: Domain::Transit,
        context: "change at ___ for the airport shuttle",
        options: &[&["central", "harbor", "willow"]],
        correct: &[1],
        control: Some(("airport", 5)),
    },
    ItemDef {
        id: "t03",
        domain: Domain::Transit,
        context: "from the museum take the ___ line downtown",
        options: &[&["orange", "silver", "purple"]],
        correct: &[2],
        control: Some(("museum", 2)),
    },
    ItemDef {
        id: "t04",
        domain: Domain::Transit,
        context: "the night bus leaves from ___ square every hour",
        options: &[&["market", "castle", "garden"]],
        correct: &[0],
        control: Some(("night", 1)),
    },
    ItemDef {
        id: "t05",
        domain: Domain::Transit,
        context: "walk past the library to ___ avenue",
        options: &[&["jefferson", "lincoln", "madison"]],
        correct: &[1],
        control: Some(("library", 3)),
    },
    ItemDef {
        id: "t06",
        domain: Domain::Transit,
        context: "transfer at ___ and ___ to reach the stadium",
        options: &[&["union", "central"], &["park", "harbor"]],
        correct: &[0, 1],
        control: None,
    },
    ItemDef {
        id: "v01",
        domain: Domain::Vocabulary,
        context: "her answer was completely ___ to the panel",
        options: &[&["irrelevant", "tangential", "peripheral"]],
        correct: &[0],
        control: Some(("panel", 7)),
    },
    ItemDef {
        id: "v02",
        domain: Domain::Vocabulary,
        context: "the lawyer gave a ___ reply to the question",
        options: &[&["terse", "candid", "evasive"]],
        correct: &[2],
        control: Some(("lawyer", 1)),
    },
    ItemDef {
        id: "v03",
        domain: Domain::Vocabulary,
        context: "the hikers felt ___ after the long climb",
        options: &[&["exhausted", "elated", "famished"]],
        correct: &[0],
        control: Some(("climb", 7)),
    },
    ItemDef {
        id: "v04",
        domain: Domain::Vocabulary,
        context: "a ___ person rarely changes their opinion",
        options: &[&["stubborn", "obstinate", "resolute"]],
        correct: &[1],
        control: Some(("opinion", 6)),
    },
    ItemDef {
        id: "v05",
        domain: Domain::Vocabulary,
        context: "the garden looked ___ in the morning light",
        options: &[&["luminous", "verdant", "pristine"]],
        correct: &[1],
        control: Some(("garden", 1)),
    },
    ItemDef {
        id: "v06",
        domain: Domain::Vocabulary,
        context: "the ___ critic praised the ___ novel",
        options: &[&["harsh", "famous"], &["debut", "second"]],
        correct: &[1, 0],
        control: None,
    },
];

const VERBS: &[&str] = &[
    "stops", "change", "take", "leaves", "walk", "transfer", "reach", "gave", "felt", "changes",
    "looked", "praised", "was",
];
const FUNCTION_WORDS: &[&str] = &[
    "the", "at", "before", "for", "from", "to", "and", "her", "a", "after", "their", "in",
];
const ADVERBS: &[&str] = &["completely", "rarely", "downtown"];

fn pos_of(word: &str, domain: Domain, is_option: bool) -> Pos {
    if is_option {
        return match domain {
            Domain::Transit => Pos::Noun,
            Domain::Vocabulary => Pos::Adjective,
        };
    }
    if VERBS.contains(&word) {
        Pos::Verb
    } else if FUNCTION_WORDS.contains(&word) {
        Pos::Other
    } else if ADVERBS.contains(&word) {
        Pos::Adverb
    } else {
        Pos::Noun
    }
}

fn items() -> Vec<Item> {
    ITEMS
        .iter()
        .map(|d| Item {
            item_id: d.id.to_string(),
            domain: d.domain,
            context_text: d.context.to_string(),
            options: d
                .options
                .iter()
                .map(|o| o.iter().map(|w| w.to_string()).collect())
                .collect(),
            correct_options: d.correct.to_vec(),
            control_word: d.control.map(|(text, word_index)| ControlWord {
                text: text.to_string(),
                word_index,
            }),
        })
        .collect()
}

fn lexicon() -> Lexicon {
    let mut entries: Vec<LexEntry> = Vec::new();
    let mut add = |word: &str, pos: Pos| {
        let w = normalize_word(word);
        if entries.iter().any(|e| e.word == w) {
            return;
        }
        entries.push(LexEntry {
            phonemes: heuristic_phonemes(&w),
            syllables: heuristic_syllables(&w),
            pos: vec![pos],
            log_prob: -(2.0 + 0.4 * w.len() as f64),
            word: w,
        });
    };
    for d in ITEMS {
        for opts in d.options {
            for w in *opts {
                add(w, pos_of(w, d.domain, true));
            }
        }
        for tok in d.context.split_whitespace().filter(|t| !t.contains("___")) {
            add(tok, pos_of(tok, d.domain, false));
        }
    }
    Lexicon::new(entries).expect("built-in lexicon is valid")
}

struct Speaker {
    id: String,
    f0: f64,
    amplitude: f64,
    syllable: f64,
}

/// Appends a word tone with short fades and returns its `(start, end)`.
fn push_word(
    samples: &mut Vec<f64>,
    rng: &mut ChaCha8Rng,
    speaker: &Speaker,
    duration: f64,
    sample_rate: u32,
) -> Result<(f64, f64), AudioError> {
    let f0 = speaker.f0 * rng.random_range(0.92..1.08);
    let amp = speaker.amplitude * rng.random_range(0.85..1.15);
    let tone = synthesize_chirp(f0 * 1.03, f0 * 0.97, amp, duration, sample_rate)?;
    let start = samples.len() as f64 / sample_rate as f64;
    let fade = (FADE * sample_rate as f64) as usize;
    let n = tone.len();
    samples.extend(tone.samples().iter().enumerate().map(|(i, s)| {
        let edge = i.min(n - 1 - i);
        if edge < fade {
            s * edge as f64 / fade as f64
        } else {
            *s
        }
    }));
    Ok((start, samples.len() as f64 / sample_rate as f64))
}

fn push_silence(samples: &mut Vec<f64>, duration: f64, sample_rate: u32) {
    samples.extend(std::iter::repeat_n(0.0, (duration * sample_rate as f64).round() as usize));
}

/// Five integer ratings in 1..=5 whose mean is `score` (a multiple of 0.2).
fn listener_ratings(rng: &mut ChaCha8Rng, score: f64, judges: usize) -> Vec<u8> {
    let total = (score * judges as f64).round() as i64;
    let base = total / judges as i64;
    let extra = (total - base * judges as i64) as usize;
    let mut r: Vec<i64> = (0..judges).map(|j| base + i64::from(j < extra)).collect();
    for _ in 0..2 {
        let a = rng.random_range(0..judges);
        let b = rng.random_range(0..judges);
        if a != b && r[a] < 5 && r[b] > 1 {
            r[a] += 1;
            r[b] -= 1;
        }
    }
    r.shuffle(rng);
    r.into_iter().map(|v| v as u8).collect()
}

/// Builds the study: audio, alignments, answers, self-ratings, and listener
/// ratings planted from the extracted features.
pub fn generate_study(
    config: &SyntheticConfig,
    tracker: &TrackerConfig,
) -> Result<SyntheticStudy, ExperimentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let items = items();
    let lexicon = lexicon();
    let sr = config.sample_rate;

    let speakers: Vec<Speaker> = (1..=config.speakers)
        .map(|k| Speaker {
            id: format!("s{k:02}"),
            f0: rng.random_range(95.0..230.0),
            amplitude: rng.random_range(0.25..0.5),
            syllable: rng.random_range(0.15..0.21),
        })
        .collect();

    let mut utterances = Vec::new();
    let mut wavs = Vec::new();
    let mut clips = Vec::new();
    let mut uncertain_flags = Vec::new();
    for speaker in &speakers {
        let mut order: Vec<usize> = (0..items.len()).collect();
        order.shuffle(&mut rng);
        for (pos, &it) in order.iter().enumerate() {
            let item = &items[it];
            let uncertain = rng.random_bool(config.uncertain_rate);
            let correct = rng.random_bool(if uncertain { 0.5 } else { 0.85 });
            let mut chosen = item.correct_options.clone();
            if !correct {
                let slot = rng.random_range(0..chosen.len());
                let n = item.options[slot].len();
                chosen[slot] = (chosen[slot] + rng.random_range(1..n)) % n;
            }
            let correctness = code_correctness(item, &chosen);
            let self_rating = if uncertain {
                *[1u8, 2, 2, 3].choose(&mut rng).expect("nonempty")
            } else {
                *[3u8, 4, 4, 5, 5].choose(&mut rng).expect("nonempty")
            };

            let (words, spans) = item.fill(&chosen).expect("built-in items fill");
            let control = item.control_word_span(&chosen);
            let in_slot = |w: usize| spans.iter().any(|&(s, e)| w >= s && w < e);
            let slot_start = |w: usize| spans.iter().any(|&(s, _)| s == w);

            let mut samples = Vec::new();
            push_silence(&mut samples, LEAD, sr);
            let mut times = Vec::with_capacity(words.len());
            for (w, word) in words.iter().enumerate() {
                if w > 0 {
                    let gap = if uncertain && slot_start(w) { rng.random_range(0.3..0.5) } else { GAP };
                    push_silence(&mut samples, gap, sr);
                }
                let mut dur = lexicon.syllables(word) as f64 * speaker.syllable * rng.random_range(0.9..1.1);
                if uncertain && in_slot(w) {
                    dur *= 2.0;
                }
                times.push(push_word(&mut samples, &mut rng, speaker, dur, sr)?);
            }
            push_silence(&mut samples, TRAIL, sr);
            for s in samples.iter_mut() {
                *s = (*s + rng.random_range(-NOISE..NOISE)).clamp(-1.0, 1.0);
            }

            let clip = AudioClip::new(samples, sr)?;
            let wav = encode_wav(&clip);
            let decoded = decode_wav(&wav)?;
            let span_of = |(s, e): (usize, usize)| WordSpan::aligned(s, e, times[s].0, times[e - 1].1);
            let utterance_id = format!("{}_{}", speaker.id, item.item_id);
            utterances.push(Utterance {
                audio: format!("audio/{utterance_id}.wav"),
                utterance_id,
                speaker_id: speaker.id.clone(),
                item_id: item.item_id.clone(),
                sample_rate: sr,
                transcript: words.clone(),
                target_spans: spans.iter().map(|&s| span_of(s)).collect(),
                control_span: control.map(span_of),
                chosen_options: chosen,
                correctness,
                self_rating,
                listener_ratings: vec![3; config.judges],
                presentation_ordinal: pos as u32 + 1,
            });
            wavs.push(wav);
            clips.push(decoded);
            uncertain_flags.push(uncertain);
        }
    }

    let mut manifest = Manifest {
        items,
        utterances,
        ..Manifest::default()
    };
    let corpus = Corpus::from_parts(manifest.clone(), PathBuf::from("."), clips.clone())?;
    let prepared = prepare_corpus(&corpus, &lexicon, tracker)?;

    let mut terms = Vec::new();
    for (member, direction) in planted_directions() {
        let values = prepared
            .utterances
            .iter()
            .map(|u| member_value(u, &member))
            .collect::<Result<Vec<_>, _>>()?;
        let sd = stats::sample_stdev(&values);
        terms.push((member, if sd > 0.0 { direction / sd } else { 0.0 }));
    }
    let mut planted = PlantedModel {
        terms,
        offset: 0.0,
        scale: 1.0,
    };
    let linear = prepared
        .utterances
        .iter()
        .map(|u| planted.linear_score(u))
        .collect::<Result<Vec<_>, _>>()?;
    let (lo, hi) = linear
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    planted.offset = lo;
    planted.scale = if hi > lo { 4.0 / (hi - lo) } else { 0.0 };

    for (u, lin) in manifest.utterances.iter_mut().zip(&linear) {
        let score = 1.0 + planted.scale * (lin - planted.offset);
        let quantized = ((score * 5.0).round() / 5.0).clamp(1.0, 5.0);
        u.listener_ratings = listener_ratings(&mut rng, quantized, config.judges);
    }

    Ok(SyntheticStudy {
        manifest,
        lexicon,
        wavs,
        clips,
        uncertain: uncertain_flags,
        planted,
    })
}
