//! Manifest loading and validation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::Value;

use super::{
    code_correctness, CorpusError, Item, Manifest, Utterance, WordSpan, SCHEMA_VERSION,
    SLOT_MARKER,
};
use crate::audio::{decode_wav, AudioClip};

/// A validated manifest together with its decoded recordings.
#[derive(Debug, Clone)]
pub struct Corpus {
    manifest: Manifest,
    root: PathBuf,
    clips: Vec<AudioClip>,
    item_index: HashMap<String, usize>,
}

/// Loads, validates, and decodes every recording referenced by the manifest.
/// Audio paths resolve relative to the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Corpus, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let manifest = parse_manifest(&text)?;
    let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let clips = manifest
        .utterances
        .par_iter()
        .map(|u| read_clip(&root, u))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Corpus::from_parts(manifest, root, clips)
}

fn read_clip(root: &Path, u: &Utterance) -> Result<AudioClip, CorpusError> {
    let path = root.join(&u.audio);
    let bytes = std::fs::read(&path).map_err(|_| CorpusError::MissingAudio {
        utterance_id: u.utterance_id.clone(),
        path: path.display().to_string(),
    })?;
    decode_wav(&bytes).map_err(|source| CorpusError::AudioRejected {
        utterance_id: u.utterance_id.clone(),
        source,
    })
}

/// Parses manifest JSON and checks every structural rule that does not need
/// the audio.
pub fn parse_manifest(text: &str) -> Result<Manifest, CorpusError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| CorpusError::schema("", format!("invalid JSON: {e}")))?;
    check_rating_ranges(&value)?;
    let manifest: Manifest = serde_path_to_error::deserialize(value).map_err(|e| {
        CorpusError::schema(e.path().to_string(), e.inner().to_string())
    })?;
    validate_manifest(&manifest)?;
    Ok(manifest)
}

/// Reports out-of-range integer ratings before typed parsing would turn
/// them into generic type errors.
fn check_rating_ranges(value: &Value) -> Result<(), CorpusError> {
    let Some(utts) = value.get("utterances").and_then(Value::as_array) else {
        return Ok(());
    };
    let check = |path: String, v: &Value| match v.as_i64() {
        Some(r) if !(1..=5).contains(&r) => Err(CorpusError::RatingOutOfRange { path, value: r }),
        _ => Ok(()),
    };
    for (i, u) in utts.iter().enumerate() {
        if let Some(v) = u.get("self_rating") {
            check(format!("utterances[{i}].self_rating"), v)?;
        }
        if let Some(list) = u.get("listener_ratings").and_then(Value::as_array) {
            for (j, v) in list.iter().enumerate() {
                check(format!("utterances[{i}].listener_ratings[{j}]"), v)?;
            }
        }
    }
    Ok(())
}

fn validate_item(i: usize, item: &Item) -> Result<(), CorpusError> {
    let at = |field: &str| format!("items[{i}].{field}");
    let slots = item.slot_count();
    if item.item_id.is_empty() {
        return Err(CorpusError::schema(at("item_id"), "must not be empty"));
    }
    if slots == 0 {
        return Err(CorpusError::schema(at("context_text"), "no slot marker"));
    }
    if item.context_tokens().iter().any(|t| t.matches(SLOT_MARKER).count() > 1) {
        return Err(CorpusError::schema(at("context_text"), "two slots in one token"));
    }
    if item.options.len() != slots {
        return Err(CorpusError::schema(
            at("options"),
            format!("{} option lists for {slots} slots", item.options.len()),
        ));
    }
    for (s, opts) in item.options.iter().enumerate() {
        if opts.len() < 2 {
            return Err(CorpusError::schema(
                format!("items[{i}].options[{s}]"),
                "a slot needs at least 2 options",
            ));
        }
        if opts.iter().any(|o| o.split_whitespace().next().is_none()) {
            return Err(CorpusError::schema(format!("items[{i}].options[{s}]"), "empty option"));
        }
    }
    if item.correct_options.len() != slots
        || item.correct_options.iter().zip(&item.options).any(|(&c, o)| c >= o.len())
    {
        return Err(CorpusError::schema(at("correct_options"), "one valid option index per slot required"));
    }
    if let Some(cw) = &item.control_word {
        let tokens = item.context_tokens();
        match tokens.get(cw.word_index) {
            None => return Err(CorpusError::schema(at("control_word.word_index"), "out of range")),
            Some(t) if t.contains(SLOT_MARKER) => {
                return Err(CorpusError::schema(at("control_word.word_index"), "points at a slot"))
            }
            _ => {}
        }
    }
    Ok(())
}

fn validate_span(at: &str, span: &WordSpan, words: usize) -> Result<(), CorpusError> {
    if span.start_word >= span.end_word || span.end_word > words {
        return Err(CorpusError::schema(at, "word span must be non-empty and inside the transcript"));
    }
    if span.start_s.is_some() != span.end_s.is_some() {
        return Err(CorpusError::schema(at, "time alignment needs both start_s and end_s"));
    }
    if let Some((s, e)) = span.time() {
        if !(s.is_finite() && e.is_finite() && 0.0 <= s && s < e) {
            return Err(CorpusError::schema(at, "time span must satisfy 0 <= start_s < end_s"));
        }
    }
    Ok(())
}

/// Checks cross-references and invariants of a parsed manifest.
pub fn validate_manifest(m: &Manifest) -> Result<(), CorpusError> {
    if m.schema != SCHEMA_VERSION {
        return Err(CorpusError::schema(
            "schema",
            format!("expected `{SCHEMA_VERSION}`, found `{}`", m.schema),
        ));
    }
    let mut items = HashMap::new();
    for (i, item) in m.items.iter().enumerate() {
        validate_item(i, item)?;
        if items.insert(item.item_id.as_str(), item).is_some() {
            return Err(CorpusError::schema(format!("items[{i}].item_id"), "duplicate id"));
        }
    }
    let mut ids = BTreeSet::new();
    let mut ordinals: BTreeMap<(&str, u32), usize> = BTreeMap::new();
    for (i, u) in m.utterances.iter().enumerate() {
        let at = |field: &str| format!("utterances[{i}].{field}");
        if u.utterance_id.is_empty() || !ids.insert(u.utterance_id.as_str()) {
            return Err(CorpusError::schema(at("utterance_id"), "empty or duplicate id"));
        }
        if u.speaker_id.is_empty() {
            return Err(CorpusError::schema(at("speaker_id"), "must not be empty"));
        }
        let item = items
            .get(u.item_id.as_str())
            .ok_or_else(|| CorpusError::schema(at("item_id"), format!("unknown item `{}`", u.item_id)))?;
        if u.listener_ratings.is_empty() {
            return Err(CorpusError::schema(at("listener_ratings"), "at least one rating required"));
        }
        if u.presentation_ordinal == 0 {
            return Err(CorpusError::schema(at("presentation_ordinal"), "ordinals are 1-based"));
        }
        if ordinals.insert((u.speaker_id.as_str(), u.presentation_ordinal), i).is_some() {
            return Err(CorpusError::schema(at("presentation_ordinal"), "duplicate ordinal for speaker"));
        }
        if u.chosen_options.len() != item.slot_count()
            || u.chosen_options.iter().zip(&item.options).any(|(&c, o)| c >= o.len())
        {
            return Err(CorpusError::schema(at("chosen_options"), "one valid option index per slot required"));
        }
        if code_correctness(item, &u.chosen_options) != u.correctness {
            return Err(CorpusError::schema(at("correctness"), "disagrees with chosen_options"));
        }
        if u.transcript.is_empty() {
            return Err(CorpusError::schema(at("transcript"), "must not be empty"));
        }
        if u.target_spans.len() != item.slot_count() {
            return Err(CorpusError::schema(at("target_spans"), "one span per slot required"));
        }
        for (s, span) in u.target_spans.iter().enumerate() {
            validate_span(&format!("utterances[{i}].target_spans[{s}]"), span, u.transcript.len())?;
        }
        for (s, pair) in u.target_spans.windows(2).enumerate() {
            if pair[1].start_word < pair[0].end_word {
                return Err(CorpusError::schema(
                    format!("utterances[{i}].target_spans[{}]", s + 1),
                    "spans must be ordered and non-overlapping",
                ));
            }
            if let (Some((_, e0)), Some((s1, _))) = (pair[0].time(), pair[1].time()) {
                if s1 < e0 {
                    return Err(CorpusError::schema(
                        format!("utterances[{i}].target_spans[{}]", s + 1),
                        "time spans overlap",
                    ));
                }
            }
        }
        if let Some(span) = &u.control_span {
            validate_span(&at("control_span"), span, u.transcript.len())?;
            if u.target_spans
                .iter()
                .any(|t| span.start_word < t.end_word && t.start_word < span.end_word)
            {
                return Err(CorpusError::schema(at("control_span"), "overlaps a target span"));
            }
        }
    }
    Ok(())
}

fn check_clip(i: usize, u: &Utterance, clip: &AudioClip) -> Result<(), CorpusError> {
    if clip.sample_rate() != u.sample_rate {
        return Err(CorpusError::schema(
            format!("utterances[{i}].sample_rate"),
            format!("manifest says {} Hz, audio is {} Hz", u.sample_rate, clip.sample_rate()),
        ));
    }
    let duration = clip.duration();
    let spans = u.target_spans.iter().map(|s| ("target_spans", s));
    for (field, span) in spans.chain(u.control_span.iter().map(|s| ("control_span", s))) {
        if let Some((_, e)) = span.time() {
            if e > duration + 1e-9 {
                return Err(CorpusError::schema(
                    format!("utterances[{i}].{field}"),
                    format!("ends at {e} s beyond clip duration {duration} s"),
                ));
            }
        }
    }
    Ok(())
}

impl Corpus {
    /// Builds a corpus from an in-memory manifest and clips aligned with its
    /// utterances.
    pub fn from_parts(
        manifest: Manifest,
        root: PathBuf,
        clips: Vec<AudioClip>,
    ) -> Result<Self, CorpusError> {
        validate_manifest(&manifest)?;
        if clips.len() != manifest.utterances.len() {
            return Err(CorpusError::schema(
                "utterances",
                format!("{} clips for {} utterances", clips.len(), manifest.utterances.len()),
            ));
        }
        for (i, (u, clip)) in manifest.utterances.iter().zip(&clips).enumerate() {
            check_clip(i, u, clip)?;
        }
        let item_index = manifest
            .items
            .iter()
            .enumerate()
            .map(|(i, it)| (it.item_id.clone(), i))
            .collect();
        Ok(Self {
            manifest,
            root,
            clips,
            item_index,
        })
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn utterances(&self) -> &[Utterance] {
        &self.manifest.utterances
    }

    pub fn items(&self) -> &[Item] {
        &self.manifest.items
    }

    pub fn clips(&self) -> &[AudioClip] {
        &self.clips
    }

    pub fn clip(&self, index: usize) -> &AudioClip {
        &self.clips[index]
    }

    pub fn item(&self, item_id: &str) -> Option<&Item> {
        self.item_index.get(item_id).map(|&i| &self.manifest.items[i])
    }

    pub fn item_for(&self, u: &Utterance) -> &Item {
        self.item(&u.item_id).expect("validated item reference")
    }

    /// Distinct speaker ids in sorted order.
    pub fn speakers(&self) -> Vec<String> {
        self.manifest
            .utterances
            .iter()
            .map(|u| u.speaker_id.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn len(&self) -> usize {
        self.manifest.utterances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.manifest.utterances.is_empty()
    }
}
