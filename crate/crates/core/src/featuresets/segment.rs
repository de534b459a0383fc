//! Splitting an utterance into target and context segments.

use serde::{Deserialize, Serialize};

use super::FeatureSetError;
use crate::corpus::{Lexicon, Utterance, WordSpan};
use crate::prosody::{
    aggregate_features, Contour, Interval, ProsodicFeatureVector, ProsodyError, Scope,
    SpeakerNormalizer,
};

/// The three scoped feature vectors of one utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentedFeatures {
    pub utterance_id: String,
    pub utterance: ProsodicFeatureVector,
    pub context: ProsodicFeatureVector,
    pub target: ProsodicFeatureVector,
}

impl SegmentedFeatures {
    pub fn scope(&self, scope: Scope) -> &ProsodicFeatureVector {
        match scope {
            Scope::Utterance => &self.utterance,
            Scope::Context => &self.context,
            Scope::Target => &self.target,
        }
    }
}

/// Time intervals making up each scope.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentIntervals {
    pub utterance: Interval,
    pub context: Vec<Interval>,
    pub target: Vec<Interval>,
}

/// Computes target and context intervals.
///
/// Each target is extended leftward over a silence run that ends at (or
/// within `tolerance` of) its start, so pauses belong to the word they
/// precede. The context is whatever remains of the clip.
pub fn segment_intervals(
    utterance_id: &str,
    duration: f64,
    targets: &[(f64, f64)],
    silences: &[Interval],
    tolerance: f64,
) -> Result<SegmentIntervals, FeatureSetError> {
    let mut effective: Vec<Interval> = Vec::with_capacity(targets.len());
    let mut sorted = targets.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    for &(start, end) in &sorted {
        if !(start >= 0.0 && start < end && end <= duration + 1e-9) {
            return Err(FeatureSetError::TargetSpanOutsideClip {
                utterance_id: utterance_id.to_string(),
                start,
                end,
                duration,
            });
        }
        let floor = effective.last().map_or(0.0, |p| p.end);
        let absorbed = silences
            .iter()
            .filter(|s| s.start < start && s.end >= start - tolerance)
            .map(|s| s.start)
            .fold(start, f64::min)
            .max(floor);
        effective.push(Interval::new(absorbed, end.min(duration)));
    }

    let mut context = Vec::new();
    let mut cursor = 0.0;
    for t in &effective {
        if t.start > cursor + 1e-9 {
            context.push(Interval::new(cursor, t.start));
        }
        cursor = cursor.max(t.end);
    }
    if duration > cursor + 1e-9 {
        context.push(Interval::new(cursor, duration));
    }
    if context.is_empty() {
        return Err(FeatureSetError::ContextEmpty(utterance_id.to_string()));
    }
    Ok(SegmentIntervals {
        utterance: Interval::new(0.0, duration),
        context,
        target: effective,
    })
}

/// Extracts utterance, context, and target features, treating `spans` as
/// the target words. Passing the control-word span yields the alternative
/// segmentation used for localization.
pub fn segment_features(
    utterance: &Utterance,
    spans: &[WordSpan],
    contour: &Contour,
    silences: &[Interval],
    lexicon: &Lexicon,
) -> Result<SegmentedFeatures, FeatureSetError> {
    let id = &utterance.utterance_id;
    let times = spans
        .iter()
        .map(|s| s.time().ok_or_else(|| FeatureSetError::MissingAlignment(id.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let segs = segment_intervals(id, contour.duration, &times, silences, contour.hop)?;

    let syllables = |words: &[String]| words.iter().map(|w| lexicon.syllables(w)).sum::<u32>();
    let total_syl = syllables(&utterance.transcript).max(1);
    let target_syl: u32 = spans
        .iter()
        .map(|s| {
            let end = s.end_word.min(utterance.transcript.len());
            syllables(&utterance.transcript[s.start_word.min(end)..end])
        })
        .sum::<u32>()
        .max(1);
    let context_syl = total_syl.saturating_sub(target_syl).max(1);

    let aggregate = |scope, pieces: &[Interval], syl| {
        aggregate_features(contour, scope, pieces, silences, syl).map_err(|source| {
            if scope == Scope::Context && source == ProsodyError::EmptyInterval {
                FeatureSetError::ContextEmpty(id.clone())
            } else {
                FeatureSetError::Prosody {
                    utterance_id: id.clone(),
                    scope,
                    source,
                }
            }
        })
    };
    Ok(SegmentedFeatures {
        utterance_id: id.clone(),
        utterance: aggregate(Scope::Utterance, &[segs.utterance], total_syl)?,
        context: aggregate(Scope::Context, &segs.context, context_syl)?,
        target: aggregate(Scope::Target, &segs.target, target_syl)?,
    })
}

/// Per-speaker normalizers for all three scopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentNormalizer {
    pub utterance: SpeakerNormalizer,
    pub context: SpeakerNormalizer,
    pub target: SpeakerNormalizer,
}

impl SegmentNormalizer {
    /// Fits on one speaker's unnormalized segmented features.
    pub fn fit(rows: &[&SegmentedFeatures]) -> Result<Self, ProsodyError> {
        let collect = |scope| rows.iter().map(|r| r.scope(scope).clone()).collect::<Vec<_>>();
        Ok(Self {
            utterance: SpeakerNormalizer::fit(&collect(Scope::Utterance))?,
            context: SpeakerNormalizer::fit(&collect(Scope::Context))?,
            target: SpeakerNormalizer::fit(&collect(Scope::Target))?,
        })
    }

    pub fn apply(&self, row: &SegmentedFeatures) -> Result<SegmentedFeatures, ProsodyError> {
        Ok(SegmentedFeatures {
            utterance_id: row.utterance_id.clone(),
            utterance: self.utterance.apply(&row.utterance)?,
            context: self.context.apply(&row.context)?,
            target: self.target.apply(&row.target)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{synthesize_tone, AudioClip};
    use crate::corpus::Correctness;
    use crate::prosody::{detect_silence, extract_contour, FeatureId, TrackerConfig};
    use proptest::prelude::*;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b)
    }

    #[test]
    fn preceding_pause_joins_target() {
        let s = segment_intervals("u", 2.0, &[(1.0, 1.5)], &[iv(0.8, 1.0)], 0.01).unwrap();
        assert_eq!(s.target, vec![iv(0.8, 1.5)]);
        assert_eq!(s.context, vec![iv(0.0, 0.8), iv(1.5, 2.0)]);
    }

    #[test]
    fn pause_inside_context_leaves_target_alone() {
        let s = segment_intervals("u", 2.0, &[(1.0, 1.5)], &[iv(0.2, 0.4), iv(1.6, 1.8)], 0.01).unwrap();
        assert_eq!(s.target, vec![iv(1.0, 1.5)]);
    }

    #[test]
    fn pause_ending_within_tolerance_is_absorbed() {
        let s = segment_intervals("u", 2.0, &[(1.0, 1.5)], &[iv(0.7, 0.995)], 0.01).unwrap();
        assert_eq!(s.target, vec![iv(0.7, 1.5)]);
    }

    #[test]
    fn whole_clip_target_leaves_no_context() {
        assert_eq!(
            segment_intervals("u", 2.0, &[(0.0, 2.0)], &[], 0.01),
            Err(FeatureSetError::ContextEmpty("u".into()))
        );
    }

    #[test]
    fn target_outside_clip() {
        assert!(matches!(
            segment_intervals("u", 2.0, &[(1.5, 2.5)], &[], 0.01),
            Err(FeatureSetError::TargetSpanOutsideClip { .. })
        ));
    }

    #[test]
    fn absorption_stops_at_previous_target() {
        let s = segment_intervals("u", 3.0, &[(0.5, 1.0), (1.5, 2.0)], &[iv(0.9, 1.5)], 0.01).unwrap();
        assert_eq!(s.target, vec![iv(0.5, 1.0), iv(1.0, 2.0)]);
        assert_eq!(s.context, vec![iv(0.0, 0.5), iv(2.0, 3.0)]);
    }

    proptest! {
        #[test]
        fn scopes_partition_the_clip(start in 0.05f64..1.5, len in 0.05f64..0.4,
                                     sil in prop::collection::vec((0.0f64..2.0, 0.1f64..0.3), 0..3)) {
            let mut silences: Vec<Interval> = sil.iter().map(|&(a, l)| iv(a, (a + l).min(2.0))).collect();
            silences.sort_by(|a, b| a.start.total_cmp(&b.start));
            let end = (start + len).min(1.95);
            let s = segment_intervals("u", 2.0, &[(start, end)], &silences, 0.01).unwrap();
            let total: f64 = s.context.iter().chain(&s.target).map(Interval::len).sum();
            prop_assert!((total - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn segmented_durations_add_up_on_audio() {
        let sr = 16000;
        let clip = AudioClip::concat(&[
            synthesize_tone(180.0, 0.4, 0.8, sr).unwrap(),
            AudioClip::silence(0.3, sr).unwrap(),
            synthesize_tone(150.0, 0.4, 0.5, sr).unwrap(),
            synthesize_tone(200.0, 0.4, 0.4, sr).unwrap(),
        ])
        .unwrap();
        let cfg = TrackerConfig::default();
        let contour = extract_contour(&clip, &cfg).unwrap();
        let silences = detect_silence(&contour, &cfg);
        let u = Utterance {
            utterance_id: "u".into(),
            speaker_id: "s".into(),
            item_id: "i".into(),
            audio: String::new(),
            sample_rate: sr,
            transcript: ["take", "the", "red", "line"].map(String::from).to_vec(),
            target_spans: vec![WordSpan::aligned(2, 3, 1.1, 1.6)],
            control_span: None,
            chosen_options: vec![0],
            correctness: Correctness::Correct,
            self_rating: 3,
            listener_ratings: vec![3],
            presentation_ordinal: 1,
        };
        let lex = Lexicon::default();
        let seg = segment_features(&u, &u.target_spans, &contour, &silences, &lex).unwrap();
        let d = |v: &ProsodicFeatureVector| v.get(FeatureId::DurationTotal).unwrap();
        assert!((d(&seg.context) + d(&seg.target) - d(&seg.utterance)).abs() <= contour.hop);
        let target_silence = seg.target.get(FeatureId::SilenceTotal).unwrap();
        assert!((target_silence - 0.3).abs() <= contour.hop, "{target_silence}");
        assert_eq!(seg.context.get(FeatureId::SilenceTotal), Some(0.0));
    }
}
