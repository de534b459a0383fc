use super::{Contour, FeatureId, Interval, ProsodicFeatureVector, ProsodyError, Scope, FEATURE_COUNT};
use crate::stats;

/// Reference frequency for the semitone scale.
const SEMITONE_REF_HZ: f64 = 100.0;

/// Summarizes the frames whose centers fall inside `pieces` into the 20
/// prosodic features.
///
/// `pieces` are disjoint, ordered intervals that together form one scope (a
/// context split around a target word has two). Statistics pool the frames of
/// every piece; relative positions are measured against the span from the
/// first piece's start to the last piece's end.
pub fn aggregate_features(
    contour: &Contour,
    scope: Scope,
    pieces: &[Interval],
    silences: &[Interval],
    syllable_count: u32,
) -> Result<ProsodicFeatureVector, ProsodyError> {
    let (Some(first), Some(last)) = (pieces.first(), pieces.last()) else {
        return Err(ProsodyError::DegenerateInterval { start: 0.0, end: 0.0 });
    };
    if let Some(bad) = pieces.iter().find(|p| p.is_empty() || !p.start.is_finite()) {
        return Err(ProsodyError::DegenerateInterval {
            start: bad.start,
            end: bad.end,
        });
    }
    if syllable_count == 0 {
        return Err(ProsodyError::InvalidSyllableCount);
    }
    let span_start = first.start;
    let span_len = last.end - first.start;
    let relpos = |t: f64| ((t - span_start) / span_len).clamp(0.0, 1.0);

    let frames: Vec<_> = contour
        .frames
        .iter()
        .filter(|f| pieces.iter().any(|p| p.contains(f.time)))
        .collect();
    if frames.is_empty() {
        return Err(ProsodyError::EmptyInterval);
    }

    let mut v = [None; FEATURE_COUNT];
    let mut put = |id: FeatureId, x: f64| v[id.index()] = Some(x);

    let voiced: Vec<(f64, f64)> = frames
        .iter()
        .filter_map(|f| f.f0.map(|f0| (f.time, f0)))
        .collect();
    if !voiced.is_empty() {
        let f0: Vec<f64> = voiced.iter().map(|&(_, f)| f).collect();
        let times: Vec<f64> = voiced.iter().map(|&(t, _)| t).collect();
        let (imin, min) = stats::argmin(&f0);
        let (imax, max) = stats::argmax(&f0);
        put(FeatureId::F0Min, min);
        put(FeatureId::F0Max, max);
        put(FeatureId::F0Mean, stats::mean(&f0));
        put(FeatureId::F0Stdev, stats::sample_stdev(&f0));
        put(FeatureId::F0Range, max - min);
        put(FeatureId::F0RelposMin, relpos(times[imin]));
        put(FeatureId::F0RelposMax, relpos(times[imax]));
        put(FeatureId::F0AbsSlopeHz, stats::ols_slope(&times, &f0).abs());
        let semis: Vec<f64> = f0
            .iter()
            .map(|f| 12.0 * (f / SEMITONE_REF_HZ).log2())
            .collect();
        put(FeatureId::F0AbsSlopeSemi, stats::ols_slope(&times, &semis).abs());
    }

    let rms: Vec<f64> = frames.iter().map(|f| f.rms).collect();
    let (imin, min) = stats::argmin(&rms);
    let (imax, max) = stats::argmax(&rms);
    put(FeatureId::RmsMin, min);
    put(FeatureId::RmsMax, max);
    put(FeatureId::RmsMean, stats::mean(&rms));
    put(FeatureId::RmsStdev, stats::sample_stdev(&rms));
    put(FeatureId::RmsRelposMin, relpos(frames[imin].time));
    put(FeatureId::RmsRelposMax, relpos(frames[imax].time));

    let total: f64 = pieces.iter().map(Interval::len).sum();
    let silence: f64 = pieces
        .iter()
        .flat_map(|p| silences.iter().map(move |s| p.overlap(s)))
        .sum::<f64>()
        .min(total);
    let speaking = total - silence;
    if speaking <= 1e-12 {
        return Err(ProsodyError::NoSpeech);
    }
    put(FeatureId::SilenceTotal, silence);
    put(FeatureId::SilencePercent, silence / total);
    put(FeatureId::DurationTotal, total);
    put(FeatureId::DurationSpeaking, speaking);
    put(FeatureId::SpeakingRate, syllable_count as f64 / speaking);

    Ok(ProsodicFeatureVector::new(scope, v))
}
