use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::audio::AudioClip;
use crate::corpus::{
    nonprosodic_features_for_span, Corpus, Correctness, Lexicon, NonprosodicFeatureVector,
    Utterance,
};
use crate::featuresets::{segment_features, SegmentNormalizer, SegmentedFeatures};
use crate::prosody::{detect_silence, extract_contour, Contour, Interval, ProsodyError, TrackerConfig};

/// Tracker output for one clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub contour: Contour,
    pub silences: Vec<Interval>,
}

pub fn analyze_clip(clip: &AudioClip, config: &TrackerConfig) -> Result<Analysis, ProsodyError> {
    let contour = extract_contour(clip, config)?;
    let silences = detect_silence(&contour, config);
    Ok(Analysis { contour, silences })
}

/// Features of the control word treated as the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSegmentation {
    pub features: SegmentedFeatures,
    pub nonprosodic: NonprosodicFeatureVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedUtterance {
    pub utterance_id: String,
    pub speaker_id: String,
    pub item_id: String,
    pub perceived_mean: f64,
    pub self_rating: u8,
    pub correctness: Correctness,
    pub single_target: bool,
    /// Unnormalized features under the slot segmentation.
    pub raw: SegmentedFeatures,
    /// Speaker-normalized features under the slot segmentation.
    pub features: SegmentedFeatures,
    /// Lexical features of the first slot.
    pub nonprosodic: Option<NonprosodicFeatureVector>,
    /// Normalized with the statistics of the slot segmentation.
    pub control: Option<ControlSegmentation>,
}

/// Feature-ready corpus in manifest order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedCorpus {
    pub utterances: Vec<PreparedUtterance>,
}

impl PreparedCorpus {
    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }

    pub fn speaker_of(&self) -> Vec<&str> {
        self.utterances.iter().map(|u| u.speaker_id.as_str()).collect()
    }
}

/// Runs the tracker over every clip in parallel, then segments and
/// normalizes.
pub fn prepare_corpus(
    corpus: &Corpus,
    lexicon: &Lexicon,
    config: &TrackerConfig,
) -> Result<PreparedCorpus, ExperimentError> {
    config.validate().map_err(|source| ExperimentError::Prosody {
        utterance_id: String::new(),
        source,
    })?;
    let analyses = corpus
        .utterances()
        .par_iter()
        .zip(corpus.clips().par_iter())
        .map(|(u, clip)| {
            analyze_clip(clip, config).map_err(|source| ExperimentError::Prosody {
                utterance_id: u.utterance_id.clone(),
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    prepare_with_analyses(corpus, lexicon, &analyses)
}

/// Like [`prepare_corpus`] with tracker output supplied by the caller, one
/// analysis per utterance in manifest order.
pub fn prepare_with_analyses(
    corpus: &Corpus,
    lexicon: &Lexicon,
    analyses: &[Analysis],
) -> Result<PreparedCorpus, ExperimentError> {
    let utterances = corpus.utterances();
    if analyses.len() != utterances.len() {
        return Err(ExperimentError::AnalysisCount {
            expected: utterances.len(),
            actual: analyses.len(),
        });
    }
    let history: Vec<&Utterance> = utterances.iter().collect();

    let segmented = utterances
        .par_iter()
        .zip(analyses.par_iter())
        .map(|(u, a)| {
            let actual = segment_features(u, &u.target_spans, &a.contour, &a.silences, lexicon)?;
            let control = match &u.control_span {
                Some(span) => Some((
                    segment_features(u, std::slice::from_ref(span), &a.contour, &a.silences, lexicon)?,
                    nonprosodic_features_for_span(u, span, lexicon, &history),
                )),
                None => None,
            };
            let nonprosodic = u
                .target_spans
                .first()
                .map(|span| nonprosodic_features_for_span(u, span, lexicon, &history));
            Ok((actual, control, nonprosodic))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;

    let mut by_speaker: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, u) in utterances.iter().enumerate() {
        by_speaker.entry(&u.speaker_id).or_default().push(i);
    }
    let mut normalizers = BTreeMap::new();
    for (speaker, rows) in &by_speaker {
        let raw: Vec<&SegmentedFeatures> = rows.iter().map(|&i| &segmented[i].0).collect();
        let norm = SegmentNormalizer::fit(&raw).map_err(|source| ExperimentError::Normalization {
            speaker: speaker.to_string(),
            source,
        })?;
        normalizers.insert(*speaker, norm);
    }

    let mut out = Vec::with_capacity(utterances.len());
    for (u, (raw, control, nonprosodic)) in utterances.iter().zip(segmented) {
        let norm = &normalizers[u.speaker_id.as_str()];
        let normalize = |s: &SegmentedFeatures| {
            norm.apply(s).map_err(|source| ExperimentError::Normalization {
                speaker: u.speaker_id.clone(),
                source,
            })
        };
        let features = normalize(&raw)?;
        let control = match control {
            Some((seg, np)) => Some(ControlSegmentation {
                features: normalize(&seg)?,
                nonprosodic: np,
            }),
            None => None,
        };
        out.push(PreparedUtterance {
            utterance_id: u.utterance_id.clone(),
            speaker_id: u.speaker_id.clone(),
            item_id: u.item_id.clone(),
            perceived_mean: u.perceived_mean(),
            self_rating: u.self_rating,
            correctness: u.correctness,
            single_target: u.is_single_target(),
            raw,
            features,
            nonprosodic,
            control,
        });
    }
    Ok(PreparedCorpus { utterances: out })
}
