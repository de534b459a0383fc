//! Evaluation protocols: leave-one-speaker-out perceived-certainty
//! regression, the self-report triage classifier, per-scope correlations,
//! uncertainty localization, and listener agreement.
//!
//! Every protocol consumes a [`PreparedCorpus`], which holds the normalized
//! segmented features of each utterance under both the slot segmentation and
//! (where marked) the control-word segmentation.

mod agreement;
mod correlations;
mod folds;
mod localize;
mod perceived;
mod prepare;
mod report;
mod triage;

pub use agreement::{run_agreement, AgreementReport};
pub use correlations::{combination_set, run_correlations, CorrelationReport, CorrelationRow};
pub use folds::{make_loso_folds, Fold, FoldPlan};
pub use localize::{
    choose_lower, localize_uncertainty, run_localization, Choice, LocalizationConfig,
    LocalizationOutcome, LocalizationReport, LocalizedUtterance, UNCERTAIN_BELOW,
};
pub use perceived::{
    run_perceived_experiment, Learner, PerceivedConfig, PerceivedFold, PerceivedReport,
    ScatterPoint,
};
pub use prepare::{
    analyze_clip, prepare_corpus, prepare_with_analyses, Analysis, ControlSegmentation,
    PreparedCorpus, PreparedUtterance,
};
pub use report::{ExperimentKind, ExperimentReport, ReportBody, REPORT_FORMAT};
pub use triage::{
    assign_triage_subset, run_triage_experiment, SubsetResult, TreeFold, TriageReport, TriageSubset,
};

use thiserror::Error;

use crate::audio::AudioError;
use crate::corpus::{CodingError, CorpusError};
use crate::featuresets::FeatureSetError;
use crate::models::ModelError;
use crate::prosody::ProsodyError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("need at least two speakers, found {0}")]
    TooFewSpeakers(usize),
    #[error("fold for speaker {speaker} trains on its own utterances")]
    LeakedSpeaker { speaker: String },
    #[error("utterance {utterance_id}: {source}")]
    Prosody {
        utterance_id: String,
        #[source]
        source: ProsodyError,
    },
    #[error("speaker {speaker}: {source}")]
    Normalization {
        speaker: String,
        #[source]
        source: ProsodyError,
    },
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    FeatureSet(#[from] FeatureSetError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error("no control word marked for uncertain utterances: {}", .0.join(", "))]
    MissingControlWord(Vec<String>),
    #[error("utterance {utterance_id} has perceived mean {perceived:.2}, not below 2.5")]
    NotUncertainEnough { utterance_id: String, perceived: f64 },
    #[error("no utterances eligible for {0}")]
    NoEligibleUtterances(String),
    #[error("expected {expected} precomputed analyses, got {actual}")]
    AnalysisCount { expected: usize, actual: usize },
    #[error("utterance {0} does not have the same number of listener ratings as the others")]
    RaggedRatings(String),
}
