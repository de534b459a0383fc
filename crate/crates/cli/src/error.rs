use certainty_core::corpus::{CorpusError, LexiconError};
use certainty_core::experiments::ExperimentError;
use certainty_core::featuresets::FeatureSetError;
use certainty_core::prosody::ProsodyError;
use certainty_service::ServiceError;
use serde_json::{json, Map, Value};
use thiserror::Error;

/// Exit status for every failure.
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    FeatureSet(#[from] FeatureSetError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("tracker configuration: {0}")]
    Tracker(#[from] ProsodyError),
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub(crate) fn io(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Self + '_ {
        move |source| Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Machine-readable code plus structured details.
    pub fn describe(&self) -> (&'static str, Map<String, Value>) {
        let mut details = Map::new();
        let code = match self {
            Self::Corpus(e) | Self::Experiment(ExperimentError::Corpus(e)) => corpus_code(e, &mut details),
            Self::Experiment(e) => match e {
                ExperimentError::MissingControlWord(ids) => {
                    details.insert("utterances".into(), json!(ids));
                    "missing_control_word"
                }
                ExperimentError::TooFewSpeakers(_) => "too_few_speakers",
                ExperimentError::LeakedSpeaker { .. } => "leaked_speaker",
                ExperimentError::Prosody { utterance_id, .. } => {
                    details.insert("utterance_id".into(), json!(utterance_id));
                    "prosody"
                }
                ExperimentError::Normalization { speaker, .. } => {
                    details.insert("speaker_id".into(), json!(speaker));
                    "normalization"
                }
                ExperimentError::NotUncertainEnough { utterance_id, .. } => {
                    details.insert("utterance_id".into(), json!(utterance_id));
                    "not_uncertain_enough"
                }
                ExperimentError::NoEligibleUtterances(_) => "no_eligible_utterances",
                ExperimentError::RaggedRatings(id) => {
                    details.insert("utterance_id".into(), json!(id));
                    "ragged_ratings"
                }
                ExperimentError::FeatureSet(_) => "feature_set",
                ExperimentError::Model(_) => "model",
                ExperimentError::Audio(_) => "audio_rejected",
                ExperimentError::Coding(_) => "coding",
                ExperimentError::AnalysisCount { .. } => "analysis_count",
                ExperimentError::Corpus(_) => unreachable!("matched above"),
            },
            Self::FeatureSet(_) => "feature_set",
            Self::Lexicon(_) => "lexicon",
            Self::Tracker(_) => "invalid_config",
            Self::Service(e) => e.code(),
            Self::Io { path, .. } => {
                details.insert("path".into(), json!(path));
                "io"
            }
            Self::Config(_) => "invalid_config",
            Self::Usage(_) => "usage",
        };
        (code, details)
    }

    /// The single-line JSON diagnostic written to stderr.
    pub fn to_json_line(&self) -> String {
        let (code, mut body) = self.describe();
        body.insert("error".into(), json!(code));
        body.insert("message".into(), json!(self.to_string()));
        serde_json::to_string(&body).expect("diagnostic serializes")
    }
}

fn corpus_code(e: &CorpusError, details: &mut Map<String, Value>) -> &'static str {
    match e {
        CorpusError::SchemaViolation { path, .. } => {
            details.insert("path".into(), json!(path));
            "schema_violation"
        }
        CorpusError::RatingOutOfRange { path, .. } => {
            details.insert("path".into(), json!(path));
            "rating_out_of_range"
        }
        CorpusError::MissingAudio { utterance_id, .. } => {
            details.insert("utterance_id".into(), json!(utterance_id));
            "missing_audio"
        }
        CorpusError::AudioRejected { utterance_id, .. } => {
            details.insert("utterance_id".into(), json!(utterance_id));
            "audio_rejected"
        }
        CorpusError::MultipleTargets(id) => {
            details.insert("utterance_id".into(), json!(id));
            "multiple_targets"
        }
        CorpusError::Io { path, .. } => {
            details.insert("path".into(), json!(path));
            "io"
        }
    }
}
