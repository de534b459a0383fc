//! Model input construction: segment-scoped prosodic features, named feature
//! sets, and the correlation analysis behind the combination set.

mod correlation;
mod segment;
mod spec;

pub use correlation::{
    correlation_table, select_combination_set, select_combination_set_from, CorrelationCell,
    CorrelationTable,
};
pub use segment::{segment_features, segment_intervals, SegmentIntervals, SegmentNormalizer, SegmentedFeatures};
pub use spec::{assemble_inputs, FeatureSetSpec, Member, SetId};

use thiserror::Error;

use crate::prosody::{FeatureId, ProsodyError, Scope};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureSetError {
    #[error("utterance {0}: target span has no time alignment")]
    MissingAlignment(String),
    #[error("utterance {utterance_id}: target span [{start}, {end}) lies outside the {duration} s clip")]
    TargetSpanOutsideClip {
        utterance_id: String,
        start: f64,
        end: f64,
        duration: f64,
    },
    #[error("utterance {0}: target covers the whole clip, leaving no context")]
    ContextEmpty(String),
    #[error("utterance {utterance_id}: {scope} {source}")]
    Prosody {
        utterance_id: String,
        scope: Scope,
        #[source]
        source: ProsodyError,
    },
    #[error("utterance {utterance_id}: missing value for {feature} ({scope})")]
    MissingFeature {
        utterance_id: String,
        feature: FeatureId,
        scope: Scope,
    },
    #[error("utterance {0}: feature set needs nonprosodic features but none were given")]
    MissingNonprosodic(String),
    #[error("correlation needs at least 3 utterances, got {0}")]
    TooFewUtterances(usize),
    #[error("{feature} ({scope}) is constant across the corpus")]
    ZeroVariance { feature: FeatureId, scope: Scope },
    #[error("invalid feature set: {0}")]
    InvalidSpec(String),
}
