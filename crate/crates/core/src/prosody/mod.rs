//! Pitch and intensity contours, silence detection, and the 20 prosodic
//! features computed over any stretch of a recording.
//!
//! The pipeline is:
//!
//! 1. [`extract_contour`] turns an [`AudioClip`](crate::audio::AudioClip) into
//!    uniformly spaced [`Frame`]s carrying f0 (or unvoiced) and RMS.
//! 2. [`detect_silence`] finds sustained low-energy runs in that contour.
//! 3. [`aggregate_features`] summarizes the frames inside one or more time
//!    intervals into a [`ProsodicFeatureVector`].
//! 4. [`zscore_normalize`] rescales pitch and intensity features per speaker.

mod aggregate;
mod features;
mod normalize;
mod silence;
mod table;
mod tracker;

pub use aggregate::aggregate_features;
pub use features::{FeatureId, FeatureKind, ProsodicFeatureVector, Scope, FEATURE_COUNT};
pub use normalize::{zscore_normalize, SpeakerNormalizer};
pub use silence::detect_silence;
pub use table::{read_features_csv, write_features_csv, FeatureRow, MISSING_TOKEN};
pub use tracker::{extract_contour, Contour, Frame, TrackerConfig};

use thiserror::Error;

/// A half-open time span `[start, end)` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> f64 {
        (self.end - self.start).max(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t < self.end
    }

    pub fn overlap(&self, other: &Interval) -> f64 {
        (self.end.min(other.end) - self.start.max(other.start)).max(0.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProsodyError {
    #[error("clip of {duration:.4} s is shorter than one {frame_length:.4} s analysis frame")]
    ClipTooShort { duration: f64, frame_length: f64 },
    #[error("invalid tracker configuration: {0}")]
    InvalidConfig(String),
    #[error("degenerate interval [{start}, {end})")]
    DegenerateInterval { start: f64, end: f64 },
    #[error("no analysis frames fall inside the requested interval")]
    EmptyInterval,
    #[error("interval contains no speech (speaking duration is zero)")]
    NoSpeech,
    #[error("syllable count must be at least 1")]
    InvalidSyllableCount,
    #[error("vectors passed to normalization mix scopes or are already normalized")]
    ScopeMismatch,
}
