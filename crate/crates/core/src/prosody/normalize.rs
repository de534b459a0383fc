use serde::{Deserialize, Serialize};

use super::{FeatureId, ProsodicFeatureVector, ProsodyError, Scope, FEATURE_COUNT};
use crate::stats;

/// Per-speaker location and spread of each pitch and intensity feature.
///
/// Fitting and applying are separate so that vectors computed under an
/// alternative segmentation can be scaled with the statistics of the
/// speaker's regular vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerNormalizer {
    pub scope: Scope,
    means: [Option<f64>; FEATURE_COUNT],
    stdevs: [Option<f64>; FEATURE_COUNT],
}

impl SpeakerNormalizer {
    /// Estimates means and sample standard deviations from one speaker's
    /// unnormalized vectors of a single scope. Missing values are skipped.
    pub fn fit(vectors: &[ProsodicFeatureVector]) -> Result<Self, ProsodyError> {
        let Some(first) = vectors.first() else {
            return Err(ProsodyError::ScopeMismatch);
        };
        let scope = first.scope;
        if vectors.iter().any(|v| v.scope != scope || v.normalized) {
            return Err(ProsodyError::ScopeMismatch);
        }
        let mut means = [None; FEATURE_COUNT];
        let mut stdevs = [None; FEATURE_COUNT];
        for id in FeatureId::ALL.into_iter().filter(|id| id.is_normalized()) {
            let xs: Vec<f64> = vectors.iter().filter_map(|v| v.get(id)).collect();
            if !xs.is_empty() {
                means[id.index()] = Some(stats::mean(&xs));
                stdevs[id.index()] = Some(stats::sample_stdev(&xs));
            }
        }
        Ok(Self {
            scope,
            means,
            stdevs,
        })
    }

    /// Z-scores the pitch and intensity features of `v`.
    ///
    /// A feature whose speaker spread is zero (including single-utterance
    /// speakers) maps to 0. Temporal features are copied unchanged.
    pub fn apply(&self, v: &ProsodicFeatureVector) -> Result<ProsodicFeatureVector, ProsodyError> {
        if v.scope != self.scope || v.normalized {
            return Err(ProsodyError::ScopeMismatch);
        }
        let mut out = v.clone();
        for id in FeatureId::ALL.into_iter().filter(|id| id.is_normalized()) {
            let i = id.index();
            let z = match (v.get(id), self.means[i], self.stdevs[i]) {
                (Some(x), Some(m), Some(sd)) if sd > 0.0 => Some((x - m) / sd),
                (Some(_), _, _) => Some(0.0),
                (None, _, _) => None,
            };
            out.set(id, z);
        }
        out.normalized = true;
        Ok(out)
    }
}

/// Normalizes all of one speaker's vectors for one scope.
pub fn zscore_normalize(
    vectors: &[ProsodicFeatureVector],
) -> Result<Vec<ProsodicFeatureVector>, ProsodyError> {
    if vectors.is_empty() {
        return Ok(Vec::new());
    }
    let norm = SpeakerNormalizer::fit(vectors)?;
    vectors.iter().map(|v| norm.apply(v)).collect()
}
