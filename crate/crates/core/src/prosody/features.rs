use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const FEATURE_COUNT: usize = 20;

/// Which stretch of an utterance a feature vector summarizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Utterance,
    Context,
    Target,
}

impl Scope {
    pub const ALL: [Scope; 3] = [Scope::Utterance, Scope::Context, Scope::Target];

    pub fn as_str(self) -> &'static str {
        match self {
            Scope::Utterance => "utterance",
            Scope::Context => "context",
            Scope::Target => "target",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scope::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| format!("unknown scope `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Pitch,
    Intensity,
    Temporal,
}

/// The canonical prosodic feature inventory, in serialization order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureId {
    F0Min,
    F0Max,
    F0Mean,
    F0Stdev,
    F0Range,
    F0RelposMin,
    F0RelposMax,
    F0AbsSlopeHz,
    F0AbsSlopeSemi,
    RmsMin,
    RmsMax,
    RmsMean,
    RmsStdev,
    RmsRelposMin,
    RmsRelposMax,
    SilenceTotal,
    SilencePercent,
    DurationTotal,
    DurationSpeaking,
    SpeakingRate,
}

impl FeatureId {
    pub const ALL: [FeatureId; FEATURE_COUNT] = [
        FeatureId::F0Min,
        FeatureId::F0Max,
        FeatureId::F0Mean,
        FeatureId::F0Stdev,
        FeatureId::F0Range,
        FeatureId::F0RelposMin,
        FeatureId::F0RelposMax,
        FeatureId::F0AbsSlopeHz,
        FeatureId::F0AbsSlopeSemi,
        FeatureId::RmsMin,
        FeatureId::RmsMax,
        FeatureId::RmsMean,
        FeatureId::RmsStdev,
        FeatureId::RmsRelposMin,
        FeatureId::RmsRelposMax,
        FeatureId::SilenceTotal,
        FeatureId::SilencePercent,
        FeatureId::DurationTotal,
        FeatureId::DurationSpeaking,
        FeatureId::SpeakingRate,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureId::F0Min => "f0_min",
            FeatureId::F0Max => "f0_max",
            FeatureId::F0Mean => "f0_mean",
            FeatureId::F0Stdev => "f0_stdev",
            FeatureId::F0Range => "f0_range",
            FeatureId::F0RelposMin => "f0_relpos_min",
            FeatureId::F0RelposMax => "f0_relpos_max",
            FeatureId::F0AbsSlopeHz => "f0_abs_slope_hz",
            FeatureId::F0AbsSlopeSemi => "f0_abs_slope_semi",
            FeatureId::RmsMin => "rms_min",
            FeatureId::RmsMax => "rms_max",
            FeatureId::RmsMean => "rms_mean",
            FeatureId::RmsStdev => "rms_stdev",
            FeatureId::RmsRelposMin => "rms_relpos_min",
            FeatureId::RmsRelposMax => "rms_relpos_max",
            FeatureId::SilenceTotal => "silence_total",
            FeatureId::SilencePercent => "silence_percent",
            FeatureId::DurationTotal => "duration_total",
            FeatureId::DurationSpeaking => "duration_speaking",
            FeatureId::SpeakingRate => "speaking_rate",
        }
    }

    pub fn kind(self) -> FeatureKind {
        match self.index() {
            0..=8 => FeatureKind::Pitch,
            9..=14 => FeatureKind::Intensity,
            _ => FeatureKind::Temporal,
        }
    }

    /// Pitch and intensity features are z-scored per speaker; temporal ones are not.
    pub fn is_normalized(self) -> bool {
        self.kind() != FeatureKind::Temporal
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| format!("unknown prosodic feature `{s}`"))
    }
}

/// The 20 prosodic features for one scope of one utterance.
///
/// Pitch features are `None` when the scope has no voiced frames. Consumers
/// that need a complete vector must reject it rather than impute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProsodicFeatureVector {
    pub scope: Scope,
    pub normalized: bool,
    values: [Option<f64>; FEATURE_COUNT],
}

impl ProsodicFeatureVector {
    pub fn new(scope: Scope, values: [Option<f64>; FEATURE_COUNT]) -> Self {
        Self {
            scope,
            normalized: false,
            values,
        }
    }

    pub fn get(&self, id: FeatureId) -> Option<f64> {
        self.values[id.index()]
    }

    pub fn set(&mut self, id: FeatureId, value: Option<f64>) {
        self.values[id.index()] = value;
    }

    pub fn values(&self) -> &[Option<f64>; FEATURE_COUNT] {
        &self.values
    }

    pub fn has_missing(&self) -> bool {
        self.values.iter().any(Option::is_none)
    }

    pub fn missing(&self) -> impl Iterator<Item = FeatureId> + '_ {
        FeatureId::ALL.into_iter().filter(|id| self.get(*id).is_none())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inventory_has_twenty_features_split_9_6_5() {
        assert_eq!(FeatureId::ALL.len(), 20);
        let count = |k| FeatureId::ALL.iter().filter(|f| f.kind() == k).count();
        assert_eq!(count(FeatureKind::Pitch), 9);
        assert_eq!(count(FeatureKind::Intensity), 6);
        assert_eq!(count(FeatureKind::Temporal), 5);
        for (i, id) in FeatureId::ALL.iter().enumerate() {
            assert_eq!(id.index(), i);
            assert_eq!(id.as_str().parse::<FeatureId>().unwrap(), *id);
        }
    }

    #[test]
    fn serde_names_match_display() {
        for id in FeatureId::ALL {
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{id}\""));
        }
    }
}
