//! Named feature sets and input-vector assembly.

use serde::{Deserialize, Serialize};

use super::{FeatureSetError, SegmentedFeatures};
use crate::corpus::{NonprosodicFeatureVector, NonprosodicId};
use crate::prosody::{FeatureId, Scope};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SetId {
    A,
    B,
    C,
    D,
    E,
    #[serde(rename = "nonprosodic")]
    Nonprosodic,
    #[serde(rename = "custom")]
    Custom,
}

impl std::fmt::Display for SetId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SetId::A => "A",
            SetId::B => "B",
            SetId::C => "C",
            SetId::D => "D",
            SetId::E => "E",
            SetId::Nonprosodic => "nonprosodic",
            SetId::Custom => "custom",
        })
    }
}

/// One model input: a prosodic feature at a scope, or a nonprosodic feature.
///
/// Serialized as `{"scope": "target", "feature": "f0_min"}`, with scope
/// `nonprosodic` for the lexical and positional features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "scope", content = "feature", rename_all = "snake_case")]
pub enum Member {
    Utterance(FeatureId),
    Context(FeatureId),
    Target(FeatureId),
    Nonprosodic(NonprosodicId),
}

impl Member {
    pub fn prosodic(scope: Scope, feature: FeatureId) -> Self {
        match scope {
            Scope::Utterance => Member::Utterance(feature),
            Scope::Context => Member::Context(feature),
            Scope::Target => Member::Target(feature),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Member::Utterance(f) => format!("utterance.{f}"),
            Member::Context(f) => format!("context.{f}"),
            Member::Target(f) => format!("target.{f}"),
            Member::Nonprosodic(f) => format!("nonprosodic.{f}"),
        }
    }

    pub fn is_nonprosodic(&self) -> bool {
        matches!(self, Member::Nonprosodic(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSetSpec {
    pub set_id: SetId,
    pub members: Vec<Member>,
}

impl FeatureSetSpec {
    pub fn scope(set_id: SetId, scope: Scope) -> Self {
        Self {
            set_id,
            members: FeatureId::ALL.iter().map(|&f| Member::prosodic(scope, f)).collect(),
        }
    }

    /// Whole-utterance features.
    pub fn a() -> Self {
        Self::scope(SetId::A, Scope::Utterance)
    }

    /// Context-segment features.
    pub fn b() -> Self {
        Self::scope(SetId::B, Scope::Context)
    }

    /// Target-word features.
    pub fn c() -> Self {
        Self::scope(SetId::C, Scope::Target)
    }

    /// All 60 scoped features.
    pub fn d() -> Self {
        let members = Scope::ALL
            .iter()
            .flat_map(|&s| FeatureId::ALL.iter().map(move |&f| Member::prosodic(s, f)))
            .collect();
        Self {
            set_id: SetId::D,
            members,
        }
    }

    pub fn nonprosodic() -> Self {
        Self {
            set_id: SetId::Nonprosodic,
            members: NonprosodicId::ALL.iter().map(|&f| Member::Nonprosodic(f)).collect(),
        }
    }

    /// Concatenation of two sets, labeled custom.
    pub fn union(&self, other: &FeatureSetSpec) -> Self {
        let mut members = self.members.clone();
        members.extend(other.members.iter().copied().filter(|m| !self.members.contains(m)));
        Self {
            set_id: SetId::Custom,
            members,
        }
    }

    pub fn custom(members: Vec<Member>) -> Result<Self, FeatureSetError> {
        let spec = Self {
            set_id: SetId::Custom,
            members,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), FeatureSetError> {
        if self.members.is_empty() {
            return Err(FeatureSetError::InvalidSpec("no members".into()));
        }
        for (i, m) in self.members.iter().enumerate() {
            if self.members[..i].contains(m) {
                return Err(FeatureSetError::InvalidSpec(format!("duplicate member {}", m.name())));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, FeatureSetError> {
        let spec: Self =
            serde_json::from_str(text).map_err(|e| FeatureSetError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn needs_nonprosodic(&self) -> bool {
        self.members.iter().any(Member::is_nonprosodic)
    }

    pub fn names(&self) -> Vec<String> {
        self.members.iter().map(Member::name).collect()
    }
}

/// Builds the model input vector in member order.
pub fn assemble_inputs(
    spec: &FeatureSetSpec,
    segmented: &SegmentedFeatures,
    nonprosodic: Option<&NonprosodicFeatureVector>,
) -> Result<Vec<f64>, FeatureSetError> {
    spec.members
        .iter()
        .map(|m| {
            let (scope, feature) = match *m {
                Member::Utterance(f) => (Scope::Utterance, f),
                Member::Context(f) => (Scope::Context, f),
                Member::Target(f) => (Scope::Target, f),
                Member::Nonprosodic(f) => {
                    return nonprosodic.map(|v| v.get(f)).ok_or_else(|| {
                        FeatureSetError::MissingNonprosodic(segmented.utterance_id.clone())
                    })
                }
            };
            segmented
                .scope(scope)
                .get(feature)
                .ok_or_else(|| FeatureSetError::MissingFeature {
                    utterance_id: segmented.utterance_id.clone(),
                    feature,
                    scope,
                })
        })
        .collect()
}
