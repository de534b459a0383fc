//! Learners and evaluation metrics: least-squares regression, a C4.5-style
//! decision tree, certainty class mappings, RMS error, and kappa agreement.

mod kappa;
mod metrics;
mod ols;
mod tree;

pub use kappa::{
    average_pairwise_kappa, best_partition_for_agreement, cohens_kappa, fleiss_kappa,
    KappaVariant, Partition3, PartitionScore,
};
pub use metrics::{
    accuracy, class3_of_rating, rms_error, score_to_class3, CertaintyClass3, ConfusionMatrix,
};
pub use ols::{fit_ols, LinearModel};
pub use tree::{fit_tree, DecisionTree, Node, SplitCandidate, TreeParams};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("no training data")]
    EmptyData,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("non-finite value in training data")]
    NonFinite,
    #[error("chance agreement is 1, kappa is undefined")]
    DegenerateMarginals,
    #[error("need at least two judges, got {0}")]
    TooFewJudges(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("model file: {0}")]
    Format(String),
}

/// Version tag of the serialized model document.
pub const MODEL_FORMAT: &str = "certainty-model/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    Linear(LinearModel),
    Tree(DecisionTree),
}

/// A trained model with the names of its inputs, as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub format: String,
    pub inputs: Vec<String>,
    pub model: TrainedModel,
}

impl SavedModel {
    pub fn new(inputs: Vec<String>, model: TrainedModel) -> Self {
        Self {
            format: MODEL_FORMAT.to_string(),
            inputs,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let saved: Self = serde_json::from_str(text).map_err(|e| ModelError::Format(e.to_string()))?;
        if saved.format != MODEL_FORMAT {
            return Err(ModelError::Format(format!(
                "expected format `{MODEL_FORMAT}`, found `{}`",
                saved.format
            )));
        }
        Ok(saved)
    }
}

pub(crate) fn check_matrix(x: &[Vec<f64>], n_targets: usize) -> Result<usize, ModelError> {
    if x.is_empty() {
        return Err(ModelError::EmptyData);
    }
    if x.len() != n_targets {
        return Err(ModelError::LengthMismatch {
            left: x.len(),
            right: n_targets,
        });
    }
    let p = x[0].len();
    for row in x {
        if row.len() != p {
            return Err(ModelError::DimensionMismatch {
                expected: p,
                actual: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite);
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saved_models_round_trip() {
        let lin = fit_ols(&[vec![0.0], vec![1.0], vec![2.0]], &[1.0, 3.0, 5.0]).unwrap();
        let tree = fit_tree(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]], &[0, 0, 1, 1], &TreeParams::default()).unwrap();
        for model in [TrainedModel::Linear(lin), TrainedModel::Tree(tree)] {
            let saved = SavedModel::new(vec!["x".into()], model);
            assert_eq!(SavedModel::from_json(&saved.to_json()).unwrap(), saved);
        }
        let bad = r#"{"format":"other","inputs":[],"model":{"kind":"linear","intercept":0,"coefficients":[],"training_rms":0,"rank":0}}"#;
        assert!(SavedModel::from_json(bad).is_err());
    }
}
