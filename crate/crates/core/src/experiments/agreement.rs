use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::corpus::{corpus_rates, CorpusRates, Utterance};
use crate::models::{best_partition_for_agreement, KappaVariant, ModelError, Partition3, PartitionScore};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub variant: KappaVariant,
    pub judges: usize,
    pub utterances: usize,
    /// Kappa over the raw five-point ratings; absent when undefined.
    pub five_point_kappa: Option<f64>,
    pub best_partition: Partition3,
    pub partition_scores: Vec<PartitionScore>,
    pub rates: CorpusRates,
}

/// Listener agreement, treating the `j`-th rating of every utterance as
/// judge `j`, plus corpus self-awareness and transparency counts.
pub fn run_agreement(
    utterances: &[Utterance],
    variant: KappaVariant,
) -> Result<AgreementReport, ExperimentError> {
    let Some(first) = utterances.first() else {
        return Err(ExperimentError::NoEligibleUtterances("agreement".into()));
    };
    let judges = first.listener_ratings.len();
    if let Some(u) = utterances.iter().find(|u| u.listener_ratings.len() != judges) {
        return Err(ExperimentError::RaggedRatings(u.utterance_id.clone()));
    }
    let matrix: Vec<Vec<u8>> = (0..judges)
        .map(|j| utterances.iter().map(|u| u.listener_ratings[j]).collect())
        .collect();
    let five_point_kappa = match variant.compute(&matrix) {
        Ok(k) => Some(k),
        Err(ModelError::DegenerateMarginals) => None,
        Err(e) => return Err(e.into()),
    };
    let (best_partition, partition_scores) = best_partition_for_agreement(&matrix, variant)?;
    Ok(AgreementReport {
        variant,
        judges,
        utterances: utterances.len(),
        five_point_kappa,
        best_partition,
        partition_scores,
        rates: corpus_rates(utterances)?,
    })
}
