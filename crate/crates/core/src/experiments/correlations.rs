use serde::{Deserialize, Serialize};

use super::{ExperimentError, PreparedCorpus};
use crate::featuresets::{
    correlation_table, select_combination_set_from, CorrelationCell, FeatureSetSpec, Member,
};
use crate::prosody::{FeatureId, Scope};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub feature: FeatureId,
    pub utterance: CorrelationCell,
    pub context: CorrelationCell,
    pub target: CorrelationCell,
    /// Scope chosen for the combination set.
    pub selected: Scope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    /// Single-target utterances used.
    pub n: usize,
    pub rows: Vec<CorrelationRow>,
    pub combination_set: FeatureSetSpec,
    /// Members of the combination set per scope: utterance, context, target.
    pub scope_counts: [usize; 3],
}

/// Correlates every normalized scoped feature of the single-target
/// utterances with their perceived means and derives the combination set.
pub fn run_correlations(corpus: &PreparedCorpus) -> Result<CorrelationReport, ExperimentError> {
    let rows: Vec<_> = corpus
        .utterances
        .iter()
        .filter(|u| u.single_target)
        .map(|u| (&u.features, u.perceived_mean))
        .collect();
    let table = correlation_table(&rows)?;
    let combination_set = select_combination_set_from(&table);
    let mut scope_counts = [0; 3];
    let out = FeatureId::ALL
        .iter()
        .zip(&combination_set.members)
        .map(|(&feature, member)| {
            let selected = match member {
                Member::Utterance(_) => Scope::Utterance,
                Member::Context(_) => Scope::Context,
                _ => Scope::Target,
            };
            scope_counts[selected.index()] += 1;
            CorrelationRow {
                feature,
                utterance: *table.get(feature, Scope::Utterance),
                context: *table.get(feature, Scope::Context),
                target: *table.get(feature, Scope::Target),
                selected,
            }
        })
        .collect();
    Ok(CorrelationReport {
        n: rows.len(),
        rows: out,
        combination_set,
        scope_counts,
    })
}

/// The combination set derived from the whole corpus.
pub fn combination_set(corpus: &PreparedCorpus) -> Result<FeatureSetSpec, ExperimentError> {
    Ok(run_correlations(corpus)?.combination_set)
}
