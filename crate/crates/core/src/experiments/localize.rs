use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{make_loso_folds, ExperimentError, PreparedCorpus, PreparedUtterance};
use crate::featuresets::{assemble_inputs, FeatureSetSpec};
use crate::models::{fit_ols, LinearModel};

/// Utterances must sound at least this uncertain to be localized.
pub const UNCERTAIN_BELOW: f64 = 2.5;

/// Scores closer than this count as a tie.
const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Choice {
    First,
    Second,
    Unresolved,
}

/// Picks the lower of two predicted certainty scores.
pub fn choose_lower(first: f64, second: f64) -> Choice {
    if (first - second).abs() <= TIE_TOLERANCE {
        Choice::Unresolved
    } else if first < second {
        Choice::First
    } else {
        Choice::Second
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalizationOutcome {
    SlotWord,
    ControlWord,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizedUtterance {
    pub utterance_id: String,
    pub perceived_mean: f64,
    pub slot_score: f64,
    pub control_score: f64,
    pub outcome: LocalizationOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationConfig {
    pub spec: FeatureSetSpec,
}

impl Default for LocalizationConfig {
    /// Target-word prosody plus the nonprosodic features.
    fn default() -> Self {
        Self {
            spec: FeatureSetSpec::c().union(&FeatureSetSpec::nonprosodic()),
        }
    }
}

/// Scores the slot segmentation and the control-word segmentation of one
/// uncertain utterance and names the word whose segmentation predicts lower
/// certainty.
pub fn localize_uncertainty(
    utterance: &PreparedUtterance,
    model: &LinearModel,
    spec: &FeatureSetSpec,
) -> Result<LocalizedUtterance, ExperimentError> {
    let control = utterance
        .control
        .as_ref()
        .ok_or_else(|| ExperimentError::MissingControlWord(vec![utterance.utterance_id.clone()]))?;
    if !(utterance.perceived_mean < UNCERTAIN_BELOW) {
        return Err(ExperimentError::NotUncertainEnough {
            utterance_id: utterance.utterance_id.clone(),
            perceived: utterance.perceived_mean,
        });
    }
    let slot_x = assemble_inputs(spec, &utterance.features, utterance.nonprosodic.as_ref())?;
    let control_x = assemble_inputs(spec, &control.features, Some(&control.nonprosodic))?;
    let slot_score = model.predict(&slot_x)?;
    let control_score = model.predict(&control_x)?;
    let outcome = match choose_lower(slot_score, control_score) {
        Choice::First => LocalizationOutcome::SlotWord,
        Choice::Second => LocalizationOutcome::ControlWord,
        Choice::Unresolved => LocalizationOutcome::Unresolved,
    };
    Ok(LocalizedUtterance {
        utterance_id: utterance.utterance_id.clone(),
        perceived_mean: utterance.perceived_mean,
        slot_score,
        control_score,
        outcome,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub inputs: Vec<String>,
    pub eligible: usize,
    pub slot_chosen: usize,
    pub control_chosen: usize,
    pub unresolved: usize,
    /// Fraction of eligible utterances where the slot word was chosen.
    pub accuracy: f64,
    /// Uncertain single-target utterances without a marked control word.
    pub skipped_without_control: Vec<String>,
    pub utterances: Vec<LocalizedUtterance>,
}

/// Localizes every uncertain single-target utterance that has a control
/// word, each with a model trained on the other speakers' single-target
/// utterances.
pub fn run_localization(
    corpus: &PreparedCorpus,
    config: &LocalizationConfig,
) -> Result<LocalizationReport, ExperimentError> {
    config.spec.validate()?;
    let rows: Vec<&PreparedUtterance> = corpus.utterances.iter().filter(|u| u.single_target).collect();
    let uncertain: Vec<&PreparedUtterance> = rows
        .iter()
        .copied()
        .filter(|u| u.perceived_mean < UNCERTAIN_BELOW)
        .collect();
    let skipped: Vec<String> = uncertain
        .iter()
        .filter(|u| u.control.is_none())
        .map(|u| u.utterance_id.clone())
        .collect();
    if uncertain.iter().all(|u| u.control.is_none()) {
        if skipped.is_empty() {
            return Err(ExperimentError::NoEligibleUtterances("localization".into()));
        }
        return Err(ExperimentError::MissingControlWord(skipped));
    }

    let x = rows
        .iter()
        .map(|u| assemble_inputs(&config.spec, &u.features, u.nonprosodic.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    let speakers: Vec<&str> = rows.iter().map(|u| u.speaker_id.as_str()).collect();
    let plan = make_loso_folds(speakers.iter().copied())?;

    let per_fold = (0..plan.len())
        .into_par_iter()
        .map(|k| {
            let (train, test) = plan.split(k, &speakers)?;
            let targets: Vec<&PreparedUtterance> = test
                .iter()
                .map(|&i| rows[i])
                .filter(|u| u.perceived_mean < UNCERTAIN_BELOW && u.control.is_some())
                .collect();
            if targets.is_empty() {
                return Ok(Vec::new());
            }
            let tx: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
            let ty: Vec<f64> = train.iter().map(|&i| rows[i].perceived_mean).collect();
            let model = fit_ols(&tx, &ty)?;
            targets
                .into_iter()
                .map(|u| localize_uncertainty(u, &model, &config.spec))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;

    let utterances: Vec<LocalizedUtterance> = per_fold.into_iter().flatten().collect();
    let count = |o| utterances.iter().filter(|u| u.outcome == o).count();
    let slot_chosen = count(LocalizationOutcome::SlotWord);
    Ok(LocalizationReport {
        inputs: config.spec.names(),
        eligible: utterances.len(),
        slot_chosen,
        control_chosen: count(LocalizationOutcome::ControlWord),
        unresolved: count(LocalizationOutcome::Unresolved),
        accuracy: slot_chosen as f64 / utterances.len() as f64,
        skipped_without_control: skipped,
        utterances,
    })
}
