use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{make_loso_folds, ExperimentError, PreparedCorpus};
use crate::corpus::{binary_certainty, Certainty, CodingError, Correctness};
use crate::featuresets::{assemble_inputs, FeatureSetSpec};
use crate::models::{fit_tree, ConfusionMatrix, TreeParams};

/// Correctness crossed with the binary perceived class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TriageSubset {
    /// Incorrect but sounds certain.
    A,
    /// Correct but sounds uncertain.
    B,
    /// Incorrect and sounds uncertain.
    #[serde(rename = "A'")]
    APrime,
    /// Correct and sounds certain.
    #[serde(rename = "B'")]
    BPrime,
}

impl TriageSubset {
    pub const ALL: [TriageSubset; 4] = [Self::A, Self::B, Self::APrime, Self::BPrime];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::A => "A",
            Self::B => "B",
            Self::APrime => "A'",
            Self::BPrime => "B'",
        }
    }
}

pub fn assign_triage_subset(
    correctness: Correctness,
    perceived_mean: f64,
) -> Result<TriageSubset, CodingError> {
    use Certainty::*;
    use Correctness::*;
    Ok(match (correctness, binary_certainty(perceived_mean)?) {
        (Incorrect, Certain) => TriageSubset::A,
        (Correct, Uncertain) => TriageSubset::B,
        (Incorrect, Uncertain) => TriageSubset::APrime,
        (Correct, Certain) => TriageSubset::BPrime,
    })
}

fn label(c: Certainty) -> usize {
    match c {
        Certainty::Uncertain => 0,
        Certainty::Certain => 1,
    }
}

fn binary_labels() -> Vec<String> {
    vec!["uncertain".into(), "certain".into()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeFold {
    pub test_speaker: String,
    pub n_test: usize,
    pub correct: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetResult {
    pub subset: TriageSubset,
    pub n: usize,
    /// Number of leave-one-speaker-out folds (speakers present in the subset).
    pub folds: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub majority: Certainty,
    pub majority_baseline: f64,
    /// Scored by the subset majority because it was too small for
    /// cross-validation.
    pub too_small: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriageReport {
    pub total: usize,
    pub tree_params: TreeParams,
    pub baseline1_label: Certainty,
    /// Global majority of the binary self-rating.
    pub baseline1_accuracy: f64,
    /// Self class predicted as the perceived class.
    pub baseline2_accuracy: f64,
    pub single_tree_correct: usize,
    pub single_tree_accuracy: f64,
    pub single_tree_folds: Vec<TreeFold>,
    pub single_tree_confusion: ConfusionMatrix,
    pub subsets: Vec<SubsetResult>,
    pub triage_correct: usize,
    /// Pooled over all utterances.
    pub triage_accuracy: f64,
    pub triage_confusion: ConfusionMatrix,
}

/// Majority label (ties to the lower label) and its count.
fn majority(y: &[usize]) -> (usize, usize) {
    let ones = y.iter().filter(|&&v| v == 1).count();
    let zeros = y.len() - ones;
    if ones > zeros {
        (1, ones)
    } else {
        (0, zeros)
    }
}

/// Leave-one-speaker-out tree predictions for each row.
fn loso_tree(
    x: &[Vec<f64>],
    y: &[usize],
    speakers: &[&str],
    params: &TreeParams,
) -> Result<(Vec<usize>, Vec<TreeFold>), ExperimentError> {
    let plan = make_loso_folds(speakers.iter().copied())?;
    let per_fold = (0..plan.len())
        .into_par_iter()
        .map(|k| {
            let (train, test) = plan.split(k, speakers)?;
            let tx: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
            let ty: Vec<usize> = train.iter().map(|&i| y[i]).collect();
            let tree = fit_tree(&tx, &ty, params)?;
            let preds = test
                .iter()
                .map(|&i| tree.predict(&x[i]).map(|p| (i, p)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((plan.folds[k].test_speaker.clone(), preds))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let mut predictions = vec![0; y.len()];
    let mut folds = Vec::with_capacity(per_fold.len());
    for (speaker, preds) in per_fold {
        let correct = preds.iter().filter(|(i, p)| y[*i] == *p).count();
        for (i, p) in &preds {
            predictions[*i] = *p;
        }
        folds.push(TreeFold {
            test_speaker: speaker,
            n_test: preds.len(),
            correct,
        });
    }
    Ok((predictions, folds))
}

/// Predicts the binary self-rating from the 20 utterance-level features,
/// once with a single tree and once with a separate tree per triage subset.
pub fn run_triage_experiment(
    corpus: &PreparedCorpus,
    params: &TreeParams,
) -> Result<TriageReport, ExperimentError> {
    let rows = &corpus.utterances;
    let n = rows.len();
    let spec = FeatureSetSpec::a();
    let x = rows
        .iter()
        .map(|u| assemble_inputs(&spec, &u.features, None))
        .collect::<Result<Vec<_>, _>>()?;
    let y = rows
        .iter()
        .map(|u| binary_certainty(u.self_rating as f64).map(label))
        .collect::<Result<Vec<_>, _>>()?;
    let perceived = rows
        .iter()
        .map(|u| binary_certainty(u.perceived_mean).map(label))
        .collect::<Result<Vec<_>, _>>()?;
    let subsets = rows
        .iter()
        .map(|u| assign_triage_subset(u.correctness, u.perceived_mean))
        .collect::<Result<Vec<_>, _>>()?;
    let speakers = corpus.speaker_of();

    let (b1_label, b1_count) = majority(&y);
    let b2_hits = y.iter().zip(&perceived).filter(|(a, b)| a == b).count();

    let (single, single_folds) = loso_tree(&x, &y, &speakers, params)?;
    let mut single_confusion = ConfusionMatrix::new(binary_labels());
    for (t, p) in y.iter().zip(&single) {
        single_confusion.add(*t, *p);
    }

    let mut triage_pred = vec![0; n];
    let mut results = Vec::new();
    for subset in TriageSubset::ALL {
        let idx: Vec<usize> = (0..n).filter(|&i| subsets[i] == subset).collect();
        let sy: Vec<usize> = idx.iter().map(|&i| y[i]).collect();
        let sspk: Vec<&str> = idx.iter().map(|&i| speakers[i]).collect();
        let (maj, maj_count) = majority(&sy);
        let distinct = sspk.iter().collect::<std::collections::BTreeSet<_>>().len();
        let too_small = idx.len() < 2 || distinct < 2;
        let (preds, folds) = if too_small {
            if !idx.is_empty() {
                log::warn!("triage subset {} has too few utterances; scoring by majority", subset.as_str());
            }
            (vec![maj; idx.len()], distinct)
        } else {
            let sx: Vec<Vec<f64>> = idx.iter().map(|&i| x[i].clone()).collect();
            let (p, f) = loso_tree(&sx, &sy, &sspk, params)?;
            (p, f.len())
        };
        let correct = preds.iter().zip(&sy).filter(|(p, t)| p == t).count();
        for (&i, &p) in idx.iter().zip(&preds) {
            triage_pred[i] = p;
        }
        let to_certainty = |l: usize| if l == 1 { Certainty::Certain } else { Certainty::Uncertain };
        results.push(SubsetResult {
            subset,
            n: idx.len(),
            folds,
            correct,
            accuracy: correct as f64 / idx.len() as f64,
            majority: to_certainty(maj),
            majority_baseline: maj_count as f64 / idx.len() as f64,
            too_small,
        });
    }
    let mut triage_confusion = ConfusionMatrix::new(binary_labels());
    for (t, p) in y.iter().zip(&triage_pred) {
        triage_confusion.add(*t, *p);
    }

    Ok(TriageReport {
        total: n,
        tree_params: *params,
        baseline1_label: if b1_label == 1 { Certainty::Certain } else { Certainty::Uncertain },
        baseline1_accuracy: b1_count as f64 / n as f64,
        baseline2_accuracy: b2_hits as f64 / n as f64,
        single_tree_correct: single_confusion.correct(),
        single_tree_accuracy: single_confusion.correct() as f64 / n as f64,
        single_tree_folds: single_folds,
        single_tree_confusion: single_confusion,
        triage_correct: triage_confusion.correct(),
        triage_accuracy: triage_confusion.correct() as f64 / n as f64,
        triage_confusion,
        subsets: results,
    })
}
