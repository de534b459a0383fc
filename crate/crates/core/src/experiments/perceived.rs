use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{make_loso_folds, ExperimentError, PreparedCorpus};
use crate::featuresets::{assemble_inputs, FeatureSetSpec, SetId};
use crate::models::{
    fit_ols, rms_error, score_to_class3, CertaintyClass3, ConfusionMatrix,
};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Learner {
    /// Least-squares regression on the feature set.
    #[default]
    Linear,
    /// Always predicts the training set's majority class (scored at the mean
    /// perceived score of that class).
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceivedConfig {
    pub spec: FeatureSetSpec,
    pub learner: Learner,
    /// Keep per-utterance predictions in the report.
    pub scatter: bool,
}

impl PerceivedConfig {
    pub fn new(spec: FeatureSetSpec) -> Self {
        Self {
            spec,
            learner: Learner::Linear,
            scatter: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub utterance_id: String,
    pub predicted: f64,
    pub perceived: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceivedFold {
    pub test_speaker: String,
    pub n_train: usize,
    pub n_test: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub rms: f64,
    /// Pearson r of predictions against perceived means; absent when either
    /// side is constant.
    pub pearson: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scatter: Vec<ScatterPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceivedReport {
    pub feature_set: SetId,
    pub inputs: Vec<String>,
    pub learner: Learner,
    pub folds: Vec<PerceivedFold>,
    pub correct: usize,
    pub total: usize,
    /// Correct predictions over all utterances.
    pub pooled_accuracy: f64,
    /// Mean of the per-fold accuracies.
    pub fold_mean_accuracy: f64,
    /// RMS error over all utterances.
    pub rms: f64,
    pub fold_mean_pearson: Option<f64>,
    pub majority_class: CertaintyClass3,
    /// Frequency of the most common class over the whole corpus.
    pub naive_baseline: f64,
    pub confusion: ConfusionMatrix,
}

pub(crate) fn class_labels() -> Vec<String> {
    CertaintyClass3::ALL.iter().map(|c| c.as_str().to_string()).collect()
}

/// Most frequent class; ties go to the lower class.
pub(crate) fn majority_class3(scores: &[f64]) -> (CertaintyClass3, usize) {
    let mut counts = [0usize; 3];
    for &s in scores {
        counts[score_to_class3(s).index()] += 1;
    }
    let mut best = 0;
    for k in 1..3 {
        if counts[k] > counts[best] {
            best = k;
        }
    }
    (CertaintyClass3::ALL[best], counts[best])
}

/// Leave-one-speaker-out evaluation of perceived certainty prediction. Every
/// utterance is scored by mapping the predicted score to three classes and
/// comparing with the class of its perceived mean.
pub fn run_perceived_experiment(
    corpus: &PreparedCorpus,
    config: &PerceivedConfig,
) -> Result<PerceivedReport, ExperimentError> {
    config.spec.validate()?;
    let rows = &corpus.utterances;
    let inputs = rows
        .iter()
        .map(|u| assemble_inputs(&config.spec, &u.features, u.nonprosodic.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    let truth: Vec<f64> = rows.iter().map(|u| u.perceived_mean).collect();
    let speakers = corpus.speaker_of();
    let plan = make_loso_folds(speakers.iter().copied())?;

    let folds = (0..plan.len())
        .into_par_iter()
        .map(|k| {
            let (train, test) = plan.split(k, &speakers)?;
            let y: Vec<f64> = train.iter().map(|&i| truth[i]).collect();
            let predictions: Vec<f64> = match config.learner {
                Learner::Linear => {
                    let x: Vec<Vec<f64>> = train.iter().map(|&i| inputs[i].clone()).collect();
                    let model = fit_ols(&x, &y)?;
                    test.iter()
                        .map(|&i| model.predict(&inputs[i]))
                        .collect::<Result<_, _>>()?
                }
                Learner::Constant => {
                    let (class, _) = majority_class3(&y);
                    let in_class: Vec<f64> =
                        y.iter().copied().filter(|&s| score_to_class3(s) == class).collect();
                    vec![stats::mean(&in_class); test.len()]
                }
            };
            let truths: Vec<f64> = test.iter().map(|&i| truth[i]).collect();
            let mut confusion = ConfusionMatrix::new(class_labels());
            for (p, t) in predictions.iter().zip(&truths) {
                confusion.add(score_to_class3(*t).index(), score_to_class3(*p).index());
            }
            let scatter = if config.scatter {
                test.iter()
                    .zip(&predictions)
                    .map(|(&i, &p)| ScatterPoint {
                        utterance_id: rows[i].utterance_id.clone(),
                        predicted: p,
                        perceived: truth[i],
                    })
                    .collect()
            } else {
                Vec::new()
            };
            let fold = PerceivedFold {
                test_speaker: plan.folds[k].test_speaker.clone(),
                n_train: train.len(),
                n_test: test.len(),
                correct: confusion.correct(),
                accuracy: confusion.correct() as f64 / test.len() as f64,
                rms: rms_error(&predictions, &truths)?,
                pearson: stats::pearson(&predictions, &truths),
                scatter,
            };
            let sse: f64 = predictions.iter().zip(&truths).map(|(p, t)| (p - t).powi(2)).sum();
            Ok((fold, confusion, sse))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;

    let mut confusion = ConfusionMatrix::new(class_labels());
    let mut sse = 0.0;
    let mut out_folds = Vec::with_capacity(folds.len());
    for (fold, c, s) in folds {
        confusion.merge(&c);
        sse += s;
        out_folds.push(fold);
    }
    let total = confusion.total();
    let pearsons: Vec<f64> = out_folds.iter().filter_map(|f| f.pearson).collect();
    let (majority_class, majority_count) = majority_class3(&truth);
    Ok(PerceivedReport {
        feature_set: config.spec.set_id,
        inputs: config.spec.names(),
        learner: config.learner,
        correct: confusion.correct(),
        total,
        pooled_accuracy: confusion.correct() as f64 / total as f64,
        fold_mean_accuracy: stats::mean(&out_folds.iter().map(|f| f.accuracy).collect::<Vec<_>>()),
        rms: (sse / total as f64).sqrt(),
        fold_mean_pearson: (!pearsons.is_empty()).then(|| stats::mean(&pearsons)),
        majority_class,
        naive_baseline: majority_count as f64 / total as f64,
        folds: out_folds,
        confusion,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::corpus::Correctness;
    use crate::experiments::PreparedUtterance;
    use crate::featuresets::SegmentedFeatures;
    use crate::prosody::{ProsodicFeatureVector, Scope, FEATURE_COUNT};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// A prepared utterance whose three scopes all carry `values`.
    pub(crate) fn row(id: &str, speaker: &str, values: [f64; FEATURE_COUNT], perceived: f64) -> PreparedUtterance {
        let v = |scope| {
            let mut p = ProsodicFeatureVector::new(scope, values.map(Some));
            p.normalized = true;
            p
        };
        let features = SegmentedFeatures {
            utterance_id: id.into(),
            utterance: v(Scope::Utterance),
            context: v(Scope::Context),
            target: v(Scope::Target),
        };
        PreparedUtterance {
            utterance_id: id.into(),
            speaker_id: speaker.into(),
            item_id: "i".into(),
            perceived_mean: perceived,
            self_rating: 3,
            correctness: Correctness::Correct,
            single_target: true,
            raw: features.clone(),
            features,
            nonprosodic: None,
            control: None,
        }
    }

    fn random_corpus(seed: u64, target: impl Fn(&[f64; FEATURE_COUNT]) -> f64) -> PreparedCorpus {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut utterances = Vec::new();
        for s in 0..4 {
            for k in 0..12 {
                let values: [f64; FEATURE_COUNT] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
                let y = target(&values);
                utterances.push(row(&format!("s{s}_{k}"), &format!("s{s}"), values, y));
            }
        }
        PreparedCorpus { utterances }
    }

    #[test]
    fn exact_linear_perceived_scores_are_recovered() {
        let corpus = random_corpus(5, |x| 3.0 + 1.2 * x[0] - 0.8 * x[4] + 0.5 * x[11]);
        let r = run_perceived_experiment(&corpus, &PerceivedConfig::new(FeatureSetSpec::c())).unwrap();
        assert_eq!(r.pooled_accuracy, 1.0);
        assert!(r.rms < 1e-6, "rms {}", r.rms);
        assert_eq!(r.folds.len(), 4);
        assert_eq!(r.total, 48);
        assert!(r.folds.iter().all(|f| f.pearson.unwrap() > 0.999999));
    }

    #[test]
    fn constant_learner_scores_the_majority_frequency() {
        let mut corpus = random_corpus(6, |_| 0.0);
        for (i, u) in corpus.utterances.iter_mut().enumerate() {
            u.perceived_mean = match i % 12 {
                0..=6 => 4.2,
                7..=9 => 1.8,
                _ => 3.0,
            };
        }
        let mut config = PerceivedConfig::new(FeatureSetSpec::a());
        config.learner = Learner::Constant;
        let r = run_perceived_experiment(&corpus, &config).unwrap();
        assert_eq!(r.majority_class, CertaintyClass3::Certain);
        assert!((r.naive_baseline - 7.0 / 12.0).abs() < 1e-12);
        assert!((r.pooled_accuracy - r.naive_baseline).abs() < 1e-12);
    }

    #[test]
    fn pooled_accuracy_counts_every_prediction() {
        let corpus = random_corpus(8, |x| 3.0 + 2.0 * x[0] + x[1]);
        let r = run_perceived_experiment(&corpus, &PerceivedConfig::new(FeatureSetSpec::custom(vec![crate::featuresets::Member::Utterance(crate::prosody::FeatureId::F0Min)]).unwrap())).unwrap();
        let correct: usize = r.folds.iter().map(|f| f.correct).sum();
        assert_eq!(correct, r.correct);
        assert_eq!(r.confusion.total(), r.total);
        assert!((r.pooled_accuracy - correct as f64 / r.total as f64).abs() < 1e-15);
    }

    #[test]
    fn majority_ties_pick_lower_class() {
        assert_eq!(majority_class3(&[1.0, 4.0]).0, CertaintyClass3::Uncertain);
        assert_eq!(majority_class3(&[3.0, 4.0, 4.4]), (CertaintyClass3::Certain, 2));
    }
}
