use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ExperimentError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub test_speaker: String,
    pub train_speakers: Vec<String>,
}

/// Leave-one-speaker-out folds, ordered by speaker id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Fold>,
}

pub fn make_loso_folds<'a>(
    speakers: impl IntoIterator<Item = &'a str>,
) -> Result<FoldPlan, ExperimentError> {
    let unique: BTreeSet<&str> = speakers.into_iter().collect();
    if unique.len() < 2 {
        return Err(ExperimentError::TooFewSpeakers(unique.len()));
    }
    let folds = unique
        .iter()
        .map(|&test| Fold {
            test_speaker: test.to_string(),
            train_speakers: unique.iter().filter(|&&s| s != test).map(|s| s.to_string()).collect(),
        })
        .collect();
    Ok(FoldPlan { folds })
}

impl FoldPlan {
    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }

    /// Row indices `(train, test)` for fold `k` given each row's speaker.
    /// Fails if any row lands on both sides.
    pub fn split(&self, k: usize, speaker_of: &[&str]) -> Result<(Vec<usize>, Vec<usize>), ExperimentError> {
        let fold = &self.folds[k];
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, s) in speaker_of.iter().enumerate() {
            if *s == fold.test_speaker {
                test.push(i);
            } else if fold.train_speakers.iter().any(|t| t == s) {
                train.push(i);
            }
        }
        if fold.train_speakers.contains(&fold.test_speaker) {
            return Err(ExperimentError::LeakedSpeaker {
                speaker: fold.test_speaker.clone(),
            });
        }
        Ok((train, test))
    }
}
