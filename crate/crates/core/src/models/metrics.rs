//! Score-to-class mapping and evaluation metrics.

use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertaintyClass3 {
    Uncertain,
    Neutral,
    Certain,
}

impl CertaintyClass3 {
    pub const ALL: [CertaintyClass3; 3] = [Self::Uncertain, Self::Neutral, Self::Certain];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Uncertain => "uncertain",
            Self::Neutral => "neutral",
            Self::Certain => "certain",
        }
    }
}

/// Rounds half up, clamps into 1..=5, then bins {1,2}, {3}, {4,5}.
/// NaN maps to neutral.
pub fn score_to_class3(score: f64) -> CertaintyClass3 {
    if score.is_nan() {
        return CertaintyClass3::Neutral;
    }
    let rounded = (score + 0.5).floor().clamp(1.0, 5.0);
    class3_of_rating(rounded as u8)
}

pub fn class3_of_rating(rating: u8) -> CertaintyClass3 {
    match rating {
        0..=2 => CertaintyClass3::Uncertain,
        3 => CertaintyClass3::Neutral,
        _ => CertaintyClass3::Certain,
    }
}

pub fn rms_error(predictions: &[f64], truths: &[f64]) -> Result<f64, ModelError> {
    if predictions.len() != truths.len() {
        return Err(ModelError::LengthMismatch {
            left: predictions.len(),
            right: truths.len(),
        });
    }
    if predictions.is_empty() {
        return Err(ModelError::EmptyData);
    }
    let sse: f64 = predictions.iter().zip(truths).map(|(p, t)| (p - t).powi(2)).sum();
    Ok((sse / predictions.len() as f64).sqrt())
}

/// Fraction of equal pairs; NaN for empty input.
pub fn accuracy<T: PartialEq>(predictions: &[T], truths: &[T]) -> f64 {
    let hits = predictions.iter().zip(truths).filter(|(p, t)| p == t).count();
    hits as f64 / predictions.len().min(truths.len()) as f64
}

/// Counts indexed `[truth][prediction]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self {
            labels,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn add(&mut self, truth: usize, prediction: usize) {
        self.counts[truth][prediction] += 1;
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (row, orow) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(orow) {
                *c += o;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use CertaintyClass3::*;

    #[test]
    fn class_mapping_examples() {
        assert_eq!(score_to_class3(1.7), Uncertain);
        assert_eq!(score_to_class3(3.4), Neutral);
        assert_eq!(score_to_class3(2.5), Neutral);
        assert_eq!(score_to_class3(2.49), Uncertain);
        assert_eq!(score_to_class3(3.5), Certain);
        assert_eq!(score_to_class3(-4.0), Uncertain);
        assert_eq!(score_to_class3(11.0), Certain);
        assert_eq!(score_to_class3(f64::NAN), Neutral);
    }

    #[test]
    fn rms_examples() {
        assert_eq!(rms_error(&[1.0, 3.0], &[2.0, 4.0]), Ok(1.0));
        assert_eq!(rms_error(&[1.5, 2.5], &[1.5, 2.5]), Ok(0.0));
        assert!(rms_error(&[1.0], &[1.0, 2.0]).is_err());
        assert_eq!(rms_error(&[], &[]), Err(ModelError::EmptyData));
    }

    #[test]
    fn confusion_counts() {
        let mut m = ConfusionMatrix::new(vec!["a".into(), "b".into()]);
        m.add(0, 0);
        m.add(0, 1);
        m.add(1, 1);
        assert_eq!((m.correct(), m.total()), (2, 3));
        let copy = m.clone();
        m.merge(&copy);
        assert_eq!(m.counts, vec![vec![2, 2], vec![0, 2]]);
        assert!((accuracy(&[1, 2, 3], &[1, 0, 3]) - 2.0 / 3.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn mapping_is_monotone(a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(score_to_class3(lo) <= score_to_class3(hi));
        }
    }
}
