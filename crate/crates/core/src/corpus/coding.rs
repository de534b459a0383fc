//! Binary certainty coding and the self-awareness / transparency categories.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Correctness, Item, Utterance};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("rating {0} is outside [1, 5]")]
pub struct CodingError(pub f64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certainty {
    Uncertain,
    Certain,
}

/// Ratings below 3 are uncertain, 3 and above certain.
pub fn binary_certainty(rating: f64) -> Result<Certainty, CodingError> {
    if !(1.0..=5.0).contains(&rating) {
        return Err(CodingError(rating));
    }
    Ok(if rating < 3.0 {
        Certainty::Uncertain
    } else {
        Certainty::Certain
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelfAwareness {
    SelfAware,
    Misconception,
    LacksConfidenceOrLuckyGuess,
}

pub fn self_awareness(self_rating: u8, correctness: Correctness) -> Result<SelfAwareness, CodingError> {
    use Certainty::*;
    use Correctness::*;
    Ok(match (binary_certainty(self_rating as f64)?, correctness) {
        (Uncertain, Incorrect) | (Certain, Correct) => SelfAwareness::SelfAware,
        (Certain, Incorrect) => SelfAwareness::Misconception,
        (Uncertain, Correct) => SelfAwareness::LacksConfidenceOrLuckyGuess,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transparency {
    Transparent,
    /// Sounds certain while feeling uncertain.
    OpaqueBroadcaster,
    /// Sounds uncertain while feeling certain.
    OpaqueMeek,
}

pub fn transparency(self_rating: u8, perceived_mean: f64) -> Result<Transparency, CodingError> {
    use Certainty::*;
    Ok(
        match (binary_certainty(self_rating as f64)?, binary_certainty(perceived_mean)?) {
            (a, b) if a == b => Transparency::Transparent,
            (Uncertain, _) => Transparency::OpaqueBroadcaster,
            (Certain, _) => Transparency::OpaqueMeek,
        },
    )
}

/// An answer tuple is correct only when every slot holds its correct option.
pub fn code_correctness(item: &Item, chosen: &[usize]) -> Correctness {
    if chosen.len() == item.correct_options.len() && chosen == item.correct_options.as_slice() {
        Correctness::Correct
    } else {
        Correctness::Incorrect
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusRates {
    pub utterances: usize,
    pub self_aware: usize,
    pub misconception: usize,
    pub lacks_confidence_or_lucky_guess: usize,
    pub transparent: usize,
    pub opaque_broadcaster: usize,
    pub opaque_meek: usize,
}

impl CorpusRates {
    pub fn self_awareness_rate(&self) -> f64 {
        self.self_aware as f64 / self.utterances as f64
    }

    pub fn transparency_rate(&self) -> f64 {
        self.transparent as f64 / self.utterances as f64
    }
}

pub fn corpus_rates<'a>(
    utterances: impl IntoIterator<Item = &'a Utterance>,
) -> Result<CorpusRates, CodingError> {
    let mut rates = CorpusRates::default();
    for u in utterances {
        rates.utterances += 1;
        match self_awareness(u.self_rating, u.correctness)? {
            SelfAwareness::SelfAware => rates.self_aware += 1,
            SelfAwareness::Misconception => rates.misconception += 1,
            SelfAwareness::LacksConfidenceOrLuckyGuess => rates.lacks_confidence_or_lucky_guess += 1,
        }
        match transparency(u.self_rating, u.perceived_mean())? {
            Transparency::Transparent => rates.transparent += 1,
            Transparency::OpaqueBroadcaster => rates.opaque_broadcaster += 1,
            Transparency::OpaqueMeek => rates.opaque_meek += 1,
        }
    }
    Ok(rates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn threshold_at_three() {
        assert_eq!(binary_certainty(2.9), Ok(Certainty::Uncertain));
        assert_eq!(binary_certainty(3.0), Ok(Certainty::Certain));
        assert_eq!(binary_certainty(5.0), Ok(Certainty::Certain));
        assert_eq!(binary_certainty(1.0), Ok(Certainty::Uncertain));
        assert!(binary_certainty(0.5).is_err());
        assert!(binary_certainty(5.5).is_err());
        assert!(binary_certainty(f64::NAN).is_err());
    }

    #[test]
    fn self_awareness_quadrants() {
        use Correctness::*;
        assert_eq!(self_awareness(2, Incorrect), Ok(SelfAwareness::SelfAware));
        assert_eq!(self_awareness(4, Correct), Ok(SelfAwareness::SelfAware));
        assert_eq!(self_awareness(4, Incorrect), Ok(SelfAwareness::Misconception));
        assert_eq!(self_awareness(2, Correct), Ok(SelfAwareness::LacksConfidenceOrLuckyGuess));
    }

    #[test]
    fn transparency_quadrants() {
        assert_eq!(transparency(2, 2.0), Ok(Transparency::Transparent));
        assert_eq!(transparency(4, 3.2), Ok(Transparency::Transparent));
        assert_eq!(transparency(2, 4.0), Ok(Transparency::OpaqueBroadcaster));
        assert_eq!(transparency(4, 2.0), Ok(Transparency::OpaqueMeek));
    }

    proptest! {
        #[test]
        fn self_awareness_categories_cover_every_utterance(
            rows in prop::collection::vec((1u8..=5, any::<bool>(), prop::collection::vec(1u8..=5, 5)), 0..60)
        ) {
            let utts: Vec<Utterance> = rows.iter().enumerate().map(|(i, (s, c, l))| Utterance {
                utterance_id: i.to_string(),
                speaker_id: "s".into(),
                item_id: "i".into(),
                audio: String::new(),
                sample_rate: 16000,
                transcript: vec![],
                target_spans: vec![],
                control_span: None,
                chosen_options: vec![],
                correctness: if *c { Correctness::Correct } else { Correctness::Incorrect },
                self_rating: *s,
                listener_ratings: l.clone(),
                presentation_ordinal: 1,
            }).collect();
            let r = corpus_rates(&utts).unwrap();
            prop_assert_eq!(r.self_aware + r.misconception + r.lacks_confidence_or_lucky_guess, utts.len());
            prop_assert_eq!(r.transparent + r.opaque_broadcaster + r.opaque_meek, utts.len());
        }
    }
}
