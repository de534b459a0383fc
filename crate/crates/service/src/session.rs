//! Session state machines, independent of storage and transport.

use std::collections::BTreeMap;

use certainty_core::corpus::Item;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ServiceError;

/// Seconds between target reveal and the beep.
pub const BEEP_OFFSET: f64 = 1.5;
/// Reported beep delays further than this from [`BEEP_OFFSET`] are flagged.
pub const BEEP_TOLERANCE: f64 = 0.05;

/// Fisher–Yates permutation of `0..n` driven by a seeded ChaCha8 stream.
pub fn seeded_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemState {
    Pending,
    ContextShown,
    TargetsRevealed,
    Recorded,
    SelfRated,
}

impl ItemState {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pending => "pending",
            Self::ContextShown => "context_shown",
            Self::TargetsRevealed => "targets_revealed",
            Self::Recorded => "recorded",
            Self::SelfRated => "self_rated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ElicitationEvent {
    ShowContext {
        item_id: String,
    },
    RevealTargets {
        item_id: String,
    },
    /// Client-measured delay from reveal to beep onset.
    BeepPlayed {
        item_id: String,
        delta_s: f64,
    },
    SubmitSelfRating {
        item_id: String,
        rating: i64,
    },
    /// Which options the speaker read and where each word lies in the
    /// recording.
    Transcribe {
        item_id: String,
        chosen_options: Vec<usize>,
        word_times: Vec<(f64, f64)>,
    },
}

impl ElicitationEvent {
    pub fn item_id(&self) -> &str {
        match self {
            Self::ShowContext { item_id }
            | Self::RevealTargets { item_id }
            | Self::BeepPlayed { item_id, .. }
            | Self::SubmitSelfRating { item_id, .. }
            | Self::Transcribe { item_id, .. } => item_id,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ShowContext { .. } => "show_context",
            Self::RevealTargets { .. } => "reveal_targets",
            Self::BeepPlayed { .. } => "beep_played",
            Self::SubmitSelfRating { .. } => "submit_self_rating",
            Self::Transcribe { .. } => "transcribe",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: ItemState,
    pub at: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recording {
    pub utterance_id: String,
    pub sample_rate: u32,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcription {
    pub chosen_options: Vec<usize>,
    pub word_times: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemProgress {
    pub item_id: String,
    pub state: ItemState,
    pub transitions: Vec<Transition>,
    pub beep_delta_s: Option<f64>,
    pub beep_flagged: bool,
    pub recording: Option<Recording>,
    pub self_rating: Option<u8>,
    pub transcription: Option<Transcription>,
}

impl ItemProgress {
    fn new(item_id: String) -> Self {
        Self {
            item_id,
            state: ItemState::Pending,
            transitions: Vec::new(),
            beep_delta_s: None,
            beep_flagged: false,
            recording: None,
            self_rating: None,
            transcription: None,
        }
    }

    fn advance(&mut self, from: ItemState, to: ItemState, event: &str, at: f64) -> Result<(), ServiceError> {
        if self.state != from {
            return Err(self.illegal(event));
        }
        self.state = to;
        self.transitions.push(Transition { state: to, at });
        Ok(())
    }

    fn illegal(&self, event: &str) -> ServiceError {
        ServiceError::IllegalTransition {
            item_id: self.item_id.clone(),
            state: self.state.as_str().to_string(),
            event: event.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElicitationSession {
    pub session_id: String,
    pub speaker_id: String,
    pub item_set: String,
    pub seed: u64,
    pub created_at: f64,
    /// Items in presentation order.
    pub items: Vec<ItemProgress>,
    /// Index of the item being elicited.
    pub cursor: usize,
}

impl ElicitationSession {
    pub fn new(
        session_id: String,
        speaker_id: String,
        item_set: String,
        items: &[Item],
        seed: u64,
        created_at: f64,
    ) -> Result<Self, ServiceError> {
        if items.is_empty() {
            return Err(ServiceError::UnknownItemSet(item_set));
        }
        let items = seeded_permutation(items.len(), seed)
            .into_iter()
            .map(|i| ItemProgress::new(items[i].item_id.clone()))
            .collect();
        Ok(Self {
            session_id,
            speaker_id,
            item_set,
            seed,
            created_at,
            items,
            cursor: 0,
        })
    }

    pub fn order(&self) -> Vec<&str> {
        self.items.iter().map(|p| p.item_id.as_str()).collect()
    }

    pub fn current(&self) -> Option<&ItemProgress> {
        self.items.get(self.cursor)
    }

    pub fn progress(&self, item_id: &str) -> Result<&ItemProgress, ServiceError> {
        self.items
            .iter()
            .find(|p| p.item_id == item_id)
            .ok_or_else(|| ServiceError::UnknownItem(item_id.to_string()))
    }

    fn progress_mut(&mut self, item_id: &str) -> Result<&mut ItemProgress, ServiceError> {
        self.items
            .iter_mut()
            .find(|p| p.item_id == item_id)
            .ok_or_else(|| ServiceError::UnknownItem(item_id.to_string()))
    }

    pub fn flagged(&self) -> bool {
        self.items.iter().any(|p| p.beep_flagged)
    }

    pub fn apply(&mut self, event: &ElicitationEvent, item: &Item, at: f64) -> Result<(), ServiceError> {
        let name = event.name();
        match event {
            ElicitationEvent::ShowContext { item_id } => {
                let is_current = self.current().is_some_and(|c| c.item_id == *item_id);
                let p = self.progress_mut(item_id)?;
                if !is_current {
                    return Err(p.illegal(name));
                }
                p.advance(ItemState::Pending, ItemState::ContextShown, name, at)
            }
            ElicitationEvent::RevealTargets { item_id } => {
                self.progress_mut(item_id)?
                    .advance(ItemState::ContextShown, ItemState::TargetsRevealed, name, at)
            }
            ElicitationEvent::BeepPlayed { item_id, delta_s } => {
                let p = self.progress_mut(item_id)?;
                let allowed = matches!(p.state, ItemState::TargetsRevealed | ItemState::Recorded);
                if !allowed || p.beep_delta_s.is_some() || !delta_s.is_finite() {
                    return Err(p.illegal(name));
                }
                p.beep_delta_s = Some(*delta_s);
                p.beep_flagged = (delta_s - BEEP_OFFSET).abs() > BEEP_TOLERANCE;
                Ok(())
            }
            ElicitationEvent::SubmitSelfRating { item_id, rating } => {
                if !(1..=5).contains(rating) {
                    return Err(ServiceError::RatingOutOfRange(*rating));
                }
                let p = self.progress_mut(item_id)?;
                p.advance(ItemState::Recorded, ItemState::SelfRated, name, at)?;
                p.self_rating = Some(*rating as u8);
                if self.current().is_some_and(|c| c.item_id == *item_id) {
                    self.cursor += 1;
                }
                Ok(())
            }
            ElicitationEvent::Transcribe {
                item_id,
                chosen_options,
                word_times,
            } => {
                let p = self.progress_mut(item_id)?;
                let Some(recording) = &p.recording else {
                    return Err(p.illegal(name));
                };
                check_alignment(item, chosen_options, word_times, recording.duration)?;
                p.transcription = Some(Transcription {
                    chosen_options: chosen_options.clone(),
                    word_times: word_times.clone(),
                });
                Ok(())
            }
        }
    }

    /// Fails unless `item_id` is waiting for its recording.
    pub fn check_recording_allowed(&self, item_id: &str) -> Result<(), ServiceError> {
        let p = self.progress(item_id)?;
        if p.state != ItemState::TargetsRevealed {
            return Err(p.illegal("upload_recording"));
        }
        Ok(())
    }

    pub fn attach_recording(&mut self, item_id: &str, recording: Recording, at: f64) -> Result<(), ServiceError> {
        let p = self.progress_mut(item_id)?;
        p.advance(ItemState::TargetsRevealed, ItemState::Recorded, "upload_recording", at)?;
        p.recording = Some(recording);
        Ok(())
    }
}

fn check_alignment(
    item: &Item,
    chosen: &[usize],
    times: &[(f64, f64)],
    duration: f64,
) -> Result<(), ServiceError> {
    let bad = |m: String| Err(ServiceError::InvalidAlignment(m));
    let Some((words, _)) = item.fill(chosen) else {
        return bad(format!("chosen options {chosen:?} do not fit item {}", item.item_id));
    };
    if chosen.len() != item.slot_count() {
        return bad(format!("expected {} chosen options, got {}", item.slot_count(), chosen.len()));
    }
    if times.len() != words.len() {
        return bad(format!("{} words but {} time spans", words.len(), times.len()));
    }
    let mut last = 0.0;
    for (i, &(s, e)) in times.iter().enumerate() {
        if !(s >= last && e > s && e <= duration + 1e-9) {
            return bad(format!("word {i} span ({s}, {e}) is out of order or outside the recording"));
        }
        last = e;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSession {
    pub session_id: String,
    pub judge_id: String,
    pub seed: u64,
    pub created_at: f64,
    /// Utterance ids in playback order.
    pub playlist: Vec<String>,
    pub ratings: BTreeMap<String, u8>,
}

impl AnnotationSession {
    /// `utterances` are shuffled with `seed` into the playlist.
    pub fn new(session_id: String, judge_id: String, utterances: &[String], seed: u64, created_at: f64) -> Self {
        let playlist = seeded_permutation(utterances.len(), seed)
            .into_iter()
            .map(|i| utterances[i].clone())
            .collect();
        Self {
            session_id,
            judge_id,
            seed,
            created_at,
            playlist,
            ratings: BTreeMap::new(),
        }
    }

    pub fn rate(&mut self, utterance_id: &str, rating: i64) -> Result<(), ServiceError> {
        if !(1..=5).contains(&rating) {
            return Err(ServiceError::RatingOutOfRange(rating));
        }
        if !self.playlist.iter().any(|u| u == utterance_id) {
            return Err(ServiceError::UnknownUtterance(utterance_id.to_string()));
        }
        if self.ratings.contains_key(utterance_id) {
            return Err(ServiceError::DuplicateRating(utterance_id.to_string()));
        }
        self.ratings.insert(utterance_id.to_string(), rating as u8);
        Ok(())
    }

    pub fn is_complete(&self) -> bool {
        self.ratings.len() == self.playlist.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn item() -> Item {
        serde_json::from_str(
            r#"{"item_id":"x","domain":"transit","context_text":"the ___ bus","options":[["red","very blue"]],"correct_options":[0]}"#,
        )
        .unwrap()
    }

    #[test]
    fn permutations_are_pinned_per_seed() {
        assert_eq!(seeded_permutation(6, 42), [2, 1, 5, 4, 3, 0]);
        assert_eq!(seeded_permutation(6, 7), [0, 3, 5, 2, 4, 1]);
        assert!(seeded_permutation(0, 1).is_empty());
    }

    #[test]
    fn alignment_counts_multiword_options() {
        let it = item();
        assert!(check_alignment(&it, &[1], &[(0.0, 0.2), (0.2, 0.4), (0.4, 0.6), (0.6, 0.9)], 1.0).is_ok());
        assert!(check_alignment(&it, &[0], &[(0.0, 0.2), (0.2, 0.4), (0.4, 0.6), (0.6, 0.9)], 1.0).is_err());
        assert!(check_alignment(&it, &[0], &[(0.0, 0.2), (0.2, 0.4), (0.4, 1.2)], 1.0).is_err());
        assert!(check_alignment(&it, &[0], &[(0.0, 0.2), (0.1, 0.4), (0.4, 0.6)], 1.0).is_err());
    }

    #[test]
    fn beep_tolerance_edges() {
        let mut s = ElicitationSession::new("s".into(), "spk".into(), "set".into(), &[item()], 0, 0.0).unwrap();
        let id = || "x".to_string();
        s.apply(&ElicitationEvent::ShowContext { item_id: id() }, &item(), 1.0).unwrap();
        s.apply(&ElicitationEvent::RevealTargets { item_id: id() }, &item(), 2.0).unwrap();
        s.apply(&ElicitationEvent::BeepPlayed { item_id: id(), delta_s: 1.54 }, &item(), 3.5).unwrap();
        assert!(!s.flagged());
        let again = s.apply(&ElicitationEvent::BeepPlayed { item_id: id(), delta_s: 1.5 }, &item(), 3.6);
        assert!(matches!(again, Err(ServiceError::IllegalTransition { .. })));
    }

    proptest! {
        #[test]
        fn permutation_is_a_bijection(n in 0usize..60, seed in any::<u64>()) {
            let mut p = seeded_permutation(n, seed);
            prop_assert_eq!(&p, &seeded_permutation(n, seed));
            p.sort_unstable();
            prop_assert_eq!(p, (0..n).collect::<Vec<_>>());
        }

        #[test]
        fn listener_ratings_accept_each_utterance_once(ratings in proptest::collection::vec(-2i64..8, 1..12)) {
            let ids: Vec<String> = (0..ratings.len()).map(|i| format!("u{i}")).collect();
            let mut a = AnnotationSession::new("a".into(), "j".into(), &ids, 3, 0.0);
            for (id, &r) in ids.iter().zip(&ratings) {
                let res = a.rate(id, r);
                prop_assert_eq!(res.is_ok(), (1..=5).contains(&r));
            }
            let valid = ratings.iter().filter(|r| (1..=5).contains(*r)).count();
            prop_assert_eq!(a.ratings.len(), valid);
            prop_assert_eq!(a.is_complete(), valid == ids.len());
        }
    }
}
