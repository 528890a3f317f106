//! The generative process: source chunks, the target buffer, and the
//! active/sensory states that cross the boundary between translator and
//! text.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use thiserror::Error;

use crate::model::{CandidateSpace, ChunkId, ReadingEvidenceModel};

/// Marker rendered for an empty target slot.
pub const GAP_MARKER: &str = "_";

/// Active states: what the translator does to the environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    FixateSource(ChunkId),
    FixateTarget(usize),
    TypeChunk { chunk: ChunkId, slot: usize },
    Delete(usize),
    /// Duration in milliseconds.
    Pause(u64),
    Consult(u32),
}

impl Action {
    pub fn is_typing(&self) -> bool {
        matches!(self, Action::TypeChunk { .. })
    }

    /// Reading and pausing are the information-seeking actions.
    pub fn is_epistemic(&self) -> bool {
        matches!(self, Action::FixateSource(_) | Action::Pause(_))
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::FixateSource(c) => write!(f, "read {c}"),
            Action::FixateTarget(s) => write!(f, "look slot {s}"),
            Action::TypeChunk { chunk, slot } => write!(f, "type {chunk}@{slot}"),
            Action::Delete(s) => write!(f, "delete slot {s}"),
            Action::Pause(ms) => write!(f, "pause {ms}ms"),
            Action::Consult(r) => write!(f, "consult {r}"),
        }
    }
}

/// Sensory states: what the translator receives back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Observation {
    /// Ordering cue picked up while reading a source chunk; `cue` indexes the
    /// candidate space.
    OrderingCue { chunk: ChunkId, cue: usize },
    PlacementFeedback { slot: usize, chunk: Option<ChunkId> },
    TargetGlimpse(Vec<Option<ChunkId>>),
    Null,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("slot {slot} outside 1..={slots}")]
    SlotOutOfRange { slot: usize, slots: usize },
    #[error("unknown chunk {0}")]
    UnknownChunk(ChunkId),
    #[error("slot {slot} already holds chunk {occupant}; delete it first")]
    SlotOccupied { slot: usize, occupant: ChunkId },
    #[error("chunk {chunk} is already placed at slot {slot}")]
    AlreadyPlaced { chunk: ChunkId, slot: usize },
    #[error("slot {0} is empty, nothing to delete")]
    NothingToDelete(usize),
    #[error("chunk {0} has no source text to read")]
    NoSourceText(ChunkId),
}

/// External states of one episode.
#[derive(Debug, Clone)]
pub struct ExternalState {
    space: Arc<CandidateSpace>,
    buffer: Vec<Option<ChunkId>>,
    latent: usize,
    cue_script: BTreeMap<ChunkId, usize>,
}

impl ExternalState {
    pub fn new(space: Arc<CandidateSpace>, latent: usize) -> Self {
        assert!(latent < space.len(), "latent ordering out of range");
        let buffer = vec![None; space.slot_count()];
        Self {
            space,
            buffer,
            latent,
            cue_script: BTreeMap::new(),
        }
    }

    /// Forces the cue emitted on reading a chunk, overriding the channel.
    pub fn with_cue_script(mut self, script: BTreeMap<ChunkId, usize>) -> Self {
        self.cue_script = script;
        self
    }

    pub fn space(&self) -> &CandidateSpace {
        &self.space
    }

    pub fn buffer(&self) -> &[Option<ChunkId>] {
        &self.buffer
    }

    pub fn latent(&self) -> usize {
        self.latent
    }

    pub fn slot_count(&self) -> usize {
        self.buffer.len()
    }

    pub fn occupant(&self, slot: usize) -> Option<ChunkId> {
        self.buffer.get(slot.wrapping_sub(1)).copied().flatten()
    }

    pub fn slot_of(&self, chunk: ChunkId) -> Option<usize> {
        self.buffer.iter().position(|&c| c == Some(chunk)).map(|i| i + 1)
    }

    pub fn is_complete(&self) -> bool {
        self.buffer.iter().all(Option::is_some)
    }

    /// Placed target texts in slot order, gaps marked with [`GAP_MARKER`].
    pub fn render_target(&self) -> String {
        self.buffer
            .iter()
            .map(|slot| match slot.and_then(|c| self.space.table().get(c)) {
                Some(chunk) => chunk.target_text.as_str(),
                None => GAP_MARKER,
            })
            .collect()
    }

    fn check_slot(&self, slot: usize) -> Result<(), EnvError> {
        let slots = self.buffer.len();
        if slot == 0 || slot > slots {
            return Err(EnvError::SlotOutOfRange { slot, slots });
        }
        Ok(())
    }

    /// Executes one action and emits the resulting observation. A failed
    /// action leaves the state untouched.
    pub fn apply_action<R: Rng + ?Sized>(
        &mut self,
        action: Action,
        evidence: &ReadingEvidenceModel,
        rng: &mut R,
    ) -> Result<Observation, EnvError> {
        match action {
            Action::FixateSource(chunk) => {
                let c = self
                    .space
                    .table()
                    .get(chunk)
                    .ok_or(EnvError::UnknownChunk(chunk))?;
                if !c.is_content() {
                    return Err(EnvError::NoSourceText(chunk));
                }
                let cue = match self.cue_script.get(&chunk) {
                    Some(&cue) => cue,
                    None => {
                        let weights = evidence.cue_distribution(chunk, self.latent);
                        // Rows are valid distributions, so this cannot fail.
                        let dist = WeightedIndex::new(&weights).expect("cue row");
                        dist.sample(rng)
                    }
                };
                Ok(Observation::OrderingCue { chunk, cue })
            }
            Action::TypeChunk { chunk, slot } => {
                self.check_slot(slot)?;
                if self.space.table().get(chunk).is_none() {
                    return Err(EnvError::UnknownChunk(chunk));
                }
                if let Some(occupant) = self.occupant(slot) {
                    return Err(EnvError::SlotOccupied { slot, occupant });
                }
                if let Some(at) = self.slot_of(chunk) {
                    return Err(EnvError::AlreadyPlaced { chunk, slot: at });
                }
                self.buffer[slot - 1] = Some(chunk);
                Ok(Observation::PlacementFeedback {
                    slot,
                    chunk: Some(chunk),
                })
            }
            Action::Delete(slot) => {
                self.check_slot(slot)?;
                if self.buffer[slot - 1].take().is_none() {
                    return Err(EnvError::NothingToDelete(slot));
                }
                Ok(Observation::PlacementFeedback { slot, chunk: None })
            }
            Action::FixateTarget(slot) => {
                self.check_slot(slot)?;
                Ok(Observation::TargetGlimpse(self.buffer.clone()))
            }
            Action::Pause(_) | Action::Consult(_) => Ok(Observation::Null),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(latent: usize) -> (ExternalState, ReadingEvidenceModel, ChaCha8Rng) {
        let space = Arc::new(table2_space());
        let evidence = ReadingEvidenceModel::with_defaults(space.table(), space.len());
        (
            ExternalState::new(space, latent),
            evidence,
            ChaCha8Rng::seed_from_u64(1),
        )
    }

    #[test]
    fn typing_then_deleting() {
        let (mut env, ev, mut rng) = setup(0);
        let obs = env
            .apply_action(Action::TypeChunk { chunk: ChunkId(1), slot: 1 }, &ev, &mut rng)
            .unwrap();
        assert_eq!(obs, Observation::PlacementFeedback { slot: 1, chunk: Some(ChunkId(1)) });
        assert_eq!(env.occupant(1), Some(ChunkId(1)));
        let obs = env.apply_action(Action::Delete(1), &ev, &mut rng).unwrap();
        assert_eq!(obs, Observation::PlacementFeedback { slot: 1, chunk: None });
        assert_eq!(env.occupant(1), None);
    }

    #[test]
    fn occupancy_errors() {
        let (mut env, ev, mut rng) = setup(0);
        let t = |c, s| Action::TypeChunk { chunk: ChunkId(c), slot: s };
        env.apply_action(t(1, 1), &ev, &mut rng).unwrap();
        assert_eq!(
            env.apply_action(t(2, 1), &ev, &mut rng),
            Err(EnvError::SlotOccupied { slot: 1, occupant: ChunkId(1) })
        );
        assert_eq!(
            env.apply_action(t(1, 2), &ev, &mut rng),
            Err(EnvError::AlreadyPlaced { chunk: ChunkId(1), slot: 1 })
        );
        assert_eq!(
            env.apply_action(Action::Delete(2), &ev, &mut rng),
            Err(EnvError::NothingToDelete(2))
        );
        assert!(matches!(
            env.apply_action(t(2, 6), &ev, &mut rng),
            Err(EnvError::SlotOutOfRange { .. })
        ));
        assert_eq!(
            env.apply_action(Action::FixateSource(ChunkId(0)), &ev, &mut rng),
            Err(EnvError::NoSourceText(ChunkId(0)))
        );
    }

    #[test]
    fn noiseless_cue_names_latent() {
        let (env, ev, mut rng) = setup(3);
        let ev = ev.with_content_reliability(env.space().table(), 1.0);
        let mut env = env;
        for _ in 0..20 {
            let obs = env.apply_action(Action::FixateSource(ChunkId(3)), &ev, &mut rng).unwrap();
            assert_eq!(obs, Observation::OrderingCue { chunk: ChunkId(3), cue: 3 });
        }
    }

    #[test]
    fn scripted_cue_overrides_channel() {
        let (env, ev, mut rng) = setup(5);
        let mut env = env.with_cue_script([(ChunkId(1), 0)].into_iter().collect());
        let obs = env.apply_action(Action::FixateSource(ChunkId(1)), &ev, &mut rng).unwrap();
        assert_eq!(obs, Observation::OrderingCue { chunk: ChunkId(1), cue: 0 });
    }

    #[test]
    fn completion_and_rendering() {
        let (mut env, ev, mut rng) = setup(0);
        assert!(!env.is_complete());
        assert_eq!(env.render_target(), "_____");
        env.apply_action(Action::TypeChunk { chunk: ChunkId(1), slot: 1 }, &ev, &mut rng).unwrap();
        assert_eq!(env.render_target(), "その結果____");
        for (slot, c) in [(2, 0), (3, 2), (4, 4)] {
            env.apply_action(Action::TypeChunk { chunk: ChunkId(c), slot }, &ev, &mut rng).unwrap();
        }
        assert!(!env.is_complete());
        env.apply_action(Action::TypeChunk { chunk: ChunkId(3), slot: 5 }, &ev, &mut rng).unwrap();
        assert!(env.is_complete());
        assert_eq!(
            env.render_target(),
            "その結果、絶対的リーダーや官僚、職人が狩猟採集民族社会から支持されることは、めったにありませんでした"
        );
    }

    #[test]
    fn glimpse_and_pause_leave_state_alone() {
        let (mut env, ev, mut rng) = setup(2);
        let before = env.buffer().to_vec();
        assert_eq!(env.apply_action(Action::Pause(800), &ev, &mut rng).unwrap(), Observation::Null);
        assert_eq!(env.apply_action(Action::Consult(1), &ev, &mut rng).unwrap(), Observation::Null);
        assert_eq!(
            env.apply_action(Action::FixateTarget(2), &ev, &mut rng).unwrap(),
            Observation::TargetGlimpse(before.clone())
        );
        assert_eq!(env.buffer(), &before[..]);
        assert_eq!(env.latent(), 2);
    }

    proptest::proptest! {
        #[test]
        fn buffer_stays_a_partial_permutation(ops in proptest::collection::vec((0u8..5, 1usize..6, proptest::bool::ANY), 0..40)) {
            let (mut env, ev, mut rng) = setup(0);
            for (chunk, slot, delete) in ops {
                let action = if delete { Action::Delete(slot) } else { Action::TypeChunk { chunk: ChunkId(chunk), slot } };
                let _ = env.apply_action(action, &ev, &mut rng);
                let placed: Vec<_> = env.buffer().iter().flatten().collect();
                let mut dedup = placed.clone();
                dedup.sort();
                dedup.dedup();
                proptest::prop_assert_eq!(placed.len(), dedup.len());
            }
            proptest::prop_assert_eq!(env.latent(), 0);
            proptest::prop_assert_eq!(env.space().len(), 6);
        }
    }
}
