//! Cognitive layer: beliefs over candidate orderings.
//!
//! Two distributions are kept. `evidence` accumulates reading cues only.
//! `belief` is the evidence restricted to orderings that agree with every
//! placed slot; it is what planning uses and what traces report.

use std::collections::{BTreeMap, BTreeSet};

use crate::categorical::{Categorical, PROB_FLOOR};
use crate::inference::{bayes_update, GenerativeModel, InferenceError};
use crate::model::{CandidateSpace, ChunkId};

#[derive(Debug, Clone, PartialEq)]
pub struct CognitiveState {
    pub evidence: Categorical,
    pub belief: Categorical,
    pub placed: BTreeMap<usize, ChunkId>,
    pub read_set: BTreeSet<ChunkId>,
}

/// What absorbing an observation did to the cognitive state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Absorbed {
    /// Surprisal of the observation under the pre-update belief, in bits.
    pub surprisal: f64,
    /// The observation was impossible under the evidence and the evidence
    /// was rebuilt from this cue alone.
    pub evidence_reset: bool,
    /// No ordering agreed with both the evidence and the placed slots.
    pub placement_conflict: bool,
}

impl CognitiveState {
    pub fn new(space: &CandidateSpace) -> Self {
        Self {
            evidence: space.prior().clone(),
            belief: space.prior().clone(),
            placed: BTreeMap::new(),
            read_set: BTreeSet::new(),
        }
    }

    pub fn consistent(space: &CandidateSpace, placed: &BTreeMap<usize, ChunkId>, ordering: usize) -> bool {
        let o = space.ordering(ordering);
        placed.iter().all(|(&slot, &chunk)| o.places(chunk, slot))
    }

    /// Mass the committed belief puts on orderings that contradict a
    /// placed slot. Zero by construction.
    pub fn inconsistent_mass(&self, space: &CandidateSpace) -> f64 {
        (0..space.len())
            .filter(|&i| !Self::consistent(space, &self.placed, i))
            .map(|i| self.belief.get(i))
            .sum()
    }

    /// Rebuilds the committed belief from the evidence. When nothing
    /// survives, falls back to the prior over orderings that fit the
    /// placed slots and reports the conflict.
    fn recommit(&mut self, space: &CandidateSpace) -> bool {
        let mask: Vec<f64> = (0..space.len())
            .map(|i| if Self::consistent(space, &self.placed, i) { 1.0 } else { 0.0 })
            .collect();
        match bayes_update(&self.evidence, &mask, 1.0) {
            Ok(b) => {
                self.belief = b;
                false
            }
            Err(_) => {
                self.belief = bayes_update(space.prior(), &mask, 1.0)
                    .unwrap_or_else(|_| space.prior().clone());
                true
            }
        }
    }

    /// Absorbs an ordering cue from reading `chunk`, tempering its
    /// likelihood by `zeta`.
    pub fn absorb_cue(
        &mut self,
        model: &GenerativeModel,
        chunk: ChunkId,
        cue: usize,
        zeta: f64,
    ) -> Result<Absorbed, InferenceError> {
        let lik = model.evidence.cue_likelihoods(chunk, cue);
        let predictive: f64 = self.belief.probs().iter().zip(&lik).map(|(b, l)| b * l).sum();
        let surprisal = -predictive.max(PROB_FLOOR).log2();
        self.read_set.insert(chunk);
        let evidence_reset = match bayes_update(&self.evidence, &lik, zeta) {
            Ok(e) => {
                self.evidence = e;
                false
            }
            Err(InferenceError::Contradiction) => {
                let flat = Categorical::uniform(self.evidence.len());
                self.evidence = bayes_update(&flat, &lik, zeta)?;
                true
            }
            Err(e) => return Err(e),
        };
        let placement_conflict = self.recommit(&model.space);
        Ok(Absorbed {
            surprisal: surprisal.max(0.0),
            evidence_reset,
            placement_conflict,
        })
    }

    /// Absorbs the buffer change caused by typing `chunk` into `slot`.
    pub fn absorb_placement(&mut self, space: &CandidateSpace, slot: usize, chunk: ChunkId) -> Absorbed {
        let fits: f64 = (0..space.len())
            .filter(|&i| space.ordering(i).places(chunk, slot))
            .map(|i| self.belief.get(i))
            .sum();
        self.placed.insert(slot, chunk);
        let placement_conflict = self.recommit(space);
        Absorbed {
            surprisal: (-fits.max(PROB_FLOOR).log2()).max(0.0),
            evidence_reset: false,
            placement_conflict,
        }
    }

    pub fn absorb_deletion(&mut self, space: &CandidateSpace, slot: usize) -> Absorbed {
        self.placed.remove(&slot);
        let placement_conflict = self.recommit(space);
        Absorbed {
            surprisal: 0.0,
            evidence_reset: false,
            placement_conflict,
        }
    }

    /// Placed slots that disagree with the evidence MAP ordering, in slot
    /// order.
    pub fn slots_to_revise(&self, space: &CandidateSpace) -> Vec<usize> {
        let map = space.ordering(self.evidence.argmax());
        self.placed
            .iter()
            .filter(|(&slot, &chunk)| !map.places(chunk, slot))
            .map(|(&slot, _)| slot)
            .collect()
    }
}
