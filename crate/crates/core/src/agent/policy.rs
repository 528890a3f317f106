//! Policy enumeration and precision-weighted selection.

use rand::Rng;

use super::cognition::CognitiveState;
use super::config::{ReadAhead, Selection};
use super::message::{Layer, Message, Payload};
use crate::categorical::Categorical;
use crate::environment::Action;
use crate::inference::{
    evaluate_policies, policy_posterior, EFEDecomposition, EfeWeights, GenerativeModel,
    InferenceError, PreferenceVector,
};
use crate::model::{CandidateSpace, ChunkId, ChunkKind};

/// Branching limits applied during enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyLimits {
    pub max_policies: usize,
    pub pause_ms: u64,
    pub read_ahead: ReadAhead,
}

/// Enumerates admissible policies of length `1..=horizon`.
///
/// A policy is a set of actions listed in execution order: reads of unread
/// source chunks in source order, then placements in slot order. Reading
/// and placement outcomes commute, so this canonical order loses nothing
/// and puts reads before any typing they enable. A chunk is typeable once
/// it has been read (punctuation once its host has), either already or by
/// an earlier read in the same policy. Placements follow the current MAP
/// ordering. Under full read-ahead no placement is offered while any chunk
/// is unread. A lone pause is always admissible. The list is empty exactly
/// when every slot is filled.
pub fn enumerate_policies(
    cognition: &CognitiveState,
    space: &CandidateSpace,
    buffer: &[Option<ChunkId>],
    horizon: usize,
    limits: &PolicyLimits,
) -> Vec<Vec<Action>> {
    assert!(horizon >= 1, "horizon must be at least 1");
    if buffer.iter().all(Option::is_some) {
        return Vec::new();
    }
    let table = space.table();
    let reads: Vec<ChunkId> = table
        .source_order()
        .iter()
        .copied()
        .filter(|c| !cognition.read_set.contains(c))
        .collect();

    let map = space.ordering(cognition.belief.argmax());
    let mut types: Vec<(Action, ChunkId)> = Vec::new();
    let typing_open = limits.read_ahead == ReadAhead::OnDemand || reads.is_empty();
    for slot in 1..=buffer.len() {
        if buffer[slot - 1].is_some() {
            continue;
        }
        let Some(chunk) = map.chunk_at(slot) else {
            continue;
        };
        if buffer.contains(&Some(chunk)) {
            continue;
        }
        let gate = match table.get(chunk) {
            Some(c) if c.kind == ChunkKind::Punctuation => c.host.unwrap_or(chunk),
            _ => chunk,
        };
        types.push((Action::TypeChunk { chunk, slot }, gate));
    }
    if !typing_open {
        types.clear();
    }

    let items: Vec<(Action, Option<ChunkId>)> = reads
        .iter()
        .map(|&c| (Action::FixateSource(c), None))
        .chain(types.iter().map(|&(a, g)| (a, Some(g))))
        .collect();

    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(horizon);
    'sizes: for size in 1..=horizon.min(items.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            chosen.clear();
            chosen.extend(idx.iter().map(|&i| items[i]));
            let admissible = chosen.iter().all(|(_, gate)| match gate {
                None => true,
                Some(g) => {
                    cognition.read_set.contains(g)
                        || chosen.iter().any(|(a, _)| *a == Action::FixateSource(*g))
                }
            });
            if admissible {
                out.push(chosen.iter().map(|(a, _)| *a).collect());
                if out.len() + 1 >= limits.max_policies {
                    break 'sizes;
                }
            }
            if !next_combination(&mut idx, items.len()) {
                break;
            }
        }
    }
    out.push(vec![Action::Pause(limits.pause_ms)]);
    out
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[derive(Debug, Clone)]
pub struct PolicyChoice {
    pub index: usize,
    pub policy: Vec<Action>,
    pub efes: Vec<EFEDecomposition>,
    pub posterior: Categorical,
    pub messages: Vec<Message>,
}

impl PolicyChoice {
    pub fn posterior_entropy(&self) -> f64 {
        self.posterior.entropy()
    }

    /// Posterior mass on policies that open with a placement.
    pub fn commit_mass(&self, policies: &[Vec<Action>]) -> f64 {
        policies
            .iter()
            .zip(self.posterior.probs())
            .filter(|(p, _)| p[0].is_typing())
            .map(|(_, w)| w)
            .sum()
    }

    /// Entropy (bits) of the split between committing to a placement and
    /// gathering more evidence. Placements drawn from one ordering do not
    /// compete with each other, so ties among them do not count.
    pub fn commitment_entropy(&self, policies: &[Vec<Action>]) -> f64 {
        let p = self.commit_mass(policies).clamp(0.0, 1.0);
        crate::categorical::shannon_entropy(&[p, 1.0 - p])
    }
}

/// Scores `policies` by expected free energy under `belief`, weighs them
/// with precision `gamma` and picks one.
#[allow(clippy::too_many_arguments)]
pub fn select_policy<R: Rng + ?Sized>(
    policies: &[Vec<Action>],
    belief: &Categorical,
    model: &GenerativeModel,
    prefs: &PreferenceVector,
    weights: EfeWeights,
    gamma: f64,
    zeta: f64,
    selection: Selection,
    rng: &mut R,
) -> Result<PolicyChoice, InferenceError> {
    if policies.is_empty() {
        return Err(InferenceError::EmptyPolicy);
    }
    let efes = evaluate_policies(belief, policies, model, prefs, weights)?;
    let posterior = policy_posterior(&efes, gamma);
    let index = match selection {
        Selection::Argmax => posterior.argmax(),
        Selection::Sample => sample_index(posterior.probs(), rng),
    };
    let messages = vec![
        Message {
            from: Layer::Affective,
            to: Layer::Behavioral,
            payload: Payload::Precision { gamma, zeta },
        },
        Message {
            from: Layer::Cognitive,
            to: Layer::Behavioral,
            payload: Payload::BeliefSummary {
                map_ordering: belief.argmax(),
                entropy: belief.entropy(),
            },
        },
        Message {
            from: Layer::Behavioral,
            to: Layer::Cognitive,
            payload: Payload::PolicySummary {
                posterior_entropy: posterior.entropy(),
                policies: policies.len(),
            },
        },
    ];
    Ok(PolicyChoice {
        index,
        policy: policies[index].clone(),
        efes,
        posterior,
        messages,
    })
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::agent::config::AgentConfig;
    use crate::model::fixtures::table2_space;
    use crate::model::ReadingEvidenceModel;

    fn limits() -> PolicyLimits {
        PolicyLimits {
            max_policies: 512,
            pause_ms: 800,
            read_ahead: ReadAhead::OnDemand,
        }
    }

    fn empty_buffer() -> Vec<Option<ChunkId>> {
        vec![None; 5]
    }

    fn model() -> GenerativeModel {
        let space = Arc::new(table2_space());
        let ev = ReadingEvidenceModel::with_defaults(space.table(), space.len());
        GenerativeModel::new(space, ev)
    }

    fn contains(policies: &[Vec<Action>], p: &[Action]) -> bool {
        policies.iter().any(|q| q == p)
    }

    const READ1: Action = Action::FixateSource(ChunkId(1));
    const TYPE1_AT1: Action = Action::TypeChunk {
        chunk: ChunkId(1),
        slot: 1,
    };

    #[test]
    fn full_buffer_has_no_policies() {
        let space = table2_space();
        let cog = CognitiveState::new(&space);
        let full: Vec<_> = space.ordering(0).slots().iter().map(|&c| Some(c)).collect();
        assert!(enumerate_policies(&cog, &space, &full, 3, &limits()).is_empty());
    }

    #[test]
    fn start_state_reads_then_types() {
        let space = table2_space();
        let cog = CognitiveState::new(&space);
        let one = enumerate_policies(&cog, &space, &empty_buffer(), 1, &limits());
        assert!(contains(&one, &[READ1]));
        assert!(contains(&one, &[Action::Pause(800)]));
        assert!(one.iter().all(|p| p.len() == 1 && !p[0].is_typing()));

        let two = enumerate_policies(&cog, &space, &empty_buffer(), 2, &limits());
        assert!(contains(&two, &[READ1, TYPE1_AT1]));
        assert!(!contains(&two, &[TYPE1_AT1]));
        let mut dedup = two.clone();
        dedup.sort_by_key(|p| format!("{p:?}"));
        dedup.dedup();
        assert_eq!(dedup.len(), two.len());
    }

    #[test]
    fn comma_follows_its_host() {
        let space = table2_space();
        let mut cog = CognitiveState::new(&space);
        cog.read_set.insert(ChunkId(1));
        let one = enumerate_policies(&cog, &space, &empty_buffer(), 1, &limits());
        assert!(contains(&one, &[TYPE1_AT1]));
        assert!(contains(
            &one,
            &[Action::TypeChunk {
                chunk: ChunkId(0),
                slot: 2
            }]
        ));
    }

    #[test]
    fn point_mass_restricts_typing_to_its_slots() {
        let space = table2_space();
        let mut cog = CognitiveState::new(&space);
        cog.belief = Categorical::point_mass(6, 3);
        cog.evidence = cog.belief.clone();
        for c in 1..=4 {
            cog.read_set.insert(ChunkId(c));
        }
        let tt3 = space.ordering(3);
        let one = enumerate_policies(&cog, &space, &empty_buffer(), 1, &limits());
        let typed: Vec<_> = one.iter().filter(|p| p[0].is_typing()).collect();
        assert_eq!(typed.len(), 5);
        for p in typed {
            if let Action::TypeChunk { chunk, slot } = p[0] {
                assert!(tt3.places(chunk, slot));
            }
        }
    }

    #[test]
    fn cap_is_respected() {
        let space = table2_space();
        let cog = CognitiveState::new(&space);
        let capped = PolicyLimits {
            max_policies: 7,
            pause_ms: 800,
            read_ahead: ReadAhead::OnDemand,
        };
        let ps = enumerate_policies(&cog, &space, &empty_buffer(), 4, &capped);
        assert_eq!(ps.len(), 7);
        assert_eq!(ps.last().unwrap(), &vec![Action::Pause(800)]);
    }

    #[test]
    fn presets_open_differently_after_first_read() {
        let m = model();
        let space = m.space.clone();
        let mut cog = CognitiveState::new(&space);
        cog.read_set.insert(ChunkId(1));
        let cue = m.evidence.cue_likelihoods(ChunkId(1), 0);
        cog.evidence = crate::inference::bayes_update(&cog.evidence, &cue, 1.0).unwrap();
        cog.belief = cog.evidence.clone();
        let prefs = PreferenceVector::flat(6);
        let mut rng = ChaCha8Rng::seed_from_u64(0);

        let hs = AgentConfig::head_starter();
        let ps = enumerate_policies(&cog, &space, &empty_buffer(), 1, &limits());
        let choice = select_policy(
            &ps, &cog.belief, &m, &prefs, hs.weights, hs.affect.gamma_max, 1.0,
            Selection::Argmax, &mut rng,
        )
        .unwrap();
        assert!(choice.policy[0].is_typing(), "{:?}", choice.policy);

        let pl = AgentConfig::large_context_planner();
        let h = pl.horizon.resolve(3);
        let ps = enumerate_policies(&cog, &space, &empty_buffer(), h, &limits());
        let choice = select_policy(
            &ps, &cog.belief, &m, &prefs, pl.weights, pl.affect.gamma_max, 1.0,
            Selection::Argmax, &mut rng,
        )
        .unwrap();
        assert!(matches!(choice.policy[0], Action::FixateSource(_)), "{:?}", choice.policy);
    }

    #[test]
    fn full_read_ahead_withholds_placements_until_everything_is_read() {
        let space = table2_space();
        let mut cog = CognitiveState::new(&space);
        let full = PolicyLimits {
            read_ahead: ReadAhead::Full,
            ..limits()
        };
        for c in 1..=3 {
            cog.read_set.insert(ChunkId(c));
        }
        let ps = enumerate_policies(&cog, &space, &empty_buffer(), 2, &full);
        assert!(ps.iter().flatten().all(|a| !a.is_typing()), "{ps:?}");
        cog.read_set.insert(ChunkId(4));
        let ps = enumerate_policies(&cog, &space, &empty_buffer(), 1, &full);
        assert_eq!(ps.iter().filter(|p| p[0].is_typing()).count(), 5);
    }

    #[test]
    fn tied_placements_do_not_raise_commitment_entropy() {
        let m = model();
        let space = m.space.clone();
        let mut cog = CognitiveState::new(&space);
        for c in 1..=4 {
            cog.read_set.insert(ChunkId(c));
        }
        cog.belief = Categorical::point_mass(6, 3);
        let ps = enumerate_policies(&cog, &space, &empty_buffer(), 1, &limits());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let w = EfeWeights { epistemic: 1.0, pragmatic: 1.0 };
        let c = select_policy(&ps, &cog.belief, &m, &PreferenceVector::flat(6), w, 4.0, 1.0, Selection::Argmax, &mut rng)
            .unwrap();
        // Five equally good placements plus a pause.
        assert!(c.posterior_entropy() > 2.0, "{}", c.posterior_entropy());
        assert!(c.commit_mass(&ps) > 0.99);
        assert!(c.commitment_entropy(&ps) < 0.1);
    }

    #[test]
    fn zero_gamma_samples_uniformly() {
        let m = model();
        let space = m.space.clone();
        let cog = CognitiveState::new(&space);
        let ps = enumerate_policies(&cog, &space, &empty_buffer(), 1, &limits());
        let prefs = PreferenceVector::flat(6);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = vec![0usize; ps.len()];
        let draws = 5000;
        for _ in 0..draws {
            let c = select_policy(
                &ps, &cog.belief, &m, &prefs, EfeWeights { epistemic: 1.0, pragmatic: 1.0 },
                0.0, 1.0, Selection::Sample, &mut rng,
            )
            .unwrap();
            counts[c.index] += 1;
        }
        let expected = draws as f64 / ps.len() as f64;
        for c in counts {
            assert!((c as f64 - expected).abs() < 5.0 * expected.sqrt(), "{c} vs {expected}");
        }
    }

    #[test]
    fn large_gamma_concentrates_on_argmax() {
        let m = model();
        let space = m.space.clone();
        let mut cog = CognitiveState::new(&space);
        cog.read_set.insert(ChunkId(1));
        let ps = enumerate_policies(&cog, &space, &empty_buffer(), 1, &limits());
        let prefs = PreferenceVector::flat(6);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = EfeWeights { epistemic: 1.0, pragmatic: 4.0 };
        let sharp = select_policy(&ps, &cog.belief, &m, &prefs, w, 1e4, 1.0, Selection::Sample, &mut rng)
            .unwrap();
        assert!(sharp.posterior.get(sharp.posterior.argmax()) > 1.0 - 1e-9);
        assert_eq!(sharp.index, sharp.posterior.argmax());
    }

    #[test]
    fn combinations_cover_all_subsets() {
        let mut idx = vec![0, 1];
        let mut seen = vec![idx.clone()];
        while next_combination(&mut idx, 4) {
            seen.push(idx.clone());
        }
        assert_eq!(seen.len(), 6);
    }
}
