//! The three-layer agent and its perception–action loop.
//!
//! Each step the affective layer hands precisions to the other two, the
//! behavioral layer picks a policy by expected free energy and executes its
//! first action, the environment answers with an observation, the
//! cognitive layer absorbs it, and the surprisal of that observation feeds
//! back into affect. Planning restarts every step.

pub mod affect;
pub mod cognition;
pub mod config;
pub mod message;
pub mod policy;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::environment::{Action, EnvError, ExternalState, Observation};
use crate::inference::{GenerativeModel, InferenceError, PreferenceVector};
use crate::model::{CandidateSpace, ChunkId};
use crate::trace::{ProcessEvent, Trace};

pub use affect::{update_affect, AffectiveState, Mood};
pub use cognition::CognitiveState;
pub use config::{
    AffectParams, AgentConfig, Horizon, MotorTiming, ReadAhead, Selection, Strategy,
};
pub use message::{Layer, Message, Payload};
pub use policy::{enumerate_policies, select_policy, PolicyChoice, PolicyLimits};

pub const HESITATION: &str = "hesitation";
pub const REVISION: &str = "revision";
pub const RETYPE: &str = "retype";
pub const POLICY_SWITCH: &str = "policy-switch";
pub const CONTRADICTION: &str = "contradiction";

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("preferences cover {got} orderings but the space has {expected}")]
    PreferenceLength { expected: usize, got: usize },
    #[error("latent ordering {0} is not in the candidate space")]
    UnknownLatent(usize),
    #[error("max_steps must be at least 1")]
    NoSteps,
    #[error("agent attempted an invalid action: {0}")]
    Environment(#[from] EnvError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BehavioralState {
    /// First actions of the currently admissible policies.
    pub repertoire: Vec<Action>,
    pub current_policy: Vec<Action>,
    /// Revision actions queued ahead of any new planning.
    pub pending: VecDeque<Action>,
    pub timing: MotorTiming,
    hesitated: bool,
    filled_before: BTreeSet<usize>,
}

impl BehavioralState {
    fn new(timing: MotorTiming) -> Self {
        Self {
            repertoire: Vec::new(),
            current_policy: Vec::new(),
            pending: VecDeque::new(),
            timing,
            hesitated: false,
            filled_before: BTreeSet::new(),
        }
    }

    /// Milliseconds `action` takes against the current buffer.
    pub fn duration(&self, action: &Action, env: &ExternalState) -> u64 {
        let chars = |chunk: Option<ChunkId>| {
            chunk
                .and_then(|c| env.space().table().get(c))
                .map_or(1, |c| c.target_text.chars().count().max(1)) as u64
        };
        match *action {
            Action::FixateSource(_) | Action::FixateTarget(_) => self.timing.fixation_ms,
            Action::TypeChunk { chunk, .. } => self.timing.keystroke_ms * chars(Some(chunk)),
            Action::Delete(slot) => self.timing.delete_ms * chars(env.occupant(slot)),
            Action::Pause(ms) => ms,
            Action::Consult(_) => self.timing.consult_ms,
        }
    }
}

/// Everything one step produced.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub action: Action,
    pub observation: Observation,
    pub surprisal: f64,
    pub event: ProcessEvent,
    /// Present when the step planned anew rather than executing a queued
    /// revision.
    pub choice: Option<PolicyChoice>,
    pub messages: Vec<Message>,
}

#[derive(Debug, Clone)]
pub struct Agent {
    pub config: AgentConfig,
    pub affect: AffectiveState,
    pub cognition: CognitiveState,
    pub behavior: BehavioralState,
    model: GenerativeModel,
    prefs: PreferenceVector,
    rng: ChaCha8Rng,
    clock_ms: u64,
}

impl Agent {
    pub fn new(
        config: AgentConfig,
        model: GenerativeModel,
        prefs: PreferenceVector,
        seed: u64,
    ) -> Result<Self, AgentError> {
        if prefs.log_pref.len() != model.orderings() {
            return Err(AgentError::PreferenceLength {
                expected: model.orderings(),
                got: prefs.log_pref.len(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        Ok(Self {
            affect: AffectiveState::initial(&config.affect),
            cognition: CognitiveState::new(&model.space),
            behavior: BehavioralState::new(config.timing),
            config,
            model,
            prefs,
            rng,
            clock_ms: 0,
        })
    }

    pub fn space(&self) -> &CandidateSpace {
        &self.model.space
    }

    pub fn clock_ms(&self) -> u64 {
        self.clock_ms
    }

    fn limits(&self) -> PolicyLimits {
        PolicyLimits {
            max_policies: self.config.max_policies,
            pause_ms: self.config.timing.pause_ms,
            read_ahead: self.config.read_ahead,
        }
    }

    /// Runs one perception–action cycle. Returns `None` once the buffer is
    /// full.
    pub fn step<R: rand::Rng + ?Sized>(
        &mut self,
        env: &mut ExternalState,
        env_rng: &mut R,
    ) -> Result<Option<StepRecord>, AgentError> {
        if env.is_complete() {
            return Ok(None);
        }
        let precision = self.affect.precision();
        let mut annotations = Vec::new();
        let mut messages = Vec::new();
        let mut choice = None;

        let action = if let Some(queued) = self.behavior.pending.pop_front() {
            annotations.push(REVISION.to_string());
            queued
        } else {
            let unread = self
                .space()
                .table()
                .source_order()
                .iter()
                .filter(|c| !self.cognition.read_set.contains(c))
                .count();
            let horizon = self.config.horizon.resolve(unread);
            let policies =
                enumerate_policies(&self.cognition, self.space(), env.buffer(), horizon, &self.limits());
            if policies.is_empty() {
                return Ok(None);
            }
            let picked = select_policy(
                &policies,
                &self.cognition.belief,
                &self.model,
                &self.prefs,
                self.config.weights,
                precision.gamma,
                precision.zeta,
                self.config.selection,
                &mut self.rng,
            )?;
            self.behavior.repertoire = policies.iter().map(|p| p[0]).collect();
            self.behavior.repertoire.dedup();
            messages.extend(picked.messages.iter().copied());

            let continues = self.behavior.current_policy.len() > 1
                && self.behavior.current_policy[1..].starts_with(&picked.policy[..1]);
            if !self.behavior.current_policy.is_empty() && !continues {
                annotations.push(POLICY_SWITCH.to_string());
            }
            self.behavior.current_policy = picked.policy.clone();

            let first = picked.policy[0];
            let unsure = picked.commitment_entropy(&policies) > self.config.theta_entropy
                || precision.gamma < self.config.theta_gamma;
            let action = if first.is_typing() && unsure && !self.behavior.hesitated {
                self.behavior.hesitated = true;
                annotations.push(HESITATION.to_string());
                Action::Pause(self.config.timing.pause_ms)
            } else {
                first
            };
            choice = Some(picked);
            action
        };
        if !matches!(action, Action::Pause(_)) {
            self.behavior.hesitated = false;
        }

        let duration = self.behavior.duration(&action, env);
        let observation = env.apply_action(action, &self.model.evidence, env_rng)?;
        let space = Arc::clone(&self.model.space);
        let absorbed = match (&action, &observation) {
            (_, Observation::OrderingCue { chunk, cue }) => {
                Some(self.cognition.absorb_cue(&self.model, *chunk, *cue, precision.zeta)?)
            }
            (_, Observation::PlacementFeedback { slot, chunk: Some(chunk) }) => {
                if self.behavior.filled_before.contains(slot) {
                    annotations.push(RETYPE.to_string());
                }
                self.behavior.filled_before.insert(*slot);
                Some(self.cognition.absorb_placement(&space, *slot, *chunk))
            }
            (_, Observation::PlacementFeedback { slot, chunk: None }) => {
                Some(self.cognition.absorb_deletion(&space, *slot))
            }
            _ => None,
        };
        let surprisal = absorbed.map_or(0.0, |a| a.surprisal);
        if absorbed.is_some_and(|a| a.evidence_reset || a.placement_conflict) {
            annotations.push(CONTRADICTION.to_string());
        }
        messages.push(Message {
            from: Layer::Cognitive,
            to: Layer::Affective,
            payload: Payload::PredictionError { surprisal },
        });
        self.affect = update_affect(&self.affect, surprisal, self.config.affect.beta, &self.config.affect);
        messages.push(Message {
            from: Layer::Affective,
            to: Layer::Cognitive,
            payload: Payload::Precision {
                gamma: self.affect.gamma,
                zeta: self.affect.zeta,
            },
        });

        if self.config.revision && self.behavior.pending.is_empty() {
            for slot in self.cognition.slots_to_revise(&space) {
                self.behavior.pending.push_back(Action::FixateTarget(slot));
                self.behavior.pending.push_back(Action::Delete(slot));
            }
        }

        let event = ProcessEvent {
            t_start: self.clock_ms,
            t_end: self.clock_ms + duration,
            action,
            belief_entropy: Some(self.cognition.belief.entropy()),
            gamma: Some(self.affect.gamma),
            zeta: Some(self.affect.zeta),
            annotations,
        };
        self.clock_ms += duration;
        Ok(Some(StepRecord {
            action,
            observation,
            surprisal,
            event,
            choice,
            messages,
        }))
    }
}

/// Ground truth of one episode: the ordering cues are drawn from, plus any
/// chunks whose cue is fixed in advance.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpisodeSetup {
    pub latent: usize,
    pub cue_script: BTreeMap<ChunkId, usize>,
}

impl EpisodeSetup {
    pub fn new(latent: usize) -> Self {
        Self {
            latent,
            cue_script: BTreeMap::new(),
        }
    }

    pub fn with_cue(mut self, chunk: ChunkId, cue: usize) -> Self {
        self.cue_script.insert(chunk, cue);
        self
    }

    /// Every content chunk cues `ordering`.
    pub fn favoring(space: &CandidateSpace, ordering: usize) -> Self {
        let mut setup = Self::new(ordering);
        for &c in space.table().source_order() {
            setup.cue_script.insert(c, ordering);
        }
        setup
    }
}

/// Runs the loop until the buffer is full or `max_steps` actions have been
/// taken. The same seed always yields the same trace.
pub fn run_episode(
    config: &AgentConfig,
    model: &GenerativeModel,
    prefs: &PreferenceVector,
    setup: &EpisodeSetup,
    seed: u64,
    max_steps: usize,
) -> Result<Trace, AgentError> {
    if max_steps == 0 {
        return Err(AgentError::NoSteps);
    }
    if setup.latent >= model.orderings() {
        return Err(AgentError::UnknownLatent(setup.latent));
    }
    let mut agent = Agent::new(config.clone(), model.clone(), prefs.clone(), seed)?;
    let mut env = ExternalState::new(Arc::clone(&model.space), setup.latent)
        .with_cue_script(setup.cue_script.clone());
    let mut env_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = Trace {
        initial_entropy: Some(agent.cognition.belief.entropy()),
        seed: Some(seed),
        ..Trace::default()
    };
    for _ in 0..max_steps {
        match agent.step(&mut env, &mut env_rng)? {
            Some(record) => {
                let index = trace.events.len();
                trace.messages.extend(record.messages.into_iter().map(|m| (index, m)));
                trace.events.push(record.event);
            }
            None => break,
        }
    }
    trace.complete = env.is_complete();
    trace.final_target = Some(env.render_target());
    Ok(trace)
}
