use crate::agent::message::Message;
use crate::environment::Action;

/// One timestamped action in a process trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessEvent {
    pub t_start: u64,
    pub t_end: u64,
    pub action: Action,
    /// Belief entropy in bits after the action's observation was absorbed.
    pub belief_entropy: Option<f64>,
    pub gamma: Option<f64>,
    pub zeta: Option<f64>,
    pub annotations: Vec<String>,
}

impl ProcessEvent {
    pub fn bare(t_start: u64, t_end: u64, action: Action) -> Self {
        Self {
            t_start,
            t_end,
            action,
            belief_entropy: None,
            gamma: None,
            zeta: None,
            annotations: Vec::new(),
        }
    }

    pub fn duration(&self) -> u64 {
        self.t_end - self.t_start
    }

    pub fn has_annotation(&self, label: &str) -> bool {
        self.annotations.iter().any(|a| a == label)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub events: Vec<ProcessEvent>,
    /// False when the episode ran out of steps before the buffer filled.
    pub complete: bool,
    /// Belief entropy before the first event; absent for ingested logs.
    pub initial_entropy: Option<f64>,
    pub final_target: Option<String>,
    pub seed: Option<u64>,
    /// Inter-layer messages tagged with the index of the event they
    /// accompanied.
    pub messages: Vec<(usize, Message)>,
}

impl Trace {
    pub fn from_events(events: Vec<ProcessEvent>) -> Self {
        Self {
            events,
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// True when every event carries a belief entropy.
    pub fn has_beliefs(&self) -> bool {
        self.initial_entropy.is_some() && self.events.iter().all(|e| e.belief_entropy.is_some())
    }

    pub fn count_where(&self, pred: impl Fn(&Action) -> bool) -> usize {
        self.events.iter().filter(|e| pred(&e.action)).count()
    }
}
