//! Messages exchanged between the affective, behavioral and cognitive
//! layers.
//!
//! The cognitive layer sits between the other two: A↔C and C↔B carry
//! messages both ways, and A additionally broadcasts precision to B.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Affective,
    Behavioral,
    Cognitive,
}

impl Layer {
    pub fn letter(&self) -> char {
        match self {
            Layer::Affective => 'A',
            Layer::Behavioral => 'B',
            Layer::Cognitive => 'C',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Payload {
    Precision { gamma: f64, zeta: f64 },
    PredictionError { surprisal: f64 },
    BeliefSummary { map_ordering: usize, entropy: f64 },
    PolicySummary { posterior_entropy: f64, policies: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Message {
    pub from: Layer,
    pub to: Layer,
    pub payload: Payload,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("no message channel from {from:?} to {to:?}")]
pub struct RoutingError {
    pub from: Layer,
    pub to: Layer,
}

pub fn channel_allowed(from: Layer, to: Layer) -> bool {
    use Layer::*;
    matches!(
        (from, to),
        (Affective, Cognitive)
            | (Cognitive, Affective)
            | (Cognitive, Behavioral)
            | (Behavioral, Cognitive)
            | (Affective, Behavioral)
    )
}

impl Message {
    pub fn new(from: Layer, to: Layer, payload: Payload) -> Result<Self, RoutingError> {
        if !channel_allowed(from, to) {
            return Err(RoutingError { from, to });
        }
        Ok(Self { from, to, payload })
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{} ", self.from.letter(), self.to.letter())?;
        match self.payload {
            Payload::Precision { gamma, zeta } => write!(f, "gamma={gamma:.4} zeta={zeta:.4}"),
            Payload::PredictionError { surprisal } => write!(f, "surprisal={surprisal:.4}"),
            Payload::BeliefSummary {
                map_ordering,
                entropy,
            } => write!(f, "map={map_ordering} entropy={entropy:.4}"),
            Payload::PolicySummary {
                posterior_entropy,
                policies,
            } => write!(f, "policies={policies} posterior_entropy={posterior_entropy:.4}"),
        }
    }
}
