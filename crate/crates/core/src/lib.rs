//! Discrete enactive-inference simulator of translation production.
//!
//! An agent with affective, behavioral and cognitive layers reads source
//! chunks and types target chunks into a buffer, choosing each action by
//! precision-weighted expected free energy over a small set of candidate
//! target word orders. The resulting process traces can be segmented into
//! orientation, hesitation, revision and flow states.

pub mod agent;
pub mod batch;
pub mod categorical;
pub mod environment;
pub mod inference;
pub mod model;
pub mod task;
pub mod trace;

pub use categorical::Categorical;
pub use environment::{Action, ExternalState, Observation};
pub use model::{CandidateSpace, ChunkId, ChunkTable};
