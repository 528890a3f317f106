use std::collections::BTreeMap;

use crate::environment::Action;

use super::event::Trace;
use super::ohrf::{OhrfState, PolicyCycle, Segment};
use super::TraceError;

/// Belief entropy at the start of the trace and after every event, keyed
/// by the time it became current.
pub fn entropy_trajectory(trace: &Trace) -> Result<Vec<(u64, f64)>, TraceError> {
    let initial = trace
        .initial_entropy
        .ok_or(TraceError::UnsupportedField("belief_entropy"))?;
    let t0 = trace.events.first().map_or(0, |e| e.t_start);
    let mut out = Vec::with_capacity(trace.events.len() + 1);
    out.push((t0, initial));
    for e in &trace.events {
        let h = e
            .belief_entropy
            .ok_or(TraceError::UnsupportedField("belief_entropy"))?;
        out.push((e.t_end, h));
    }
    Ok(out)
}

/// Entropy change caused by each event, aligned with the events.
pub fn entropy_drops(trace: &Trace) -> Result<Vec<f64>, TraceError> {
    let series = entropy_trajectory(trace)?;
    Ok(series.windows(2).map(|w| w[0].1 - w[1].1).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OhrfCounts {
    pub o: usize,
    pub h: usize,
    pub r: usize,
    pub f: usize,
}

impl OhrfCounts {
    pub fn get(&self, state: OhrfState) -> usize {
        match state {
            OhrfState::O => self.o,
            OhrfState::H => self.h,
            OhrfState::R => self.r,
            OhrfState::F => self.f,
        }
    }

    fn bump(&mut self, state: OhrfState) {
        match state {
            OhrfState::O => self.o += 1,
            OhrfState::H => self.h += 1,
            OhrfState::R => self.r += 1,
            OhrfState::F => self.f += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    /// Onset of the first keystroke; the whole trace duration if nothing
    /// was typed.
    pub first_keystroke_latency_ms: u64,
    pub initial_orientation_ms: u64,
    /// Number of segments in each state.
    pub segment_counts: OhrfCounts,
    pub cycle_labels: BTreeMap<String, usize>,
    pub total_time_ms: u64,
    pub revision_count: usize,
    pub read_count: usize,
    pub pause_count: usize,
    pub final_target: String,
}

impl Summary {
    /// Source reads plus pauses.
    pub fn epistemic_actions(&self) -> usize {
        self.read_count + self.pause_count
    }

    pub fn hesitation_count(&self) -> usize {
        self.segment_counts.h
    }
}

pub fn summarize(trace: &Trace, segments: &[Segment], cycles: &[PolicyCycle]) -> Summary {
    let Some(first) = trace.events.first() else {
        return Summary::default();
    };
    let t0 = first.t_start;
    let t_last = trace.events.iter().map(|e| e.t_end).max().unwrap_or(t0);
    let first_key = trace
        .events
        .iter()
        .find(|e| e.action.is_typing())
        .map_or(t_last, |e| e.t_start);
    let initial_orientation_ms = segments
        .first()
        .filter(|s| s.state == OhrfState::O)
        .map_or(0, |s| s.t_end - s.t_start);
    let mut segment_counts = OhrfCounts::default();
    for s in segments {
        segment_counts.bump(s.state);
    }
    let mut cycle_labels = BTreeMap::new();
    for c in cycles {
        *cycle_labels.entry(c.label.clone()).or_insert(0) += 1;
    }
    Summary {
        first_keystroke_latency_ms: first_key - t0,
        initial_orientation_ms,
        segment_counts,
        cycle_labels,
        total_time_ms: t_last - t0,
        revision_count: trace.count_where(|a| matches!(a, Action::Delete(_))),
        read_count: trace.count_where(|a| matches!(a, Action::FixateSource(_))),
        pause_count: trace.count_where(|a| matches!(a, Action::Pause(_))),
        final_target: trace.final_target.clone().unwrap_or_default(),
    }
}
