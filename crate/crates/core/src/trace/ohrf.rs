use std::collections::BTreeSet;
use std::fmt;

use crate::environment::Action;

use super::event::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OhrfState {
    O,
    H,
    R,
    F,
}

impl OhrfState {
    pub const ALL: [OhrfState; 4] = [OhrfState::O, OhrfState::H, OhrfState::R, OhrfState::F];

    pub fn letter(&self) -> char {
        match self {
            OhrfState::O => 'O',
            OhrfState::H => 'H',
            OhrfState::R => 'R',
            OhrfState::F => 'F',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'O' => Some(OhrfState::O),
            'H' => Some(OhrfState::H),
            'R' => Some(OhrfState::R),
            'F' => Some(OhrfState::F),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OhrfState::O => "orientation",
            OhrfState::H => "hesitation",
            OhrfState::R => "revision",
            OhrfState::F => "flow",
        }
    }
}

impl fmt::Display for OhrfState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// A gap between keystrokes longer than this (ms) counts as hesitation.
    pub theta_pause_ms: u64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            theta_pause_ms: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub state: OhrfState,
    pub t_start: u64,
    pub t_end: u64,
    /// Indices into the trace's events, contiguous and ascending.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyCycle {
    pub label: String,
    /// Indices into the segment list.
    pub segments: Vec<usize>,
    /// The segment list did not open with orientation, so this cycle got a
    /// zero-length one in front.
    pub implicit_orientation: bool,
}

/// Labels every event, then merges runs of equal labels into segments.
pub fn segment_ohrf(trace: &Trace, thresholds: &Thresholds) -> Vec<Segment> {
    let labels = label_events(trace, thresholds);
    let mut segments: Vec<Segment> = Vec::new();
    for (i, (event, state)) in trace.events.iter().zip(labels).enumerate() {
        match segments.last_mut() {
            Some(seg) if seg.state == state => {
                seg.t_end = event.t_end;
                seg.members.push(i);
            }
            _ => segments.push(Segment {
                state,
                t_start: event.t_start,
                t_end: event.t_end,
                members: vec![i],
            }),
        }
    }
    segments
}

fn label_events(trace: &Trace, thresholds: &Thresholds) -> Vec<OhrfState> {
    let events = &trace.events;
    let mut filled = BTreeSet::new();
    let mut labels: Vec<Option<OhrfState>> = events
        .iter()
        .map(|e| match e.action {
            Action::FixateSource(_) | Action::Consult(_) => Some(OhrfState::O),
            Action::Delete(_) => Some(OhrfState::R),
            Action::Pause(_) => Some(OhrfState::H),
            Action::TypeChunk { slot, .. } => {
                if filled.insert(slot) {
                    Some(OhrfState::F)
                } else {
                    Some(OhrfState::R)
                }
            }
            Action::FixateTarget(_) => None,
        })
        .collect();

    // Target fixations belong to an adjacent revision; otherwise they are
    // hesitation inside a long gap between keystrokes and flow elsewhere.
    let typing: Vec<usize> = (0..events.len())
        .filter(|&i| events[i].action.is_typing())
        .collect();
    for i in 0..events.len() {
        if labels[i].is_some() {
            continue;
        }
        let mut j = i;
        while j > 0 && matches!(events[j - 1].action, Action::FixateTarget(_)) {
            j -= 1;
        }
        let mut k = i;
        while k + 1 < events.len() && matches!(events[k + 1].action, Action::FixateTarget(_)) {
            k += 1;
        }
        let touches_revision = (j > 0 && labels[j - 1] == Some(OhrfState::R))
            || (k + 1 < events.len() && labels[k + 1] == Some(OhrfState::R));
        if touches_revision {
            labels[i] = Some(OhrfState::R);
            continue;
        }
        let before = typing.iter().rev().find(|&&t| t < i).map(|&t| events[t].t_end);
        let after = typing.iter().find(|&&t| t > i).map(|&t| events[t].t_start);
        let gap = match (before, after) {
            (Some(b), Some(a)) => a.saturating_sub(b),
            (None, Some(a)) => a.saturating_sub(events[i].t_start),
            (Some(b), None) => events[k].t_end.saturating_sub(b),
            (None, None) => 0,
        };
        labels[i] = Some(if gap > thresholds.theta_pause_ms {
            OhrfState::H
        } else {
            OhrfState::F
        });
    }
    labels.into_iter().map(|l| l.expect("every event labeled")).collect()
}

/// Cuts the segment sequence before every orientation segment.
pub fn group_policies(segments: &[Segment]) -> Vec<PolicyCycle> {
    let mut cycles: Vec<PolicyCycle> = Vec::new();
    for (i, seg) in segments.iter().enumerate() {
        match cycles.last_mut() {
            Some(cycle) if seg.state != OhrfState::O => cycle.segments.push(i),
            _ => cycles.push(PolicyCycle {
                label: String::new(),
                segments: vec![i],
                implicit_orientation: seg.state != OhrfState::O,
            }),
        }
    }
    for cycle in &mut cycles {
        let mut states: Vec<OhrfState> = Vec::new();
        if cycle.implicit_orientation {
            states.push(OhrfState::O);
        }
        states.extend(cycle.segments.iter().map(|&i| segments[i].state));
        states.dedup();
        cycle.label = states.iter().map(OhrfState::letter).collect();
    }
    cycles
}

/// Builds one single-event segment per state letter; useful for feeding
/// hand-written state sequences to [`group_policies`].
pub fn segments_from_states(states: &str) -> Option<Vec<Segment>> {
    states
        .chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .enumerate()
        .map(|(i, c)| {
            OhrfState::from_letter(c).map(|state| Segment {
                state,
                t_start: i as u64,
                t_end: i as u64 + 1,
                members: vec![i],
            })
        })
        .collect()
}

/// Index of the cycle containing each event.
pub fn cycle_of_events(segments: &[Segment], cycles: &[PolicyCycle], events: usize) -> Vec<usize> {
    let mut out = vec![0; events];
    for (ci, cycle) in cycles.iter().enumerate() {
        for &si in &cycle.segments {
            for &e in &segments[si].members {
                out[e] = ci;
            }
        }
    }
    out
}
