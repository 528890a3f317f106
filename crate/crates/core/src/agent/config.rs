use crate::inference::EfeWeights;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    HeadStarter,
    LargeContextPlanner,
    Custom,
}

impl Strategy {
    pub fn label(&self) -> &'static str {
        match self {
            Strategy::HeadStarter => "head_starter",
            Strategy::LargeContextPlanner => "large_context_planner",
            Strategy::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "head_starter" | "head-starter" => Some(Strategy::HeadStarter),
            "large_context_planner" | "large-context-planner" | "planner" => {
                Some(Strategy::LargeContextPlanner)
            }
            "custom" => Some(Strategy::Custom),
            _ => None,
        }
    }
}

/// Planning depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Fixed(usize),
    /// As many steps as there are unread source chunks, at least one and
    /// at most `max`.
    UnreadChunks { max: usize },
}

impl Horizon {
    pub fn resolve(&self, unread: usize) -> usize {
        match *self {
            Horizon::Fixed(n) => n.max(1),
            Horizon::UnreadChunks { max } => unread.clamp(1, max.max(1)),
        }
    }
}

/// When typing becomes admissible relative to reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadAhead {
    /// A chunk may be typed as soon as it has been read.
    OnDemand,
    /// Nothing is typed until every source chunk has been read.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Argmax,
    Sample,
}

/// Millisecond durations of motor and gaze actions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorTiming {
    pub fixation_ms: u64,
    pub keystroke_ms: u64,
    pub pause_ms: u64,
    pub delete_ms: u64,
    pub consult_ms: u64,
}

impl Default for MotorTiming {
    fn default() -> Self {
        Self {
            fixation_ms: 200,
            keystroke_ms: 120,
            pause_ms: 800,
            delete_ms: 100,
            consult_ms: 1500,
        }
    }
}

/// How the affective layer turns surprisal into precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffectParams {
    pub gamma_max: f64,
    pub gamma_min: f64,
    /// Decay of gamma per bit of averaged surprisal.
    pub gamma_sensitivity: f64,
    pub zeta_base: f64,
    pub zeta_min: f64,
    pub zeta_max: f64,
    /// Relative growth of zeta per bit of averaged surprisal.
    pub zeta_sensitivity: f64,
    /// EMA update rate; 0 freezes affect.
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub strategy: Strategy,
    pub weights: EfeWeights,
    pub horizon: Horizon,
    pub read_ahead: ReadAhead,
    pub affect: AffectParams,
    /// Pause before committing when the policy posterior entropy (bits)
    /// exceeds this.
    pub theta_entropy: f64,
    /// Pause before committing when gamma drops below this.
    pub theta_gamma: f64,
    pub revision: bool,
    pub selection: Selection,
    pub max_policies: usize,
    pub timing: MotorTiming,
}

impl AgentConfig {
    /// Types early and resolves uncertainty through action: pragmatic
    /// weight dominates, one-step lookahead, high precision on the
    /// sensory-action loop.
    pub fn head_starter() -> Self {
        Self {
            strategy: Strategy::HeadStarter,
            weights: EfeWeights {
                epistemic: 1.0,
                pragmatic: 4.0,
            },
            horizon: Horizon::Fixed(1),
            read_ahead: ReadAhead::OnDemand,
            affect: AffectParams {
                gamma_max: 16.0,
                gamma_min: 0.25,
                gamma_sensitivity: 0.5,
                zeta_base: 1.5,
                zeta_min: 0.25,
                zeta_max: 4.0,
                zeta_sensitivity: 0.25,
                beta: 0.2,
            },
            theta_entropy: 1.0,
            theta_gamma: 2.0,
            revision: true,
            selection: Selection::Argmax,
            max_policies: 512,
            timing: MotorTiming::default(),
        }
    }

    /// Reads broadly before acting: epistemic weight dominates, lookahead
    /// over every unread chunk, precision placed on the model rather than
    /// on incoming evidence.
    pub fn large_context_planner() -> Self {
        Self {
            strategy: Strategy::LargeContextPlanner,
            weights: EfeWeights {
                epistemic: 4.0,
                pragmatic: 1.0,
            },
            horizon: Horizon::UnreadChunks { max: 4 },
            read_ahead: ReadAhead::Full,
            affect: AffectParams {
                gamma_max: 4.0,
                gamma_min: 0.25,
                gamma_sensitivity: 0.5,
                zeta_base: 0.75,
                zeta_min: 0.25,
                zeta_max: 4.0,
                zeta_sensitivity: 0.25,
                beta: 0.2,
            },
            theta_entropy: 1.0,
            theta_gamma: 2.0,
            revision: true,
            selection: Selection::Argmax,
            max_policies: 512,
            timing: MotorTiming::default(),
        }
    }

    pub fn preset(strategy: Strategy) -> Self {
        match strategy {
            Strategy::HeadStarter => Self::head_starter(),
            Strategy::LargeContextPlanner => Self::large_context_planner(),
            Strategy::Custom => Self {
                strategy: Strategy::Custom,
                ..Self::head_starter()
            },
        }
    }
}
