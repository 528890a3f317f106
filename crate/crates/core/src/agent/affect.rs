//! Affective layer: precision as a function of recent surprise.

use super::config::AffectParams;
use crate::inference::Precision;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mood {
    Confident,
    Neutral,
    Anxious,
}

impl Mood {
    pub fn label(&self) -> &'static str {
        match self {
            Mood::Confident => "confident",
            Mood::Neutral => "neutral",
            Mood::Anxious => "anxious",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffectiveState {
    pub gamma: f64,
    pub zeta: f64,
    /// Exponential average of observation surprisal, in bits.
    pub surprise_ema: f64,
    pub mood: Mood,
}

impl AffectiveState {
    pub fn initial(params: &AffectParams) -> Self {
        Self::from_ema(0.0, params)
    }

    fn from_ema(surprise_ema: f64, params: &AffectParams) -> Self {
        let p = Precision::clamped(
            params.gamma_max * (-params.gamma_sensitivity * surprise_ema).exp(),
            params.zeta_base * (1.0 + params.zeta_sensitivity * surprise_ema),
            (params.gamma_min, params.gamma_max),
            (params.zeta_min, params.zeta_max),
        );
        Self {
            gamma: p.gamma,
            zeta: p.zeta,
            surprise_ema,
            mood: mood_for(p.gamma, params.gamma_max),
        }
    }

    pub fn precision(&self) -> Precision {
        Precision {
            gamma: self.gamma,
            zeta: self.zeta,
        }
    }
}

fn mood_for(gamma: f64, gamma_max: f64) -> Mood {
    let ratio = gamma / gamma_max;
    if ratio >= 0.75 {
        Mood::Confident
    } else if ratio >= 0.4 {
        Mood::Neutral
    } else {
        Mood::Anxious
    }
}

/// Folds one observation's surprisal into the average and re-derives
/// precisions: surprise lowers gamma and raises zeta.
pub fn update_affect(
    state: &AffectiveState,
    surprisal: f64,
    beta: f64,
    params: &AffectParams,
) -> AffectiveState {
    debug_assert!(surprisal >= 0.0);
    let ema = (1.0 - beta) * state.surprise_ema + beta * surprisal.max(0.0);
    AffectiveState::from_ema(ema, params)
}
