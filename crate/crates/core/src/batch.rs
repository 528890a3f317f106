//! Seeded episode batches, strategy comparisons and precision sweeps.

use rayon::prelude::*;

use crate::agent::{run_episode, AgentConfig, AgentError, EpisodeSetup};
use crate::inference::{GenerativeModel, PreferenceVector};
use crate::trace::{group_policies, segment_ohrf, summarize, Summary, Thresholds, Trace};

/// One simulated episode with its analysis.
#[derive(Debug, Clone)]
pub struct Episode {
    pub seed: u64,
    pub trace: Trace,
    pub summary: Summary,
}

pub fn analyze(seed: u64, trace: Trace, thresholds: &Thresholds) -> Episode {
    let segments = segment_ohrf(&trace, thresholds);
    let cycles = group_policies(&segments);
    let summary = summarize(&trace, &segments, &cycles);
    Episode {
        seed,
        trace,
        summary,
    }
}

/// Runs one episode per seed in parallel. Results come back in seed order
/// and do not depend on scheduling.
#[allow(clippy::too_many_arguments)]
pub fn run_batch(
    config: &AgentConfig,
    model: &GenerativeModel,
    prefs: &PreferenceVector,
    setup: &(dyn Fn(u64) -> EpisodeSetup + Sync),
    seeds: &[u64],
    max_steps: usize,
    thresholds: &Thresholds,
) -> Result<Vec<Episode>, AgentError> {
    seeds
        .par_iter()
        .map(|&seed| {
            let trace = run_episode(config, model, prefs, &setup(seed), seed, max_steps)?;
            Ok(analyze(seed, trace, thresholds))
        })
        .collect()
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>().sqrt();
    let sy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum::<f64>().sqrt();
    cov / (sx * sy)
}

/// Spearman rank correlation (Pearson correlation of average ranks).
/// NaN when either side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "paired samples");
    pearson(&ranks(xs), &ranks(ys))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchTest {
    pub t: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub df: f64,
    /// Two-sided p-value from the normal approximation to Student's t.
    pub p_value: f64,
}

/// Welch's unequal-variance t-test on the difference of means.
///
/// The p-value uses the standard normal tail, which is within a few
/// thousandths of the t tail once df exceeds 100 and slightly
/// anti-conservative below that.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> WelchTest {
    let (va, vb) = (variance(a), variance(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let se2 = va / na + vb / nb;
    let diff = mean(a) - mean(b);
    if se2 == 0.0 {
        let p = if diff == 0.0 { 1.0 } else { 0.0 };
        return WelchTest {
            t: if diff == 0.0 { 0.0 } else { diff.signum() * f64::INFINITY },
            df: na + nb - 2.0,
            p_value: p,
        };
    }
    let t = diff / se2.sqrt();
    let df = se2.powi(2) / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    WelchTest {
        t,
        df,
        p_value: libm::erfc(t.abs() / std::f64::consts::SQRT_2),
    }
}

/// Per-seed comparison of two configurations on identical setups.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub left: Vec<Episode>,
    pub right: Vec<Episode>,
}

/// Mean of a metric on each side and the share of pairs where the left
/// value is strictly larger (ties count half).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRow {
    pub left_mean: f64,
    pub right_mean: f64,
    pub left_win_rate: f64,
}

impl Comparison {
    pub fn metric(&self, f: impl Fn(&Summary) -> f64) -> MetricRow {
        let l: Vec<f64> = self.left.iter().map(|e| f(&e.summary)).collect();
        let r: Vec<f64> = self.right.iter().map(|e| f(&e.summary)).collect();
        let wins: f64 = l
            .iter()
            .zip(&r)
            .map(|(a, b)| match a.partial_cmp(b) {
                Some(std::cmp::Ordering::Greater) => 1.0,
                Some(std::cmp::Ordering::Equal) => 0.5,
                _ => 0.0,
            })
            .sum();
        MetricRow {
            left_mean: mean(&l),
            right_mean: mean(&r),
            left_win_rate: wins / l.len().max(1) as f64,
        }
    }

    /// Pairs in which the left value is strictly smaller.
    pub fn count_left_below(&self, f: impl Fn(&Summary) -> f64) -> usize {
        self.left
            .iter()
            .zip(&self.right)
            .filter(|(a, b)| f(&a.summary) < f(&b.summary))
            .count()
    }
}

#[allow(clippy::too_many_arguments)]
pub fn compare(
    left: &AgentConfig,
    right: &AgentConfig,
    model: &GenerativeModel,
    prefs: &PreferenceVector,
    setup: &(dyn Fn(u64) -> EpisodeSetup + Sync),
    seeds: &[u64],
    max_steps: usize,
    thresholds: &Thresholds,
) -> Result<Comparison, AgentError> {
    Ok(Comparison {
        left: run_batch(left, model, prefs, setup, seeds, max_steps, thresholds)?,
        right: run_batch(right, model, prefs, setup, seeds, max_steps, thresholds)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub gamma_max: f64,
    pub mean_epistemic: f64,
    pub epistemic: Vec<f64>,
}

/// Mean read-plus-pause count per episode at each maximum policy
/// precision, all other settings fixed.
#[allow(clippy::too_many_arguments)]
pub fn gamma_sweep(
    base: &AgentConfig,
    gammas: &[f64],
    model: &GenerativeModel,
    prefs: &PreferenceVector,
    setup: &(dyn Fn(u64) -> EpisodeSetup + Sync),
    seeds: &[u64],
    max_steps: usize,
    thresholds: &Thresholds,
) -> Result<Vec<SweepPoint>, AgentError> {
    gammas
        .iter()
        .map(|&g| {
            let mut cfg = base.clone();
            cfg.affect.gamma_max = g;
            cfg.affect.gamma_min = cfg.affect.gamma_min.min(g);
            let episodes = run_batch(&cfg, model, prefs, setup, seeds, max_steps, thresholds)?;
            let epistemic: Vec<f64> = episodes
                .iter()
                .map(|e| e.summary.epistemic_actions() as f64)
                .collect();
            Ok(SweepPoint {
                gamma_max: g,
                mean_epistemic: mean(&epistemic),
                epistemic,
            })
        })
        .collect()
}

/// Spearman correlation between sweep precision and mean epistemic count.
pub fn sweep_spearman(points: &[SweepPoint]) -> f64 {
    let g: Vec<f64> = points.iter().map(|p| p.gamma_max).collect();
    let m: Vec<f64> = points.iter().map(|p| p.mean_epistemic).collect();
    spearman(&g, &m)
}
