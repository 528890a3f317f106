//! Finite probability distributions.
//!
//! [`Categorical`] carries every belief and policy posterior in the crate.
//! Entropies are in bits and treat `0 · log 0` as zero.

use thiserror::Error;

/// Probabilities below this floor are clamped before taking logarithms.
pub const PROB_FLOOR: f64 = 1e-300;

/// Tolerance on the sum of a validated distribution.
pub const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CategoricalError {
    #[error("distribution is empty")]
    Empty,
    #[error("entry {index} is negative or not finite ({value})")]
    InvalidEntry { index: usize, value: f64 },
    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("weights have zero total mass")]
    ZeroMass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Categorical {
    probs: Vec<f64>,
}

impl Categorical {
    /// Wraps probabilities that already sum to one.
    pub fn new(probs: Vec<f64>) -> Result<Self, CategoricalError> {
        check_entries(&probs)?;
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(CategoricalError::NotNormalized(total));
        }
        Ok(Self { probs })
    }

    /// Normalizes non-negative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self, CategoricalError> {
        check_entries(&weights)?;
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(CategoricalError::ZeroMass);
        }
        Ok(Self {
            probs: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution needs at least one option");
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(n: usize, index: usize) -> Self {
        assert!(index < n, "point mass index out of range");
        let mut probs = vec![0.0; n];
        probs[index] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.probs[index]
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.probs)
    }

    /// Index of the most probable option; ties resolve to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    /// Total probability of the options selected by `mask`.
    pub fn mass_where(&self, mut mask: impl FnMut(usize) -> bool) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask(*i))
            .map(|(_, p)| p)
            .sum()
    }

    pub fn is_point_mass(&self) -> bool {
        self.probs.iter().filter(|&&p| p > 0.0).count() == 1
    }
}

fn check_entries(values: &[f64]) -> Result<(), CategoricalError> {
    if values.is_empty() {
        return Err(CategoricalError::Empty);
    }
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(CategoricalError::InvalidEntry { index, value });
        }
    }
    Ok(())
}

/// `-Σ p log2 p` over raw probabilities.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    let h: f64 = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| {
            let p = p.max(PROB_FLOOR);
            -p * p.log2()
        })
        .sum();
    // -0.0 and rounding residue below zero are not meaningful entropies
    h.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_six_is_log2_six() {
        let h = Categorical::uniform(6).entropy();
        assert!((h - 6f64.log2()).abs() < 1e-12);
        assert!((h - 2.584963).abs() < 1e-6);
    }

    #[test]
    fn point_mass_has_zero_entropy() {
        assert_eq!(Categorical::point_mass(4, 2).entropy(), 0.0);
    }

    #[test]
    fn half_half_is_one_bit() {
        let c = Categorical::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!((c.entropy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(Categorical::new(vec![]), Err(CategoricalError::Empty));
        assert!(matches!(
            Categorical::new(vec![0.5, -0.1, 0.6]),
            Err(CategoricalError::InvalidEntry { index: 1, .. })
        ));
        assert!(matches!(
            Categorical::new(vec![0.5, 0.4]),
            Err(CategoricalError::NotNormalized(_))
        ));
        assert_eq!(
            Categorical::from_weights(vec![0.0, 0.0]),
            Err(CategoricalError::ZeroMass)
        );
    }

    #[test]
    fn argmax_breaks_ties_low() {
        let c = Categorical::new(vec![0.25, 0.375, 0.375]).unwrap();
        assert_eq!(c.argmax(), 1);
    }
}
