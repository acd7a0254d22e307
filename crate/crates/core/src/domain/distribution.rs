use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CompensatedSum, Outcome};
use crate::{Error, Result};

/// A finite-support distribution over `[0,1]^d`.
///
/// Used both for the adversary's outcome distributions and for the
/// forecaster's prediction distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    support: Vec<Outcome>,
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    /// Probabilities must be non-negative and sum to one within `1e-9`.
    pub fn new(support: Vec<Outcome>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(Error::config(format!(
                "distribution needs a non-empty support with one probability per point ({} points, {} probabilities)",
                support.len(),
                probs.len()
            )));
        }
        let dim = support[0].dim();
        if let Some(y) = support.iter().find(|y| y.dim() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                actual: y.dim(),
            });
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::config("probabilities must be finite and non-negative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { support, probs })
    }

    pub fn point_mass(y: Outcome) -> Self {
        Self {
            support: vec![y],
            probs: vec![1.0],
        }
    }

    pub fn dim(&self) -> usize {
        self.support[0].dim()
    }

    pub fn support(&self) -> &[Outcome] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Outcome, f64)> {
        self.support.iter().zip(self.probs.iter().copied())
    }

    /// Whether `y` is a support point carrying positive mass.
    pub fn contains(&self, y: &Outcome) -> bool {
        self.iter().any(|(s, p)| p > 0.0 && s == y)
    }

    /// Index of a support point drawn with one uniform variate.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                last_positive = i;
                acc += p;
                if u < acc {
                    return i;
                }
            }
        }
        // Rounding left `acc` slightly below one.
        last_positive
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &Outcome {
        &self.support[self.sample_index(rng)]
    }

    /// `E[f(y)]` by compensated summation over the support.
    pub fn expect<F: FnMut(&Outcome) -> f64>(&self, mut f: F) -> f64 {
        self.iter()
            .map(|(y, p)| if p > 0.0 { p * f(y) } else { 0.0 })
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn mean(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.expect(|y| y.coords()[i]))
            .collect()
    }
}
