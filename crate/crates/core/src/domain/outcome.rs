use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A point of the outcome space `[0,1]^d`.
///
/// Predictions live in the same space, so [`Prediction`] is an alias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Outcome(Vec<f64>);

pub type Prediction = Outcome;

impl Outcome {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::config("outcomes need at least one coordinate"));
        }
        for (index, &value) in coords.iter().enumerate() {
            // NaN fails both comparisons.
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OutcomeRange { index, value });
            }
        }
        Ok(Outcome(coords))
    }

    pub fn with_dim(coords: Vec<f64>, dim: usize) -> Result<Self> {
        if coords.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                actual: coords.len(),
            });
        }
        Self::new(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// ℓ∞ distance.
    pub fn sup_distance(&self, other: &Outcome) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<f64>> for Outcome {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Outcome::new(v)
    }
}

impl From<Outcome> for Vec<f64> {
    fn from(o: Outcome) -> Self {
        o.0
    }
}

impl AsRef<[f64]> for Outcome {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_out_of_range_and_nan() {
        assert!(matches!(
            Outcome::new(vec![0.5, 1.2]),
            Err(Error::OutcomeRange { index: 1, .. })
        ));
        assert!(Outcome::new(vec![f64::NAN]).is_err());
        assert!(Outcome::new(vec![]).is_err());
        assert!(matches!(
            Outcome::with_dim(vec![0.5], 2),
            Err(Error::Dimension { expected: 2, actual: 1 })
        ));
    }

    proptest! {
        #[test]
        fn accepted_outcomes_are_in_the_cube(v in proptest::collection::vec(-0.5f64..1.5, 1..6)) {
            match Outcome::new(v.clone()) {
                Ok(o) => prop_assert!(o.coords().iter().all(|x| (0.0..=1.0).contains(x))),
                Err(_) => prop_assert!(v.iter().any(|x| !(0.0..=1.0).contains(x))),
            }
        }
    }
}
