use serde::{Deserialize, Serialize};

use crate::domain::SubsequenceSet;
use crate::{Error, Result};

/// A subsequence of rounds, decided from the round index (1-based) and the
/// round's context only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SubsequenceDef {
    All,
    /// Rounds `start..=end`.
    Interval { start: usize, end: usize },
    /// Rounds with `t % period == offset`.
    Periodic { period: usize, offset: usize },
    /// Rounds whose context coordinate lies above (or, with `above = false`,
    /// at or below) a threshold.
    FeatureThreshold {
        coord: usize,
        threshold: f64,
        #[serde(default = "default_above")]
        above: bool,
    },
    /// An explicit list of rounds.
    Scripted { rounds: Vec<usize> },
}

fn default_above() -> bool {
    true
}

impl SubsequenceDef {
    pub fn validate(&self, horizon: usize, context_dim: usize) -> Result<()> {
        match self {
            SubsequenceDef::Interval { start, end } if *start == 0 || start > end => Err(
                Error::config(format!("interval [{start}, {end}] must satisfy 1 <= start <= end")),
            ),
            SubsequenceDef::Periodic { period, offset } if *period == 0 || offset >= period => {
                Err(Error::config(format!(
                    "periodic subsequence needs period > offset >= 0, got period {period}, offset {offset}"
                )))
            }
            SubsequenceDef::FeatureThreshold { coord, .. } if *coord >= context_dim => {
                Err(Error::config(format!(
                    "feature threshold reads context coordinate {coord} of {context_dim}"
                )))
            }
            SubsequenceDef::Scripted { rounds } if rounds.iter().any(|&t| t == 0 || t > horizon) => {
                Err(Error::config(format!("scripted rounds must lie in 1..={horizon}")))
            }
            _ => Ok(()),
        }
    }

    /// `h_S(t, x)`.
    pub fn contains(&self, t: usize, context: &[f64]) -> bool {
        match self {
            SubsequenceDef::All => true,
            SubsequenceDef::Interval { start, end } => (*start..=*end).contains(&t),
            SubsequenceDef::Periodic { period, offset } => t % period == *offset,
            SubsequenceDef::FeatureThreshold {
                coord,
                threshold,
                above,
            } => (context[*coord] > *threshold) == *above,
            SubsequenceDef::Scripted { rounds } => rounds.contains(&t),
        }
    }

    /// `|S ∩ [1, T]|` when it follows from the definition; context-dependent
    /// subsequences return `None`.
    pub fn len_within(&self, horizon: usize) -> Option<usize> {
        match self {
            SubsequenceDef::All => Some(horizon),
            SubsequenceDef::Interval { start, end } => {
                Some((*end).min(horizon).saturating_sub(start - 1))
            }
            SubsequenceDef::Periodic { period, offset } => {
                Some((1..=horizon).filter(|t| t % period == *offset).count())
            }
            SubsequenceDef::FeatureThreshold { .. } => None,
            SubsequenceDef::Scripted { rounds } => {
                let mut r: Vec<usize> = rounds.iter().copied().filter(|&t| t <= horizon).collect();
                r.sort_unstable();
                r.dedup();
                Some(r.len())
            }
        }
    }
}

/// `𝒮_t`: indices of the subsequences containing round `t`.
pub fn active_subsequences(defs: &[SubsequenceDef], t: usize, context: &[f64]) -> Result<SubsequenceSet> {
    let active: SubsequenceSet = defs
        .iter()
        .enumerate()
        .filter(|(_, d)| d.contains(t, context))
        .map(|(i, _)| i)
        .collect();
    if active.is_empty() {
        return Err(Error::Protocol(format!(
            "round {t} belongs to no configured subsequence; the subsequences must cover every round"
        )));
    }
    Ok(active)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn all_rounds() {
        for t in 1..50 {
            assert_eq!(
                active_subsequences(&[SubsequenceDef::All], t, &[]).unwrap(),
                SubsequenceSet::singleton(0)
            );
        }
    }

    #[test]
    fn overlapping_intervals() {
        let defs = [
            SubsequenceDef::Interval { start: 1, end: 50 },
            SubsequenceDef::Interval { start: 26, end: 100 },
        ];
        assert_eq!(active_subsequences(&defs, 30, &[]).unwrap(), SubsequenceSet::full(2));
        assert_eq!(active_subsequences(&defs, 10, &[]).unwrap(), SubsequenceSet::singleton(0));
        assert!(matches!(active_subsequences(&defs, 101, &[]), Err(Error::Protocol(_))));
    }

    #[test]
    fn feature_threshold_matches_direct_indicator() {
        let defs = [
            SubsequenceDef::FeatureThreshold { coord: 1, threshold: 0.4, above: true },
            SubsequenceDef::FeatureThreshold { coord: 1, threshold: 0.4, above: false },
            SubsequenceDef::Periodic { period: 3, offset: 0 },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for t in 1..500 {
            let x = [t as f64 / 500.0, rng.random::<f64>()];
            let got = active_subsequences(&defs, t, &x).unwrap();
            assert_eq!(got.contains(0), x[1] > 0.4);
            assert_eq!(got.contains(1), x[1] <= 0.4);
            assert_eq!(got.contains(2), t % 3 == 0);
        }
    }

    #[test]
    fn lengths() {
        assert_eq!(SubsequenceDef::All.len_within(10), Some(10));
        assert_eq!(SubsequenceDef::Interval { start: 3, end: 7 }.len_within(10), Some(5));
        assert_eq!(SubsequenceDef::Interval { start: 3, end: 70 }.len_within(10), Some(8));
        assert_eq!(SubsequenceDef::Interval { start: 30, end: 70 }.len_within(10), Some(0));
        assert_eq!(SubsequenceDef::Periodic { period: 3, offset: 0 }.len_within(10), Some(3));
        assert_eq!(SubsequenceDef::Periodic { period: 2, offset: 1 }.len_within(9), Some(5));
        assert_eq!(
            SubsequenceDef::Scripted { rounds: vec![4, 2, 4, 11] }.len_within(10),
            Some(2)
        );
    }

    #[test]
    fn validation() {
        assert!(SubsequenceDef::Interval { start: 0, end: 3 }.validate(10, 2).is_err());
        assert!(SubsequenceDef::Periodic { period: 2, offset: 2 }.validate(10, 2).is_err());
        assert!(SubsequenceDef::FeatureThreshold { coord: 2, threshold: 0.5, above: true }
            .validate(10, 2)
            .is_err());
        assert!(SubsequenceDef::Scripted { rounds: vec![11] }.validate(10, 2).is_err());
        assert!(SubsequenceDef::Periodic { period: 2, offset: 0 }.validate(10, 2).is_ok());
    }
}
