use serde::Serialize;

use crate::domain::{ActionSet, ConstraintFamily, SubsequenceSet};
use crate::{Error, Result};

/// Removes from `set` every action with some strictly positive constraint
/// value at `y`; returns the removed actions.
fn eliminate_violators(
    set: &mut ActionSet,
    y: &[f64],
    constraints: &ConstraintFamily,
) -> Result<ActionSet> {
    let mut removed = ActionSet::empty();
    for a in *set {
        if constraints.violated(a, y)? {
            removed.insert(a);
        }
    }
    *set = set.difference(removed);
    Ok(removed)
}

/// Candidate set for the realized benchmark: an action leaves the set the
/// first time any of its constraints is positive on a realized outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizationLedger {
    candidates: ActionSet,
    #[serde(skip)]
    frozen: bool,
}

impl RealizationLedger {
    pub fn new(num_actions: usize) -> Self {
        Self {
            candidates: ActionSet::full(num_actions),
            frozen: false,
        }
    }

    /// Fault injection for mutation checks: the ledger never eliminates.
    #[doc(hidden)]
    pub fn without_elimination(mut self) -> Self {
        self.frozen = true;
        self
    }

    pub fn candidates(&self) -> ActionSet {
        self.candidates
    }

    /// One elimination step on outcome `y`. Returns the eliminated actions.
    pub fn step(&mut self, y: &[f64], constraints: &ConstraintFamily) -> Result<ActionSet> {
        if self.frozen {
            return Ok(ActionSet::empty());
        }
        eliminate_violators(&mut self.candidates, y, constraints)
    }
}

/// One realized-benchmark candidate set per subsequence; the agent plays
/// within the union of the active sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsequenceRealizationLedger {
    sets: Vec<ActionSet>,
}

impl SubsequenceRealizationLedger {
    pub fn new(num_actions: usize, num_subsequences: usize) -> Self {
        Self {
            sets: vec![ActionSet::full(num_actions); num_subsequences],
        }
    }

    pub fn sets(&self) -> &[ActionSet] {
        &self.sets
    }

    /// `U_t`: union of the candidate sets of the active subsequences.
    pub fn union(&self, active: SubsequenceSet) -> Result<ActionSet> {
        union_of(&self.sets, active)
    }

    /// Applies the realized elimination rule to every active subsequence's
    /// set. Returns `(subsequence, eliminated)` for each active subsequence.
    pub fn step(
        &mut self,
        y: &[f64],
        constraints: &ConstraintFamily,
        active: SubsequenceSet,
    ) -> Result<Vec<(usize, ActionSet)>> {
        check_active(active, self.sets.len())?;
        active
            .iter()
            .map(|s| Ok((s, eliminate_violators(&mut self.sets[s], y, constraints)?)))
            .collect()
    }
}

pub(super) fn check_active(active: SubsequenceSet, count: usize) -> Result<()> {
    if active.is_empty() {
        return Err(Error::Protocol(
            "no active subsequence in this round; the subsequences must cover every round".into(),
        ));
    }
    if !active.is_subset(SubsequenceSet::full(count)) {
        return Err(Error::Protocol(format!(
            "active set {active} references subsequences beyond the {count} configured"
        )));
    }
    Ok(())
}

pub(super) fn union_of(sets: &[ActionSet], active: SubsequenceSet) -> Result<ActionSet> {
    check_active(active, sets.len())?;
    Ok(active
        .iter()
        .fold(ActionSet::empty(), |acc, s| acc.union(sets[s])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Constraint;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn two_action_family() -> ConstraintFamily {
        // c_1(a0, y) = -1, c_1(a1, y) = y_1 - 0.5
        ConstraintFamily::new(
            vec![Constraint::Linear {
                weights: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
                offsets: vec![-1.0, -0.5],
            }],
            2,
            2,
        )
        .unwrap()
    }

    #[test]
    fn eliminates_violating_action() {
        let mut ledger = RealizationLedger::new(2);
        let removed = ledger.step(&[0.8, 0.2], &two_action_family()).unwrap();
        assert_eq!(removed, ActionSet::singleton(1));
        assert_eq!(ledger.candidates(), ActionSet::singleton(0));
    }

    #[test]
    fn no_violation_no_elimination() {
        let mut ledger = RealizationLedger::new(2);
        let removed = ledger.step(&[0.3, 0.9], &two_action_family()).unwrap();
        assert!(removed.is_empty());
        assert_eq!(ledger.candidates(), ActionSet::full(2));
        // Zero is not a violation.
        let removed = ledger.step(&[0.5, 0.0], &two_action_family()).unwrap();
        assert!(removed.is_empty());
    }

    #[test]
    fn crafted_three_action_round() {
        // Two constraints, three actions, y = (0.6, 0.3).
        //   c_1 = threshold on y_0 at (0.5, 0.7, 0.9) -> (+1, -1, -1)
        //   c_2 = y_1 + (-0.2, 0.0, -0.5)           -> (0.1, 0.3, -0.2)
        // Hand simulation: a0 violates both, a1 violates c_2, a2 violates none.
        let fam = ConstraintFamily::new(
            vec![
                Constraint::Threshold {
                    coord: 0,
                    thresholds: vec![0.5, 0.7, 0.9],
                    above: 1.0,
                    below: -1.0,
                },
                Constraint::Linear {
                    weights: vec![vec![0.0, 1.0]; 3],
                    offsets: vec![-0.2, 0.0, -0.5],
                },
            ],
            3,
            2,
        )
        .unwrap();
        let mut ledger = RealizationLedger::new(3);
        let removed = ledger.step(&[0.6, 0.3], &fam).unwrap();
        assert_eq!(removed, [0, 1].into_iter().collect());
        assert_eq!(ledger.candidates(), ActionSet::singleton(2));
    }

    #[test]
    fn union_examples() {
        let mut ledger = SubsequenceRealizationLedger::new(2, 2);
        ledger.sets[0] = ActionSet::singleton(0);
        ledger.sets[1] = ActionSet::singleton(1);
        assert_eq!(ledger.union(SubsequenceSet::full(2)).unwrap(), ActionSet::full(2));
        ledger.sets[1] = ActionSet::singleton(0);
        assert_eq!(ledger.union(SubsequenceSet::full(2)).unwrap(), ActionSet::singleton(0));
        assert!(matches!(
            ledger.union(SubsequenceSet::empty()),
            Err(Error::Protocol(_))
        ));
    }

    proptest! {
        #[test]
        fn union_matches_set_oracle(bits in proptest::collection::vec(0u64..256, 4), active in 1u64..16) {
            let ledger = SubsequenceRealizationLedger {
                sets: bits.iter().map(|&b| ActionSet::from_bits(b)).collect(),
            };
            let active = SubsequenceSet::from_bits(active);
            let mut oracle = BTreeSet::new();
            for s in 0..4 {
                if active.contains(s) {
                    for a in 0..8 {
                        if bits[s] >> a & 1 == 1 {
                            oracle.insert(a);
                        }
                    }
                }
            }
            let got: BTreeSet<usize> = ledger.union(active).unwrap().iter().collect();
            prop_assert_eq!(got, oracle);
        }
    }

    #[test]
    fn single_active_subsequence_reduces_to_plain_ledger() {
        let fam = two_action_family();
        let mut plain = RealizationLedger::new(2);
        let mut sub = SubsequenceRealizationLedger::new(2, 1);
        for y in [[0.3, 0.1], [0.8, 0.2], [0.1, 0.1]] {
            let a = plain.step(&y, &fam).unwrap();
            let b = sub.step(&y, &fam, SubsequenceSet::singleton(0)).unwrap();
            assert_eq!(b, vec![(0, a)]);
            assert_eq!(sub.sets()[0], plain.candidates());
        }
    }

    #[test]
    fn violation_hits_every_active_subsequence() {
        let fam = two_action_family();
        let mut sub = SubsequenceRealizationLedger::new(2, 3);
        let active: SubsequenceSet = [0, 2].into_iter().collect();
        sub.step(&[0.9, 0.0], &fam, active).unwrap();
        assert_eq!(sub.sets()[0], ActionSet::singleton(0));
        assert_eq!(sub.sets()[1], ActionSet::full(2));
        assert_eq!(sub.sets()[2], ActionSet::singleton(0));
    }

    #[test]
    fn matches_independent_replays_per_subsequence() {
        // Three subsequences over 12 rounds; each must equal a plain ledger fed
        // only that subsequence's rounds.
        let fam = ConstraintFamily::new(
            vec![Constraint::Threshold {
                coord: 0,
                thresholds: vec![0.95, 0.6, 0.3, 0.8],
                above: 1.0,
                below: -1.0,
            }],
            4,
            1,
        )
        .unwrap();
        let ys = [0.1, 0.4, 0.2, 0.7, 0.1, 0.5, 0.9, 0.2, 0.35, 0.1, 0.65, 0.2];
        let member = |s: usize, t: usize| match s {
            0 => t < 6,
            1 => t.is_multiple_of(3),
            _ => t >= 4,
        };
        let mut sub = SubsequenceRealizationLedger::new(4, 3);
        for (t, &y) in ys.iter().enumerate() {
            let active: SubsequenceSet = (0..3).filter(|&s| member(s, t)).collect();
            sub.step(&[y], &fam, active).unwrap();
        }
        for s in 0..3 {
            let mut plain = RealizationLedger::new(4);
            for (t, &y) in ys.iter().enumerate() {
                if member(s, t) {
                    plain.step(&[y], &fam).unwrap();
                }
            }
            assert_eq!(sub.sets()[s], plain.candidates(), "subsequence {s}");
        }
    }

    proptest! {
        /// The post-hoc realized benchmark is never eliminated, and sets only shrink.
        #[test]
        fn benchmark_is_preserved(
            thresholds in proptest::collection::vec(0.0f64..1.0, 5),
            ys in proptest::collection::vec(0.0f64..1.0, 1..60),
        ) {
            let fam = ConstraintFamily::new(
                vec![Constraint::Threshold { coord: 0, thresholds: thresholds.clone(), above: 0.5, below: -0.5 }],
                5,
                1,
            ).unwrap();
            let benchmark: ActionSet = (0..5)
                .filter(|&a| ys.iter().all(|&y| y <= thresholds[a]))
                .collect();
            let mut ledger = RealizationLedger::new(5);
            let mut previous = ledger.candidates();
            for &y in &ys {
                prop_assert!(benchmark.is_subset(ledger.candidates()));
                ledger.step(&[y], &fam).unwrap();
                prop_assert!(ledger.candidates().is_subset(previous));
                previous = ledger.candidates();
            }
            prop_assert_eq!(ledger.candidates(), benchmark);
        }
    }
}
