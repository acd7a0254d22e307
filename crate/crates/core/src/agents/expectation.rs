use serde::Serialize;

use super::realization::{check_active, union_of};
use crate::domain::{ActionSet, CompensatedSum, ConstraintFamily, SubsequenceSet};
use crate::{Error, Result};

/// Candidate set for the expectation benchmark. Tracks the cumulative
/// realized violation `v[a][j]` of every played action and eliminates the
/// played action once some accumulator strictly exceeds `tau`.
#[derive(Debug, Clone, Serialize)]
pub struct ExpectationLedger {
    candidates: ActionSet,
    tau: f64,
    num_constraints: usize,
    #[serde(serialize_with = "serialize_sums")]
    violations: Vec<CompensatedSum>,
}

impl ExpectationLedger {
    pub fn new(num_actions: usize, num_constraints: usize, tau: f64) -> Self {
        Self {
            candidates: ActionSet::full(num_actions),
            tau,
            num_constraints,
            violations: vec![CompensatedSum::new(); num_actions * num_constraints],
        }
    }

    pub fn candidates(&self) -> ActionSet {
        self.candidates
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `v[a][j]`.
    pub fn violation(&self, a: usize, j: usize) -> f64 {
        self.violations[a * self.num_constraints + j].value()
    }

    /// Adds `c_j(a_t, y)` to `v[a_t][j]` for every `j`; returns whether `a_t`
    /// was eliminated.
    pub fn step(&mut self, a_t: usize, y: &[f64], constraints: &ConstraintFamily) -> Result<bool> {
        if !self.candidates.contains(a_t) {
            return Err(Error::Invariant(format!(
                "played action {a_t} is not a candidate {}",
                self.candidates
            )));
        }
        let mut exceeded = false;
        for j in 0..self.num_constraints {
            let slot = &mut self.violations[a_t * self.num_constraints + j];
            slot.add(constraints.eval(j, a_t, y)?);
            exceeded |= slot.value() > self.tau;
        }
        if exceeded {
            self.candidates.remove(a_t);
        }
        Ok(exceeded)
    }
}

/// Per-subsequence candidate sets for the expectation benchmark with
/// attributed violations `w[a][j][S'][S]`: the violation of `a` on the rounds
/// of `S` for which `S'` was responsible.
#[derive(Debug, Clone, Serialize)]
pub struct SubsequenceExpectationLedger {
    sets: Vec<ActionSet>,
    taus: Vec<f64>,
    num_constraints: usize,
    #[serde(serialize_with = "serialize_sums")]
    attributed: Vec<CompensatedSum>,
}

impl SubsequenceExpectationLedger {
    /// `taus[i]` is the threshold of subsequence `i`.
    pub fn new(num_actions: usize, num_constraints: usize, taus: Vec<f64>) -> Self {
        let count = taus.len();
        Self {
            sets: vec![ActionSet::full(num_actions); count],
            taus,
            num_constraints,
            attributed: vec![
                CompensatedSum::new();
                num_actions * num_constraints * count * count
            ],
        }
    }

    pub fn sets(&self) -> &[ActionSet] {
        &self.sets
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    fn count(&self) -> usize {
        self.taus.len()
    }

    #[inline]
    fn slot(&self, a: usize, j: usize, resp: usize, s: usize) -> usize {
        let i = self.count();
        ((a * self.num_constraints + j) * i + resp) * i + s
    }

    /// `w[a][j][resp][s]`.
    pub fn attributed(&self, a: usize, j: usize, resp: usize, s: usize) -> f64 {
        self.attributed[self.slot(a, j, resp, s)].value()
    }

    pub fn union(&self, active: SubsequenceSet) -> Result<ActionSet> {
        union_of(&self.sets, active)
    }

    /// Smallest active subsequence index whose candidate set contains `a_t`.
    pub fn responsible_index(&self, a_t: usize, active: SubsequenceSet) -> Result<usize> {
        check_active(active, self.count())?;
        active
            .iter()
            .find(|&i| self.sets[i].contains(a_t))
            .ok_or_else(|| {
                Error::Invariant(format!(
                    "action {a_t} is in no active candidate set (active {active})"
                ))
            })
    }

    /// Charges `c_j(a_t, y)` to `w[a_t][j][resp][S]` for each active `S`, then
    /// removes `a_t` from the responsible set if some `w[a_t][j][resp][S]`
    /// exceeds `tau_S`. Returns whether `a_t` was eliminated.
    pub fn step(
        &mut self,
        a_t: usize,
        y: &[f64],
        constraints: &ConstraintFamily,
        active: SubsequenceSet,
        resp: usize,
    ) -> Result<bool> {
        check_active(active, self.count())?;
        if !active.contains(resp) || !self.sets[resp].contains(a_t) {
            return Err(Error::Invariant(format!(
                "subsequence {resp} cannot be responsible for action {a_t}"
            )));
        }
        for j in 0..self.num_constraints {
            let c = constraints.eval(j, a_t, y)?;
            for s in active {
                let k = self.slot(a_t, j, resp, s);
                self.attributed[k].add(c);
            }
        }
        let exceeded = (0..self.num_constraints).any(|j| {
            (0..self.count()).any(|s| self.attributed(a_t, j, resp, s) > self.taus[s])
        });
        if exceeded {
            self.sets[resp].remove(a_t);
        }
        Ok(exceeded)
    }
}

fn serialize_sums<S: serde::Serializer>(sums: &[CompensatedSum], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(sums.iter().map(CompensatedSum::value))
}
