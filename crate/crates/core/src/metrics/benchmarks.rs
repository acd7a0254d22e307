use serde::Serialize;

use super::Scope;
use crate::domain::{ActionSet, AgentSpec, Transcript};
use crate::{Error, Result};

/// Expected constraint values up to this much above zero still count as
/// satisfied, absorbing rounding in the finite-support sums.
pub const EXPECTATION_SLACK: f64 = 1e-12;

/// Benchmark classes of one agent for every scope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkSets {
    /// Actions whose constraints held on every realized outcome of the scope.
    pub realized: Vec<(Scope, ActionSet)>,
    /// Actions whose constraints held in expectation every round of the scope.
    pub expectation: Option<Vec<(Scope, ActionSet)>>,
}

impl BenchmarkSets {
    pub fn realized(&self, scope: Scope) -> ActionSet {
        lookup(&self.realized, scope)
    }

    pub fn expectation(&self, scope: Scope) -> Option<ActionSet> {
        self.expectation.as_ref().map(|e| lookup(e, scope))
    }
}

fn lookup(sets: &[(Scope, ActionSet)], scope: Scope) -> ActionSet {
    sets.iter()
        .find(|(s, _)| *s == scope)
        .map(|(_, a)| *a)
        .unwrap_or_default()
}

/// Scans every round of every scope. Expectation sets need every round's
/// distribution to allow exact expectations.
pub fn compute_benchmarks(
    transcript: &Transcript,
    spec: &AgentSpec,
    scopes: &[Scope],
    with_expectation: bool,
) -> Result<BenchmarkSets> {
    let n = spec.num_actions();
    let c = &spec.constraints;
    let mut realized = vec![ActionSet::full(n); scopes.len()];
    let mut expectation = vec![ActionSet::full(n); scopes.len()];
    let mut values = vec![0.0; c.len()];
    for record in &transcript.records {
        if with_expectation && !record.expectation_supported {
            return Err(Error::Unsupported(format!(
                "round {} does not support expectation queries",
                record.round
            )));
        }
        let y = record.outcome.coords();
        let mut violated = ActionSet::empty();
        let mut violated_in_expectation = ActionSet::empty();
        for a in 0..n {
            c.eval_all(a, y, &mut values)?;
            if values.iter().any(|&v| v > 0.0) {
                violated.insert(a);
            }
            if with_expectation {
                let e = c.expected(a, &record.outcome_distribution)?;
                if e.iter().any(|&v| v > EXPECTATION_SLACK) {
                    violated_in_expectation.insert(a);
                }
            }
        }
        for (k, scope) in scopes.iter().enumerate() {
            if scope.contains(record) {
                realized[k] = realized[k].difference(violated);
                expectation[k] = expectation[k].difference(violated_in_expectation);
            }
        }
    }
    Ok(BenchmarkSets {
        realized: scopes.iter().copied().zip(realized).collect(),
        expectation: with_expectation.then(|| scopes.iter().copied().zip(expectation).collect()),
    })
}
