use serde::{Serialize, Serializer};

use super::Scope;
use crate::domain::{ActionSet, AgentSpec, CompensatedSum, Transcript};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CcvVariant {
    Signed,
    /// Sums `max(0, c)`.
    Positive,
}

/// A regret value, or `Undefined` when the benchmark class is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regret {
    Value(f64),
    Undefined,
}

impl Regret {
    pub fn value(self) -> Option<f64> {
        match self {
            Regret::Value(v) => Some(v),
            Regret::Undefined => None,
        }
    }
}

impl Serialize for Regret {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Regret::Value(v) => s.serialize_f64(*v),
            Regret::Undefined => s.serialize_str("undefined"),
        }
    }
}

/// Plays of agent `index` within the scope, as `(action, outcome)` pairs.
fn plays<'a>(
    transcript: &'a Transcript,
    index: usize,
    scope: Scope,
) -> impl Iterator<Item = (usize, &'a [f64])> + 'a {
    transcript
        .records
        .iter()
        .filter(move |r| scope.contains(r))
        .filter_map(move |r| r.agents[index].action.map(|a| (a, r.outcome.coords())))
}

/// `max_j Σ_{t in scope} c_j(a_t, y_t)`, or with `c⁺` for the positive variant.
/// Rounds after the agent retired contribute nothing.
pub fn ccv(
    transcript: &Transcript,
    spec: &AgentSpec,
    index: usize,
    scope: Scope,
    variant: CcvVariant,
) -> Result<f64> {
    let c = &spec.constraints;
    let mut sums = vec![CompensatedSum::new(); c.len()];
    for (a, y) in plays(transcript, index, scope) {
        for (j, s) in sums.iter_mut().enumerate() {
            let v = c.eval(j, a, y)?;
            s.add(match variant {
                CcvVariant::Signed => v,
                CcvVariant::Positive => v.max(0.0),
            });
        }
    }
    Ok(sums
        .iter()
        .map(CompensatedSum::value)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `sums[a][b] = Σ_{t: a_t = a} u(b, y_t) − u(a, y_t)` over the scope, plus
/// the per-action play counts.
fn slice_gains(transcript: &Transcript, spec: &AgentSpec, index: usize, scope: Scope) -> (Vec<Vec<f64>>, Vec<usize>) {
    let n = spec.num_actions();
    let u = &spec.utility;
    let mut sums = vec![vec![CompensatedSum::new(); n]; n];
    let mut counts = vec![0; n];
    for (a, y) in plays(transcript, index, scope) {
        counts[a] += 1;
        let base = u.value(a, y);
        for (b, s) in sums[a].iter_mut().enumerate() {
            s.add(u.value(b, y) - base);
        }
    }
    (
        sums.iter()
            .map(|row| row.iter().map(CompensatedSum::value).collect())
            .collect(),
        counts,
    )
}

/// `max_{b in B} Σ_{t in scope} u(b, y_t) − u(a_t, y_t)`.
pub fn external_regret(
    transcript: &Transcript,
    spec: &AgentSpec,
    index: usize,
    benchmark: ActionSet,
    scope: Scope,
) -> Regret {
    if benchmark.is_empty() {
        return Regret::Undefined;
    }
    let u = &spec.utility;
    let mut sums = vec![CompensatedSum::new(); spec.num_actions()];
    for (a, y) in plays(transcript, index, scope) {
        let base = u.value(a, y);
        for b in benchmark {
            sums[b].add(u.value(b, y) - base);
        }
    }
    Regret::Value(
        benchmark
            .iter()
            .map(|b| sums[b].value())
            .fold(f64::NEG_INFINITY, f64::max),
    )
}

/// Swap regret against modification rules into `B`, by decomposition: each
/// played action's slice is swapped to its own best `b in B`.
pub fn swap_regret(
    transcript: &Transcript,
    spec: &AgentSpec,
    index: usize,
    benchmark: ActionSet,
    scope: Scope,
) -> Regret {
    if benchmark.is_empty() {
        return Regret::Undefined;
    }
    let (sums, counts) = slice_gains(transcript, spec, index, scope);
    let mut total = 0.0;
    for (a, row) in sums.iter().enumerate() {
        if counts[a] == 0 {
            continue;
        }
        total += benchmark
            .iter()
            .map(|b| row[b])
            .fold(f64::NEG_INFINITY, f64::max);
    }
    Regret::Value(total)
}

/// Swap regret by enumerating all `|B|^|A|` modification rules and summing
/// round by round. Exponential; for oracle checks on small instances.
pub fn swap_regret_brute_force(
    transcript: &Transcript,
    spec: &AgentSpec,
    index: usize,
    benchmark: ActionSet,
    scope: Scope,
) -> Regret {
    if benchmark.is_empty() {
        return Regret::Undefined;
    }
    let n = spec.num_actions();
    let targets: Vec<usize> = benchmark.iter().collect();
    let rounds: Vec<(usize, &[f64])> = plays(transcript, index, scope).collect();
    let mut phi = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    loop {
        let value: f64 = rounds
            .iter()
            .map(|&(a, y)| spec.utility.value(targets[phi[a]], y) - spec.utility.value(a, y))
            .sum();
        best = best.max(value);
        // Next rule in mixed-radix order.
        let mut k = 0;
        loop {
            if k == n {
                return Regret::Value(best);
            }
            phi[k] += 1;
            if phi[k] < targets.len() {
                break;
            }
            phi[k] = 0;
            k += 1;
        }
    }
}
