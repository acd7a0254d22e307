//! Post-hoc measurements. Every function here reads only the transcript and
//! the agents' specifications, never live ledgers.

mod benchmarks;
mod bounds;
mod regret;

pub use benchmarks::{compute_benchmarks, BenchmarkSets, EXPECTATION_SLACK};
pub use bounds::{
    bias_bound, ccv_expectation_bound, ccv_realized_bound, ccv_subsequence_expectation_bound,
    ccv_subsequence_realized_bound, swap_regret_bound, theorem_bounds, BoundParams, NamedBound,
};
pub use regret::{
    ccv, external_regret, swap_regret, swap_regret_brute_force, CcvVariant, Regret,
};

use serde::{Serialize, Serializer};

use crate::domain::RoundRecord;

/// A set of rounds: the whole horizon or one configured subsequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scope {
    Full,
    Subsequence(usize),
}

impl Scope {
    pub fn contains(self, record: &RoundRecord) -> bool {
        match self {
            Scope::Full => true,
            Scope::Subsequence(i) => record.active.contains(i),
        }
    }

    /// `full` or `S<i>`.
    pub fn label(self) -> String {
        match self {
            Scope::Full => "full".into(),
            Scope::Subsequence(i) => format!("S{i}"),
        }
    }

    /// `Full` followed by every subsequence.
    pub fn all(num_subsequences: usize) -> Vec<Scope> {
        std::iter::once(Scope::Full)
            .chain((0..num_subsequences).map(Scope::Subsequence))
            .collect()
    }
}

impl Serialize for Scope {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}
