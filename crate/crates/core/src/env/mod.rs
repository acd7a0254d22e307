//! Adversaries and subsequence definitions.
//!
//! An adversary emits, before any prediction is drawn, the round's context and
//! a finite-support outcome distribution. The returned handle samples the
//! outcome and, when the adversary allows it, answers exact expectation
//! queries.

mod adversary;
mod script;
mod subsequence;

pub use adversary::{
    default_context, Adversary, AdaptiveAdversary, AdaptivePolicy, ConstraintFlipper,
    IidAdversary, PeriodicAdversary, PhasedAdversary,
};
pub use script::{parse_script, ScriptedAdversary};
pub use subsequence::{active_subsequences, SubsequenceDef};

use std::sync::Arc;

use rand::Rng;

use crate::domain::{ConstraintFamily, Outcome, OutcomeDistribution};
use crate::{Error, Result};

/// A round's outcome distribution, sealed once emitted.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionHandle {
    dist: Arc<OutcomeDistribution>,
    exact: bool,
}

impl DistributionHandle {
    /// A handle that answers expectation queries.
    pub fn exact(dist: Arc<OutcomeDistribution>) -> Self {
        Self { dist, exact: true }
    }

    /// A handle that only supports sampling.
    pub fn opaque(dist: Arc<OutcomeDistribution>) -> Self {
        Self { dist, exact: false }
    }

    pub fn supports_expectation(&self) -> bool {
        self.exact
    }

    pub fn distribution(&self) -> &Arc<OutcomeDistribution> {
        &self.dist
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &Outcome {
        self.dist.sample(rng)
    }

    /// `E_{y ~ Y_t}[c_j(a, y)]` for every `j`.
    pub fn expected_constraint(&self, constraints: &ConstraintFamily, a: usize) -> Result<Vec<f64>> {
        if !self.exact {
            return Err(Error::Unsupported(
                "this adversary does not expose its outcome distribution for expectation queries".into(),
            ));
        }
        constraints.expected(a, &self.dist)
    }
}

/// What an adversary emits at the start of a round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundSetup {
    pub context: Vec<f64>,
    pub handle: DistributionHandle,
}
