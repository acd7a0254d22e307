//! Domain types shared by every other module.

mod constraint;
mod distribution;
mod index_set;
mod outcome;
mod sum;
mod transcript;
mod utility;

pub use constraint::{Constraint, ConstraintFamily, CustomConstraint};
pub use distribution::OutcomeDistribution;
pub use index_set::{ActionSet, IndexSet, SubsequenceSet};
pub use outcome::{Outcome, Prediction};
pub use sum::CompensatedSum;
pub use transcript::{AgentRound, RoundRecord, Transcript};
pub use utility::{
    eval_utility, lipschitz_constant, validate_utility_range, LinearUtility, RangeDiagnostic,
    MAX_VERTEX_DIM,
};

use serde::{Deserialize, Serialize};

/// Which benchmark class an agent competes with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Constraints must hold on every realized outcome.
    Realization,
    /// Constraints must hold in expectation over each round's outcome distribution.
    Expectation,
}

/// A downstream decision maker: utility, constraints and benchmark mode.
#[derive(Debug, Clone)]
pub struct AgentSpec {
    pub id: String,
    pub utility: LinearUtility,
    pub constraints: ConstraintFamily,
    pub mode: Mode,
}

impl AgentSpec {
    pub fn new(
        id: impl Into<String>,
        utility: LinearUtility,
        constraints: ConstraintFamily,
        mode: Mode,
    ) -> crate::Result<Self> {
        if constraints.num_actions() != utility.num_actions() {
            return Err(crate::Error::config(format!(
                "constraint family covers {} actions but the utility has {}",
                constraints.num_actions(),
                utility.num_actions()
            )));
        }
        if constraints.dim() != utility.dim() {
            return Err(crate::Error::Dimension {
                expected: utility.dim(),
                actual: constraints.dim(),
            });
        }
        Ok(Self {
            id: id.into(),
            utility,
            constraints,
            mode,
        })
    }

    pub fn num_actions(&self) -> usize {
        self.utility.num_actions()
    }
}

/// Fails when two agents share an identifier.
pub fn check_unique_ids(agents: &[AgentSpec]) -> crate::Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for agent in agents {
        if !seen.insert(agent.id.as_str()) {
            return Err(crate::Error::config(format!(
                "duplicate agent identifier `{}`",
                agent.id
            )));
        }
    }
    Ok(())
}
