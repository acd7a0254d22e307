//! Downstream agents: constrained best response and the elimination ledgers
//! that maintain each agent's candidate action sets.
//!
//! Four ledgers cover the combinations of benchmark mode (realized or in
//! expectation) and whether subsequences are configured.

mod cbr;
mod expectation;
mod realization;
mod thresholds;

pub use cbr::constrained_best_response;
pub use expectation::{ExpectationLedger, SubsequenceExpectationLedger};
pub use realization::{RealizationLedger, SubsequenceRealizationLedger};
pub use thresholds::{tau_subsequence, threshold_tau};

use serde::Serialize;

use crate::domain::{ActionSet, AgentRound, AgentSpec, Mode, SubsequenceSet, Transcript};
use crate::{Error, Result};

/// Which elimination rule a ledger runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Eliminate on any realized violation.
    Realization,
    /// Eliminate the played action once its cumulative violation exceeds `tau`.
    Expectation,
    /// The realized rule run separately on every active subsequence.
    SubsequenceRealization,
    /// Attributed violations with a responsible subsequence per round.
    SubsequenceExpectation,
}

impl Algorithm {
    pub fn select(mode: Mode, subsequences: bool) -> Self {
        match (mode, subsequences) {
            (Mode::Realization, false) => Algorithm::Realization,
            (Mode::Expectation, false) => Algorithm::Expectation,
            (Mode::Realization, true) => Algorithm::SubsequenceRealization,
            (Mode::Expectation, true) => Algorithm::SubsequenceExpectation,
        }
    }
}

/// Quantities the elimination thresholds depend on.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerParams {
    pub horizon: usize,
    pub num_agents: usize,
    pub delta: f64,
    /// `|S|` per configured subsequence; `None` runs without subsequences.
    pub subsequence_lens: Option<Vec<usize>>,
    /// Replaces every computed threshold.
    pub tau_override: Option<f64>,
    /// Fault injection: the realized ledger never eliminates.
    pub skip_realized_elimination: bool,
}

/// The candidate-set state of one agent.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum CandidateLedger {
    Realization(RealizationLedger),
    Expectation(ExpectationLedger),
    SubsequenceRealization(SubsequenceRealizationLedger),
    SubsequenceExpectation(SubsequenceExpectationLedger),
}

impl CandidateLedger {
    pub fn new(spec: &AgentSpec, params: &LedgerParams) -> Result<Self> {
        let n = spec.num_actions();
        let j = spec.constraints.len();
        let algorithm = Algorithm::select(spec.mode, params.subsequence_lens.is_some());
        Ok(match algorithm {
            Algorithm::Realization => {
                let ledger = RealizationLedger::new(n);
                CandidateLedger::Realization(if params.skip_realized_elimination {
                    ledger.without_elimination()
                } else {
                    ledger
                })
            }
            Algorithm::Expectation => {
                let tau = match params.tau_override {
                    Some(t) => t,
                    None => threshold_tau(params.horizon, n, params.num_agents, j, params.delta)?,
                };
                CandidateLedger::Expectation(ExpectationLedger::new(n, j, tau))
            }
            Algorithm::SubsequenceRealization => {
                let count = params.subsequence_lens.as_ref().map_or(0, Vec::len);
                CandidateLedger::SubsequenceRealization(SubsequenceRealizationLedger::new(n, count))
            }
            Algorithm::SubsequenceExpectation => {
                let lens = params.subsequence_lens.as_deref().unwrap_or_default();
                let taus = lens
                    .iter()
                    .map(|&len| match params.tau_override {
                        Some(t) => Ok(t),
                        None => tau_subsequence(
                            len.max(1),
                            n,
                            params.num_agents,
                            lens.len(),
                            j,
                            params.delta,
                        ),
                    })
                    .collect::<Result<Vec<_>>>()?;
                CandidateLedger::SubsequenceExpectation(SubsequenceExpectationLedger::new(n, j, taus))
            }
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            CandidateLedger::Realization(_) => Algorithm::Realization,
            CandidateLedger::Expectation(_) => Algorithm::Expectation,
            CandidateLedger::SubsequenceRealization(_) => Algorithm::SubsequenceRealization,
            CandidateLedger::SubsequenceExpectation(_) => Algorithm::SubsequenceExpectation,
        }
    }

    /// The set the agent best responds within this round: `Â_t` or `U_t`.
    pub fn feasible(&self, active: SubsequenceSet) -> Result<ActionSet> {
        match self {
            CandidateLedger::Realization(l) => Ok(l.candidates()),
            CandidateLedger::Expectation(l) => Ok(l.candidates()),
            CandidateLedger::SubsequenceRealization(l) => l.union(active),
            CandidateLedger::SubsequenceExpectation(l) => l.union(active),
        }
    }

    /// Current candidate sets, one per subsequence (one entry without subsequences).
    pub fn candidate_sets(&self) -> Vec<ActionSet> {
        match self {
            CandidateLedger::Realization(l) => vec![l.candidates()],
            CandidateLedger::Expectation(l) => vec![l.candidates()],
            CandidateLedger::SubsequenceRealization(l) => l.sets().to_vec(),
            CandidateLedger::SubsequenceExpectation(l) => l.sets().to_vec(),
        }
    }

    /// Responsible subsequence of a play; only attributed ledgers have one.
    pub fn responsible(&self, action: usize, active: SubsequenceSet) -> Result<Option<usize>> {
        match self {
            CandidateLedger::SubsequenceExpectation(l) => l.responsible_index(action, active).map(Some),
            _ => Ok(None),
        }
    }

    /// Steps the ledger on the revealed outcome.
    pub fn observe(
        &mut self,
        spec: &AgentSpec,
        decision: Decision,
        y: &[f64],
        active: SubsequenceSet,
    ) -> Result<()> {
        let c = &spec.constraints;
        match self {
            CandidateLedger::Realization(l) => l.step(y, c).map(drop),
            CandidateLedger::Expectation(l) => l.step(decision.action, y, c).map(drop),
            CandidateLedger::SubsequenceRealization(l) => l.step(y, c, active).map(drop),
            CandidateLedger::SubsequenceExpectation(l) => {
                let r = decision.responsible.ok_or_else(|| {
                    Error::Invariant("attributed ledger stepped without a responsible index".into())
                })?;
                l.step(decision.action, y, c, active, r).map(drop)
            }
        }
    }
}

/// An agent's play in one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub action: usize,
    pub responsible: Option<usize>,
}

/// An agent together with its live ledger.
#[derive(Debug, Clone)]
pub struct Agent {
    pub spec: AgentSpec,
    pub ledger: CandidateLedger,
    exhausted_at: Option<usize>,
}

impl Agent {
    pub fn new(spec: AgentSpec, params: &LedgerParams) -> Result<Self> {
        let ledger = CandidateLedger::new(&spec, params)?;
        Ok(Self {
            spec,
            ledger,
            exhausted_at: None,
        })
    }

    /// Round at which the feasible set first came up empty.
    pub fn exhausted_at(&self) -> Option<usize> {
        self.exhausted_at
    }

    /// Best responds to `p` within the round's feasible set. An empty set
    /// retires the agent for the rest of the run.
    pub fn decide(&mut self, p: &[f64], active: SubsequenceSet, round: usize) -> Result<Decision> {
        let exhausted = || Error::FeasibilityExhausted {
            agent: self.spec.id.clone(),
            round,
        };
        if self.exhausted_at.is_some() {
            return Err(exhausted());
        }
        let feasible = self.ledger.feasible(active)?;
        let Some(action) = constrained_best_response(&self.spec.utility, feasible, p) else {
            let err = exhausted();
            self.exhausted_at = Some(round);
            return Err(err);
        };
        let responsible = self.ledger.responsible(action, active)?;
        Ok(Decision {
            action,
            responsible,
        })
    }

    pub fn observe(&mut self, decision: Decision, y: &[f64], active: SubsequenceSet) -> Result<()> {
        self.ledger.observe(&self.spec, decision, y, active)
    }

    /// Round record entry for a play made against the current ledger state.
    pub fn round_entry(&self, decision: Option<Decision>, active: SubsequenceSet) -> Result<AgentRound> {
        Ok(AgentRound {
            action: decision.map(|d| d.action),
            feasible: if self.exhausted_at.is_some() {
                ActionSet::empty()
            } else {
                self.ledger.feasible(active)?
            },
            candidate_sets: self.ledger.candidate_sets(),
            responsible: decision.and_then(|d| d.responsible),
        })
    }
}

/// Rebuilds agent `index`'s ledger from the transcript alone, checking each
/// recorded play and candidate set against the replayed state. Returns the
/// replayed agent.
pub fn replay(spec: AgentSpec, params: &LedgerParams, index: usize, transcript: &Transcript) -> Result<Agent> {
    let mut agent = Agent::new(spec, params)?;
    for record in &transcript.records {
        let entry = record.agents.get(index).ok_or_else(|| {
            Error::Invariant(format!("round {} has no entry for agent {index}", record.round))
        })?;
        let mismatch = |what: &str| {
            Error::Invariant(format!(
                "replay of agent {index} diverged at round {}: {what}",
                record.round
            ))
        };
        if agent.ledger.candidate_sets() != entry.candidate_sets {
            return Err(mismatch("candidate sets"));
        }
        match agent.decide(record.prediction.coords(), record.active, record.round) {
            Ok(decision) => {
                if entry.action != Some(decision.action) || entry.responsible != decision.responsible {
                    return Err(mismatch("action"));
                }
                agent.observe(decision, record.outcome.coords(), record.active)?;
            }
            Err(Error::FeasibilityExhausted { .. }) => {
                if entry.action.is_some() {
                    return Err(mismatch("exhaustion"));
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(agent)
}
