use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ActionSet, Outcome, OutcomeDistribution, SubsequenceSet};
use crate::{Error, Result};

/// One agent's part of a round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRound {
    /// `None` once the agent's feasible set has been exhausted.
    pub action: Option<usize>,
    /// The set the agent best responded within (`Â_t`, or the union `U_t`).
    pub feasible: ActionSet,
    /// Ledger candidate sets at the start of the round, one per subsequence
    /// (a single entry when no subsequences are configured).
    pub candidate_sets: Vec<ActionSet>,
    /// Index of the subsequence charged with the play (attributed ledgers only).
    pub responsible: Option<usize>,
}

/// Everything observed in one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based round index.
    pub round: usize,
    pub context: Vec<f64>,
    /// Subsequences containing this round.
    pub active: SubsequenceSet,
    /// The distribution the prediction was drawn from.
    pub forecast: OutcomeDistribution,
    pub prediction: Outcome,
    pub outcome: Outcome,
    /// The adversary's outcome distribution for the round.
    pub outcome_distribution: Arc<OutcomeDistribution>,
    /// Whether exact expectations under `outcome_distribution` may be used.
    pub expectation_supported: bool,
    pub agents: Vec<AgentRound>,
}

/// Append-only record of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub seed: u64,
    pub config_digest: String,
    pub records: Vec<RoundRecord>,
}

impl Transcript {
    pub fn new(seed: u64, config_digest: impl Into<String>) -> Self {
        Self {
            seed,
            config_digest: config_digest.into(),
            records: Vec::new(),
        }
    }

    /// Appends a round, enforcing strictly increasing round indices and that
    /// the prediction lies in the recorded forecast support.
    pub fn push(&mut self, record: RoundRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if record.round <= last.round {
                return Err(Error::Invariant(format!(
                    "round {} recorded after round {}",
                    record.round, last.round
                )));
            }
        }
        if !record.forecast.contains(&record.prediction) {
            return Err(Error::Invariant(format!(
                "round {}: prediction is not in the recorded forecast support",
                record.round
            )));
        }
        self.records.push(record);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Checks the record count against the horizon.
    pub fn check_complete(&self, horizon: usize) -> Result<()> {
        if self.records.len() != horizon {
            return Err(Error::Invariant(format!(
                "transcript holds {} rounds, expected {horizon}",
                self.records.len()
            )));
        }
        Ok(())
    }

    /// Writes one whitespace-separated row per round.
    ///
    /// Columns: round, active-subsequence bitmask, context coordinates,
    /// prediction, outcome, forecast support size, then per agent the action
    /// (`-` when exhausted), the feasible-set bitmask and the responsible
    /// subsequence (`-` when not attributed).
    pub fn write_columnar<W: Write>(&self, mut w: W) -> Result<()> {
        let Some(first) = self.records.first() else {
            writeln!(w, "# empty transcript")?;
            return Ok(());
        };
        let mut header = vec!["round".to_string(), "active".to_string()];
        header.extend((0..first.context.len()).map(|i| format!("x{i}")));
        header.extend((0..first.prediction.dim()).map(|i| format!("p{i}")));
        header.extend((0..first.outcome.dim()).map(|i| format!("y{i}")));
        header.push("support".into());
        for n in 0..first.agents.len() {
            header.push(format!("a{n}"));
            header.push(format!("feasible{n}"));
            header.push(format!("resp{n}"));
        }
        writeln!(w, "# seed={} digest={}", self.seed, self.config_digest)?;
        writeln!(w, "{}", header.join(" "))?;
        for r in &self.records {
            let mut row = vec![r.round.to_string(), format!("{:x}", r.active.bits())];
            row.extend(r.context.iter().map(|v| v.to_string()));
            row.extend(r.prediction.coords().iter().map(|v| v.to_string()));
            row.extend(r.outcome.coords().iter().map(|v| v.to_string()));
            row.push(r.forecast.support().len().to_string());
            for a in &r.agents {
                row.push(a.action.map_or("-".into(), |x| x.to_string()));
                row.push(format!("{:x}", a.feasible.bits()));
                row.push(a.responsible.map_or("-".into(), |x| x.to_string()));
            }
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(round: usize, p: f64) -> RoundRecord {
        let y = Outcome::new(vec![0.5]).unwrap();
        RoundRecord {
            round,
            context: vec![0.0],
            active: SubsequenceSet::singleton(0),
            forecast: OutcomeDistribution::new(
                vec![Outcome::new(vec![0.0]).unwrap(), Outcome::new(vec![1.0]).unwrap()],
                vec![0.5, 0.5],
            )
            .unwrap(),
            prediction: Outcome::new(vec![p]).unwrap(),
            outcome: y.clone(),
            outcome_distribution: Arc::new(OutcomeDistribution::point_mass(y)),
            expectation_supported: true,
            agents: vec![],
        }
    }

    #[test]
    fn enforces_round_order_and_support_membership() {
        let mut t = Transcript::new(1, "x");
        t.push(record(1, 0.0)).unwrap();
        assert!(t.push(record(1, 1.0)).is_err());
        assert!(t.push(record(2, 0.5)).is_err());
        t.push(record(3, 1.0)).unwrap();
        assert!(t.check_complete(2).is_ok());
        assert!(t.check_complete(3).is_err());
    }

    #[test]
    fn columnar_output_has_one_row_per_round() {
        let mut t = Transcript::new(1, "x");
        t.push(record(1, 0.0)).unwrap();
        t.push(record(2, 1.0)).unwrap();
        let mut buf = Vec::new();
        t.write_columnar(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(1).unwrap().starts_with("round active x0 p0 y0 support"));
    }
}
