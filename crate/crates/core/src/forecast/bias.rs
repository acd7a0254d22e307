use serde::Serialize;

use super::{EventIndex, EventLabel};
use crate::agents::constrained_best_response;
use crate::domain::{AgentSpec, Transcript};
use crate::{Error, Result};

/// Realized conditional bias of one event over a transcript.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventBias {
    pub label: EventLabel,
    /// `‖Σ_t E(p_t) (p_t − y_t)‖_∞`.
    pub bias: f64,
    /// `n_T(E) = Σ_t E(p_t)`.
    pub count: f64,
}

/// Recomputes every event on the recorded predictions and returns its bias.
///
/// Events are evaluated from the recorded feasible sets, so the result depends
/// on nothing but the transcript and the agents' utilities.
pub fn conditional_bias(
    transcript: &Transcript,
    agents: &[AgentSpec],
    events: &EventIndex,
) -> Result<Vec<EventBias>> {
    let dim = transcript
        .records
        .first()
        .map_or(0, |r| r.prediction.dim());
    let mut sums = vec![0.0; events.len() * dim];
    let mut counts = vec![0.0; events.len()];
    let mut firing = Vec::new();
    for record in &transcript.records {
        if record.agents.len() != agents.len() {
            return Err(Error::Invariant(format!(
                "round {} records {} agents, expected {}",
                record.round,
                record.agents.len(),
                agents.len()
            )));
        }
        let p = record.prediction.coords();
        let y = record.outcome.coords();
        let plays: Vec<Option<usize>> = agents
            .iter()
            .zip(&record.agents)
            .map(|(spec, entry)| constrained_best_response(&spec.utility, entry.feasible, p))
            .collect();
        firing.clear();
        events.firing(&plays, record.active, &mut firing);
        for &e in &firing {
            counts[e] += 1.0;
            for i in 0..dim {
                sums[e * dim + i] += p[i] - y[i];
            }
        }
    }
    Ok(events
        .labels()
        .iter()
        .enumerate()
        .map(|(e, label)| EventBias {
            label: label.clone(),
            bias: sums[e * dim..(e + 1) * dim]
                .iter()
                .fold(0.0, |m, s: &f64| m.max(s.abs())),
            count: counts[e],
        })
        .collect())
}
