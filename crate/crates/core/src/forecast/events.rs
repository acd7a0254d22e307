use serde::Serialize;

use super::PredictionGrid;
use crate::agents::constrained_best_response;
use crate::domain::{ActionSet, AgentSpec, LinearUtility, SubsequenceSet};

/// Identifies one decision event: "agent plays `action`" (restricted to the
/// rounds of `subsequence` when subsequences are configured).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EventLabel {
    pub agent: String,
    pub action: usize,
    pub subsequence: Option<usize>,
}

/// The event collection and the map from `(agent, subsequence, action)` to
/// event index.
#[derive(Debug, Clone, PartialEq)]
pub struct EventIndex {
    labels: Vec<EventLabel>,
    offsets: Vec<usize>,
    actions: Vec<usize>,
    subsequences: Option<usize>,
}

/// Events for every agent and action, times every subsequence when given.
/// Event order is agent-major, then subsequence, then action.
pub fn register_events(agents: &[AgentSpec], subsequences: Option<usize>) -> EventIndex {
    let mut labels = Vec::new();
    let mut offsets = Vec::with_capacity(agents.len());
    for spec in agents {
        offsets.push(labels.len());
        let subs: Vec<Option<usize>> = match subsequences {
            Some(n) => (0..n).map(Some).collect(),
            None => vec![None],
        };
        for s in subs {
            for action in 0..spec.num_actions() {
                labels.push(EventLabel {
                    agent: spec.id.clone(),
                    action,
                    subsequence: s,
                });
            }
        }
    }
    EventIndex {
        labels,
        offsets,
        actions: agents.iter().map(AgentSpec::num_actions).collect(),
        subsequences,
    }
}

impl EventIndex {
    pub fn labels(&self) -> &[EventLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn subsequences(&self) -> Option<usize> {
        self.subsequences
    }

    #[inline]
    pub fn index(&self, agent: usize, subsequence: Option<usize>, action: usize) -> usize {
        self.offsets[agent] + subsequence.unwrap_or(0) * self.actions[agent] + action
    }

    /// Appends the indices of the events that fire when the agents play
    /// `plays` (`None` for a retired agent) in a round with `active` subsequences.
    pub fn firing(&self, plays: &[Option<usize>], active: SubsequenceSet, out: &mut Vec<usize>) {
        for (n, play) in plays.iter().enumerate() {
            let Some(a) = *play else { continue };
            match self.subsequences {
                None => out.push(self.index(n, None, a)),
                Some(_) => out.extend(active.iter().map(|s| self.index(n, Some(s), a))),
            }
        }
    }
}

/// What the forecaster may see of an agent during a round: its utility and
/// the set it will best respond within. Outcomes are not part of the view.
#[derive(Debug, Clone, Copy)]
pub struct AgentView<'a> {
    pub utility: &'a LinearUtility,
    /// `None` once the agent is retired.
    pub feasible: Option<ActionSet>,
}

#[derive(Debug, Clone)]
pub struct RoundView<'a> {
    pub agents: Vec<AgentView<'a>>,
    pub active: SubsequenceSet,
}

impl RoundView<'_> {
    /// Each agent's best response to `p`.
    pub fn plays(&self, p: &[f64]) -> Vec<Option<usize>> {
        self.agents
            .iter()
            .map(|v| v.feasible.and_then(|f| constrained_best_response(v.utility, f, p)))
            .collect()
    }
}

/// Event values for every grid point in one round. Events are indicators, so
/// each point stores the list of events equal to one.
#[derive(Debug, Clone, PartialEq)]
pub struct EventTable {
    entries: Vec<usize>,
    starts: Vec<usize>,
}

impl EventTable {
    pub fn tabulate(grid: &PredictionGrid, events: &EventIndex, view: &RoundView<'_>) -> Self {
        let mut entries = Vec::new();
        let mut starts = Vec::with_capacity(grid.len() + 1);
        for p in grid.points() {
            starts.push(entries.len());
            events.firing(&view.plays(p.coords()), view.active, &mut entries);
        }
        starts.push(entries.len());
        Self { entries, starts }
    }

    pub fn num_points(&self) -> usize {
        self.starts.len() - 1
    }

    /// Events equal to one at grid point `k`.
    #[inline]
    pub fn firing(&self, k: usize) -> &[usize] {
        &self.entries[self.starts[k]..self.starts[k + 1]]
    }

    /// `E(p_k)` for event `e`.
    pub fn value(&self, k: usize, e: usize) -> f64 {
        if self.firing(k).contains(&e) {
            1.0
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Constraint, ConstraintFamily, Mode};

    fn agent(id: &str, n: usize) -> AgentSpec {
        let utility = LinearUtility::new(
            (0..n).map(|a| vec![if a == 0 { 1.0 } else { 0.0 }, 0.0]).collect(),
            (0..n).map(|a| if a == 0 { 0.0 } else { 0.5 / a as f64 }).collect(),
        )
        .unwrap();
        let constraints = ConstraintFamily::new(
            vec![Constraint::Linear {
                weights: vec![vec![0.0, 0.0]; n],
                offsets: vec![-1.0; n],
            }],
            n,
            2,
        )
        .unwrap();
        AgentSpec::new(id, utility, constraints, Mode::Realization).unwrap()
    }

    #[test]
    fn event_counts() {
        let agents = vec![agent("x", 3), agent("y", 3)];
        let events = register_events(&agents, None);
        assert_eq!(events.len(), 6);
        assert_eq!(2 * 2 * events.len(), 24);
        assert_eq!(register_events(&agents, Some(2)).len(), 12);
        let events = register_events(&agents, Some(2));
        assert_eq!(
            events.labels()[events.index(1, Some(1), 2)],
            EventLabel {
                agent: "y".into(),
                action: 2,
                subsequence: Some(1)
            }
        );
    }

    #[test]
    fn indicator_follows_best_response() {
        let agents = vec![agent("x", 2)];
        let events = register_events(&agents, None);
        let grid = PredictionGrid::uniform(3, 2).unwrap();
        let view = RoundView {
            agents: vec![AgentView {
                utility: &agents[0].utility,
                feasible: Some(ActionSet::full(2)),
            }],
            active: SubsequenceSet::singleton(0),
        };
        let table = EventTable::tabulate(&grid, &events, &view);
        // Action 0 pays p_0, action 1 pays 0.5; ties go to action 0.
        for k in 0..grid.len() {
            let p0 = grid.point(k).coords()[0];
            let cbr = if p0 >= 0.5 { 0 } else { 1 };
            assert_eq!(table.value(k, cbr), 1.0);
            assert_eq!(table.value(k, 1 - cbr), 0.0);
        }
    }

    #[test]
    fn subsequence_events_fire_only_when_active() {
        let agents = vec![agent("x", 2)];
        let events = register_events(&agents, Some(3));
        let grid = PredictionGrid::uniform(2, 2).unwrap();
        let view = RoundView {
            agents: vec![AgentView {
                utility: &agents[0].utility,
                feasible: Some(ActionSet::singleton(1)),
            }],
            active: [0, 2].into_iter().collect(),
        };
        let table = EventTable::tabulate(&grid, &events, &view);
        for k in 0..grid.len() {
            assert_eq!(
                table.firing(k),
                &[events.index(0, Some(0), 1), events.index(0, Some(2), 1)]
            );
        }
        let retired = RoundView {
            agents: vec![AgentView {
                utility: &agents[0].utility,
                feasible: None,
            }],
            active: SubsequenceSet::singleton(0),
        };
        assert!(EventTable::tabulate(&grid, &events, &retired).firing(0).is_empty());
    }
}
