use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};

use super::{DistributionHandle, RoundSetup};
use crate::domain::{OutcomeDistribution, Transcript};
use crate::Result;

/// Default context `(t / T, u)` with `u` uniform on `[0, 1)`.
pub fn default_context(t: usize, horizon: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    vec![t as f64 / horizon as f64, rng.random()]
}

/// Source of contexts and outcome distributions.
///
/// `next_round` runs before the round's prediction is drawn, and the prefix
/// holds only completed rounds, so an adversary can never react to `p_t`.
pub trait Adversary: Send + fmt::Debug {
    fn next_round(&mut self, t: usize, prefix: &Transcript, rng: &mut dyn RngCore) -> Result<RoundSetup>;
}

/// The same distribution every round.
#[derive(Debug, Clone)]
pub struct IidAdversary {
    dist: Arc<OutcomeDistribution>,
    horizon: usize,
}

impl IidAdversary {
    pub fn new(dist: OutcomeDistribution, horizon: usize) -> Self {
        Self {
            dist: Arc::new(dist),
            horizon,
        }
    }
}

impl Adversary for IidAdversary {
    fn next_round(&mut self, t: usize, _prefix: &Transcript, rng: &mut dyn RngCore) -> Result<RoundSetup> {
        Ok(RoundSetup {
            context: default_context(t, self.horizon, rng),
            handle: DistributionHandle::exact(self.dist.clone()),
        })
    }
}

/// `hot` on rounds with `t % period == 0`, `cold` otherwise.
#[derive(Debug, Clone)]
pub struct PeriodicAdversary {
    pub period: usize,
    hot: Arc<OutcomeDistribution>,
    cold: Arc<OutcomeDistribution>,
    horizon: usize,
}

impl PeriodicAdversary {
    pub fn new(period: usize, hot: OutcomeDistribution, cold: OutcomeDistribution, horizon: usize) -> Self {
        Self {
            period: period.max(1),
            hot: Arc::new(hot),
            cold: Arc::new(cold),
            horizon,
        }
    }
}

impl Adversary for PeriodicAdversary {
    fn next_round(&mut self, t: usize, _prefix: &Transcript, rng: &mut dyn RngCore) -> Result<RoundSetup> {
        let dist = if t.is_multiple_of(self.period) { &self.hot } else { &self.cold };
        Ok(RoundSetup {
            context: default_context(t, self.horizon, rng),
            handle: DistributionHandle::exact(dist.clone()),
        })
    }
}

/// Piecewise-constant schedule: phase `k` covers rounds up to `ends[k]`.
#[derive(Debug, Clone)]
pub struct PhasedAdversary {
    phases: Vec<(usize, Arc<OutcomeDistribution>)>,
    horizon: usize,
}

impl PhasedAdversary {
    /// `phases` lists `(last round, distribution)`; the final phase extends to
    /// the end of the run.
    pub fn new(phases: Vec<(usize, OutcomeDistribution)>, horizon: usize) -> Self {
        Self {
            phases: phases.into_iter().map(|(end, d)| (end, Arc::new(d))).collect(),
            horizon,
        }
    }
}

impl Adversary for PhasedAdversary {
    fn next_round(&mut self, t: usize, _prefix: &Transcript, rng: &mut dyn RngCore) -> Result<RoundSetup> {
        let dist = self
            .phases
            .iter()
            .find(|(end, _)| t <= *end)
            .or(self.phases.last())
            .map(|(_, d)| d.clone())
            .expect("at least one phase");
        Ok(RoundSetup {
            context: default_context(t, self.horizon, rng),
            handle: DistributionHandle::exact(dist),
        })
    }
}

/// Chooses the round's distribution from the round index and the prefix.
pub type AdaptivePolicy = Box<dyn FnMut(usize, &Transcript) -> Arc<OutcomeDistribution> + Send>;

/// A history-dependent adversary. Unless `exposes_support` is set its handles
/// refuse expectation queries.
pub struct AdaptiveAdversary {
    policy: AdaptivePolicy,
    exposes_support: bool,
    horizon: usize,
}

impl fmt::Debug for AdaptiveAdversary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdaptiveAdversary")
            .field("exposes_support", &self.exposes_support)
            .finish_non_exhaustive()
    }
}

impl AdaptiveAdversary {
    pub fn new(policy: AdaptivePolicy, exposes_support: bool, horizon: usize) -> Self {
        Self {
            policy,
            exposes_support,
            horizon,
        }
    }
}

impl Adversary for AdaptiveAdversary {
    fn next_round(&mut self, t: usize, prefix: &Transcript, rng: &mut dyn RngCore) -> Result<RoundSetup> {
        let dist = (self.policy)(t, prefix);
        Ok(RoundSetup {
            context: default_context(t, self.horizon, rng),
            handle: if self.exposes_support {
                DistributionHandle::exact(dist)
            } else {
                DistributionHandle::opaque(dist)
            },
        })
    }
}

/// Adaptive sign alternation: plays `high` while at most half of the realized
/// outcomes so far had `y[coord] > 0.5`, and `low` otherwise.
#[derive(Debug, Clone)]
pub struct ConstraintFlipper {
    pub coord: usize,
    high: Arc<OutcomeDistribution>,
    low: Arc<OutcomeDistribution>,
    horizon: usize,
}

impl ConstraintFlipper {
    pub fn new(coord: usize, high: OutcomeDistribution, low: OutcomeDistribution, horizon: usize) -> Self {
        Self {
            coord,
            high: Arc::new(high),
            low: Arc::new(low),
            horizon,
        }
    }
}

impl Adversary for ConstraintFlipper {
    fn next_round(&mut self, t: usize, prefix: &Transcript, rng: &mut dyn RngCore) -> Result<RoundSetup> {
        let high_rounds = prefix
            .records
            .iter()
            .filter(|r| r.outcome.coords()[self.coord] > 0.5)
            .count();
        let dist = if 2 * high_rounds <= prefix.records.len() {
            &self.high
        } else {
            &self.low
        };
        Ok(RoundSetup {
            context: default_context(t, self.horizon, rng),
            handle: DistributionHandle::exact(dist.clone()),
        })
    }
}
