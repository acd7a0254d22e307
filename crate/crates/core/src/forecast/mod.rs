//! The forecaster: conditionally unbiased predictions on a finite grid.
//!
//! Each round the forecaster tabulates every decision event on every grid
//! point, weighs the `2 d |E|` experts `(E, i, σ)` by their exponentiated
//! cumulative bias, and solves the resulting zero-sum game for a prediction
//! distribution. After the outcome is revealed the experts' biases are
//! updated in expectation over that distribution.

mod bias;
mod events;
mod experts;
mod game;
mod grid;
mod simplex;

pub use bias::{conditional_bias, EventBias};
pub use events::{register_events, AgentView, EventIndex, EventLabel, EventTable, RoundView};
pub use experts::{learning_rate, ExpertState, ExpertWeights};
pub use game::{
    mesh_minmax, solve_minmax, GameCoefficients, MinmaxSolution, SolverConfig, SolverMethod,
};
pub use grid::{GridSpec, PredictionGrid, MAX_GRID_POINTS};
pub use simplex::{solve_matrix_game, MatrixGameSolution};

use rand::Rng;

use crate::domain::{Outcome, OutcomeDistribution};
use crate::Result;

/// Probabilities below this are dropped from a prediction distribution.
const MASS_FLOOR: f64 = 1e-12;

/// Everything the forecaster computed before the outcome of a round.
#[derive(Debug, Clone)]
pub struct RoundPlan {
    pub table: EventTable,
    pub solution: MinmaxSolution,
    /// `(grid index, probability)` for the points with positive mass.
    pub support: Vec<(usize, f64)>,
    pub weights_entropy: f64,
}

impl RoundPlan {
    /// The prediction distribution as an outcome distribution over grid points.
    pub fn distribution(&self, grid: &PredictionGrid) -> Result<OutcomeDistribution> {
        OutcomeDistribution::new(
            self.support.iter().map(|&(k, _)| grid.point(k).clone()).collect(),
            self.support.iter().map(|&(_, w)| w).collect(),
        )
    }

    /// Draws a grid index.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for &(k, w) in &self.support {
            acc += w;
            if u < acc {
                return k;
            }
        }
        self.support.last().expect("support is non-empty").0
    }
}

#[derive(Debug, Clone)]
pub struct Forecaster {
    grid: PredictionGrid,
    events: EventIndex,
    experts: ExpertState,
    solver: SolverConfig,
}

impl Forecaster {
    /// `eta` defaults to the horizon-tuned learning rate.
    pub fn new(
        grid: PredictionGrid,
        events: EventIndex,
        horizon: usize,
        solver: SolverConfig,
        eta: Option<f64>,
    ) -> Result<Self> {
        let eta = match eta {
            Some(e) => e,
            None => learning_rate(grid.dim(), events.len().max(1), horizon)?,
        };
        let experts = ExpertState::new(grid.dim(), events.len(), eta)?;
        Ok(Self {
            grid,
            events,
            experts,
            solver,
        })
    }

    #[doc(hidden)]
    pub fn with_flipped_sign(mut self) -> Self {
        self.experts = self.experts.with_flipped_sign();
        self
    }

    pub fn grid(&self) -> &PredictionGrid {
        &self.grid
    }

    pub fn events(&self) -> &EventIndex {
        &self.events
    }

    pub fn experts(&self) -> &ExpertState {
        &self.experts
    }

    /// Solves the round's game against the agents' current feasible sets.
    pub fn plan(&self, view: &RoundView<'_>) -> Result<RoundPlan> {
        let table = EventTable::tabulate(&self.grid, &self.events, view);
        let weights = self.experts.weights();
        let game = GameCoefficients::new(&self.grid, &table, &weights);
        let solution = solve_minmax(&game, &self.solver)?;
        let mut support: Vec<(usize, f64)> = solution
            .psi
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > MASS_FLOOR)
            .map(|(k, &w)| (k, w))
            .collect();
        let total: f64 = support.iter().map(|(_, w)| w).sum();
        support.iter_mut().for_each(|(_, w)| *w /= total);
        Ok(RoundPlan {
            table,
            solution,
            support,
            weights_entropy: weights.entropy(),
        })
    }

    pub fn prediction(&self, k: usize) -> &Outcome {
        self.grid.point(k)
    }

    /// Expected expert update under the plan's distribution.
    pub fn record(&mut self, plan: &RoundPlan, y: &[f64]) {
        let grid = &self.grid;
        self.experts.record(
            plan.support.iter().copied(),
            |k| grid.point(k).coords(),
            &plan.table,
            y,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{
        ActionSet, AgentSpec, Constraint, ConstraintFamily, LinearUtility, Mode, SubsequenceSet,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (Vec<AgentSpec>, Forecaster) {
        let utility = LinearUtility::new(vec![vec![1.0], vec![0.0]], vec![0.0, 0.5]).unwrap();
        let constraints = ConstraintFamily::new(
            vec![Constraint::Linear {
                weights: vec![vec![0.0]; 2],
                offsets: vec![-1.0; 2],
            }],
            2,
            1,
        )
        .unwrap();
        let agents = vec![AgentSpec::new("a", utility, constraints, Mode::Realization).unwrap()];
        let events = register_events(&agents, None);
        let grid = PredictionGrid::uniform(5, 1).unwrap();
        let f = Forecaster::new(grid, events, 100, SolverConfig::default(), None).unwrap();
        (agents, f)
    }

    fn plan_with_support(support: Vec<(usize, f64)>) -> RoundPlan {
        let grid = PredictionGrid::uniform(4, 1).unwrap();
        let view = RoundView {
            agents: vec![],
            active: SubsequenceSet::singleton(0),
        };
        RoundPlan {
            table: EventTable::tabulate(&grid, &register_events(&[], None), &view),
            solution: MinmaxSolution {
                psi: vec![0.0; 4],
                upper: 0.0,
                lower: 0.0,
                gap: 0.0,
                worst_y: vec![0.0],
                iterations: 0,
            },
            support,
            weights_entropy: 0.0,
        }
    }

    #[test]
    fn point_mass_always_sampled() {
        let plan = plan_with_support(vec![(1, 1.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..1000).all(|_| plan.sample(&mut rng) == 1));
    }

    #[test]
    fn two_point_sampling_frequencies() {
        let plan = plan_with_support(vec![(0, 0.5), (3, 0.5)]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let hits = (0..n).filter(|_| plan.sample(&mut rng) == 0).count() as f64;
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((hits - n as f64 / 2.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn plan_is_deterministic_and_certified() {
        let (agents, mut f) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut draws = Vec::new();
        for t in 0..30 {
            let view = RoundView {
                agents: vec![AgentView {
                    utility: &agents[0].utility,
                    feasible: Some(ActionSet::full(2)),
                }],
                active: SubsequenceSet::singleton(0),
            };
            let plan = f.plan(&view).unwrap();
            assert!(plan.solution.gap <= 1e-3);
            let total: f64 = plan.support.iter().map(|(_, w)| w).sum();
            assert!((total - 1.0).abs() < 1e-12);
            let k = plan.sample(&mut rng);
            draws.push(k);
            let y = if t % 3 == 0 { 1.0 } else { 0.2 };
            f.record(&plan, &[y]);
        }
        let (_, mut g) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (t, &k) in draws.iter().enumerate() {
            let view = RoundView {
                agents: vec![AgentView {
                    utility: &agents[0].utility,
                    feasible: Some(ActionSet::full(2)),
                }],
                active: SubsequenceSet::singleton(0),
            };
            let plan = g.plan(&view).unwrap();
            assert_eq!(plan.sample(&mut rng), k);
            let y = if t % 3 == 0 { 1.0 } else { 0.2 };
            g.record(&plan, &[y]);
        }
    }
}
