//! Built-in configurations used by the verification suite and as examples.
//!
//! Every builder returns a complete [`RunConfig`]; callers adjust the seed,
//! horizon or prediction source as needed.

use super::config::{
    AdversaryConfig, AgentConfig, ConstraintConfig, DistributionConfig, FaultConfig, PhaseConfig,
    PredictionSource, RunConfig, UtilityConfig,
};
use crate::domain::Mode;
use crate::env::SubsequenceDef;
use crate::forecast::{GridSpec, SolverMethod};

fn base(horizon: usize, seed: u64, adversary: AdversaryConfig, agents: Vec<AgentConfig>) -> RunConfig {
    RunConfig {
        horizon,
        dim: 2,
        seed,
        delta: 0.05,
        tolerance: 1e-3,
        solver: SolverMethod::Simplex,
        prediction_source: PredictionSource::Forecaster,
        grid: GridSpec::Uniform { points_per_coord: 9 },
        eta: None,
        tau: None,
        adversary,
        subsequences: vec![],
        agents,
        diagnostics: false,
        faults: FaultConfig::default(),
        output: None,
    }
}

fn dist(support: &[[f64; 2]], probs: Option<&[f64]>) -> DistributionConfig {
    DistributionConfig {
        support: support.iter().map(|y| y.to_vec()).collect(),
        probs: probs.map(<[f64]>::to_vec),
    }
}

fn utility(weights: &[[f64; 2]], offsets: &[f64]) -> UtilityConfig {
    UtilityConfig {
        weights: weights.iter().map(|w| w.to_vec()).collect(),
        offsets: offsets.to_vec(),
    }
}

fn threshold(coord: usize, thresholds: &[f64], above: f64, below: f64) -> ConstraintConfig {
    ConstraintConfig::Threshold {
        coord,
        thresholds: thresholds.to_vec(),
        above,
        below,
    }
}

/// Eight actions, three constraints (threshold, linear, tabular) and an iid
/// six-point adversary. Actions 0 and 3 never violate; the others are
/// violated by some support point.
pub fn realized_elimination(horizon: usize, seed: u64, source: PredictionSource) -> RunConfig {
    let alphas: Vec<f64> = (0..8).map(|a| a as f64 / 7.0).collect();
    let weights: Vec<[f64; 2]> = alphas.iter().map(|&a| [0.6 * a, 0.6 * (1.0 - a)]).collect();
    let mut cells = vec![vec![-0.5; 9]; 8];
    cells[3][2] = 0.3;
    cells[5][8] = 0.3;
    cells[6][6] = 0.3;
    cells[7][4] = 0.3;
    let agent = AgentConfig {
        id: "octo".into(),
        mode: Mode::Realization,
        utility: utility(&weights, &[0.0, 0.1, 0.2, 0.3, 0.35, 0.3, 0.2, 0.1]),
        constraints: vec![
            threshold(0, &[1.0, 0.85, 0.7, 1.0, 0.55, 1.0, 0.75, 0.95], 0.6, -0.4),
            ConstraintConfig::Linear {
                weights: vec![vec![0.0, 0.8]; 8],
                offsets: [1.0, 1.0, 0.9, 1.0, 1.0, 0.8, 1.0, 0.5].iter().map(|t| -0.8 * t).collect(),
            },
            ConstraintConfig::Tabular { resolution: 3, values: cells },
        ],
    };
    let adversary = AdversaryConfig::BenignIid {
        dist: Some(dist(
            &[[0.1, 0.2], [0.3, 0.7], [0.5, 0.5], [0.6, 0.9], [0.8, 0.4], [0.9, 0.85]],
            Some(&[0.2, 0.15, 0.2, 0.15, 0.15, 0.15]),
        )),
    };
    let mut c = base(horizon, seed, adversary, vec![agent]);
    c.prediction_source = source;
    c
}

/// Benchmark of [`expectation_elimination`]: actions satisfying every
/// constraint in expectation.
pub const EXPECTATION_BENCHMARK: [usize; 3] = [1, 2, 3];

/// Four actions under threshold elimination. Action 0 has the highest
/// utility and violates by +0.5 in expectation; action 1 sits exactly on the
/// boundary (±1 with mean zero); actions 2 and 3 are strictly slack.
pub fn expectation_elimination(horizon: usize, seed: u64) -> RunConfig {
    let agent = AgentConfig {
        id: "quad".into(),
        mode: Mode::Expectation,
        utility: utility(&[[0.1, 0.1], [0.2, 0.0], [0.0, 0.3], [0.1, 0.1]], &[0.75, 0.6, 0.3, 0.2]),
        constraints: vec![
            threshold(0, &[1.0, 0.5, 1.0, 1.0], 1.0, -1.0),
            ConstraintConfig::Linear {
                weights: vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]],
                offsets: vec![0.5, -0.5, -1.0, -0.2],
            },
        ],
    };
    let adversary = AdversaryConfig::BenignIid {
        dist: Some(dist(&[[0.25, 0.2], [0.75, 0.2], [0.25, 0.6], [0.75, 0.6]], None)),
    };
    base(horizon, seed, adversary, vec![agent])
}

/// Six actions, per-subsequence realized elimination over two overlapping
/// intervals and every third round. The adversary changes regime halfway, so
/// different actions fail in different subsequences.
pub fn subsequence_realized(horizon: usize, seed: u64) -> RunConfig {
    let agent = AgentConfig {
        id: "hexa".into(),
        mode: Mode::Realization,
        utility: utility(
            &[[0.3, 0.3], [0.4, 0.1], [0.1, 0.4], [0.25, 0.25], [0.35, 0.05], [0.1, 0.1]],
            &[0.4, 0.4, 0.4, 0.35, 0.5, 0.2],
        ),
        constraints: vec![
            threshold(0, &[0.7, 1.0, 0.7, 1.0, 0.45, 1.0], 1.0, -1.0),
            threshold(1, &[1.0, 0.7, 1.0, 0.45, 1.0, 1.0], 1.0, -1.0),
        ],
    };
    let adversary = AdversaryConfig::Phased {
        phases: vec![
            PhaseConfig {
                until: horizon / 2,
                dist: dist(&[[0.2, 0.2], [0.8, 0.2], [0.2, 0.4], [0.8, 0.4]], None),
            },
            PhaseConfig {
                until: horizon.max(horizon / 2 + 1),
                dist: dist(&[[0.2, 0.3], [0.4, 0.3], [0.2, 0.8], [0.4, 0.8]], None),
            },
        ],
    };
    let mut c = base(horizon, seed, adversary, vec![agent]);
    c.subsequences = vec![
        SubsequenceDef::Interval {
            start: 1,
            end: (horizon * 61 / 100).max(1),
        },
        SubsequenceDef::Interval {
            start: (horizon * 37 / 100).max(1),
            end: horizon,
        },
        SubsequenceDef::Periodic { period: 3, offset: 0 },
    ];
    c
}

/// Index of the masked action in [`masking`].
pub const MASKED_ACTION: usize = 0;

/// Attributed elimination against the masking preset: every round is in
/// subsequence 0 and even rounds also in subsequence 1. Action 0 violates
/// by +1 on even rounds and is slack by −1 on odd rounds.
pub fn masking(horizon: usize, seed: u64) -> RunConfig {
    let agent = AgentConfig {
        id: "masked".into(),
        mode: Mode::Expectation,
        utility: utility(&[[0.0, 0.2], [0.2, 0.0], [0.1, 0.1]], &[0.7, 0.4, 0.3]),
        constraints: vec![threshold(0, &[0.5, 1.0, 1.0], 1.0, -1.0)],
    };
    let adversary = AdversaryConfig::Masking {
        period: 2,
        hot: None,
        cold: None,
    };
    let mut c = base(horizon, seed, adversary, vec![agent]);
    c.subsequences = vec![SubsequenceDef::All, SubsequenceDef::Periodic { period: 2, offset: 0 }];
    c
}

fn downstream_agents(mode: Mode) -> Vec<AgentConfig> {
    vec![
        AgentConfig {
            id: "left".into(),
            mode,
            utility: utility(&[[0.5, 0.0], [0.0, 0.5], [0.25, 0.25]], &[0.2, 0.2, 0.21]),
            constraints: vec![threshold(1, &[1.0, 0.75, 1.0], 1.0, -1.0)],
        },
        AgentConfig {
            id: "right".into(),
            mode,
            utility: utility(&[[0.6, -0.2], [-0.2, 0.6], [0.2, 0.2]], &[0.3, 0.26, 0.25]),
            constraints: vec![threshold(0, &[0.65, 1.0, 1.0], 1.0, -1.0)],
        },
    ]
}

fn boundary_adversary() -> AdversaryConfig {
    AdversaryConfig::BenignIid {
        dist: Some(dist(
            &[[0.1, 0.3], [0.45, 0.8], [0.7, 0.4], [0.35, 0.55], [0.9, 0.1]],
            Some(&[0.25, 0.2, 0.2, 0.2, 0.15]),
        )),
    }
}

/// Two regimes of equal length. The first has mean `(0.62, 0.35)`, the
/// second `(0.3, 0.6)`; each mean lies in a grid cell whose corners share
/// both agents' best responses, and the agents' actions differ between the
/// regimes.
fn regime_adversary(horizon: usize) -> AdversaryConfig {
    AdversaryConfig::Phased {
        phases: vec![
            PhaseConfig {
                until: horizon / 2,
                dist: dist(&[[0.5, 0.2], [0.8, 0.5], [0.55, 0.35], [0.7, 0.3], [0.55, 0.4]], None),
            },
            PhaseConfig {
                until: horizon.max(horizon / 2 + 1),
                dist: dist(&[[0.1, 0.8], [0.4, 0.45], [0.3, 0.6], [0.45, 0.55], [0.25, 0.6]], None),
            },
        ],
    }
}

/// Two agents with three actions each under realized elimination, facing a
/// two-regime adversary. Each agent has one action that the support
/// violates, so two survive.
pub fn downstream_realized(horizon: usize, seed: u64) -> RunConfig {
    base(horizon, seed, regime_adversary(horizon), downstream_agents(Mode::Realization))
}

/// The agents of [`downstream_realized`] under threshold elimination, with
/// events keyed on their expectation candidate sets.
pub fn downstream_expectation(horizon: usize, seed: u64) -> RunConfig {
    base(horizon, seed, regime_adversary(horizon), downstream_agents(Mode::Expectation))
}

/// The agents of [`downstream_realized`] against an iid adversary whose mean
/// `(0.46, 0.44)` lies within 0.02 of both agents' decision boundaries,
/// closer than the grid spacing. No mixture of grid points inside one
/// best-response region averages to the mean, so the achieved bias carries
/// a term linear in `T` that shrinks as the grid is refined.
pub fn downstream_boundary(horizon: usize, seed: u64) -> RunConfig {
    base(horizon, seed, boundary_adversary(), downstream_agents(Mode::Realization))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_scenarios_validate() {
        for source in [PredictionSource::Forecaster, PredictionSource::Uniform, PredictionSource::Flipped] {
            realized_elimination(100, 0, source).validate().unwrap();
        }
        expectation_elimination(100, 0).validate().unwrap();
        subsequence_realized(100, 0).validate().unwrap();
        masking(100, 0).validate().unwrap();
        downstream_realized(100, 0).validate().unwrap();
        downstream_expectation(100, 0).validate().unwrap();
        downstream_boundary(100, 0).validate().unwrap();
    }

    #[test]
    fn scenarios_survive_toml() {
        let c = subsequence_realized(64, 3);
        assert_eq!(RunConfig::from_toml(&c.to_toml().unwrap()).unwrap(), c);
        let c = realized_elimination(64, 3, PredictionSource::Flipped);
        assert_eq!(RunConfig::from_toml(&c.to_toml().unwrap()).unwrap(), c);
    }
}
