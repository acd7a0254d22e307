use omnipred::env::SubsequenceDef;
use omnipred::harness::{run_simulation, scenarios, AdversaryConfig, DistributionConfig, PhaseConfig, PredictionSource};
use omnipred::metrics::{compute_benchmarks, Scope};
use proptest::prelude::*;

fn source() -> impl Strategy<Value = PredictionSource> {
    prop_oneof![
        Just(PredictionSource::Forecaster),
        Just(PredictionSource::Uniform),
        Just(PredictionSource::Flipped),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn candidate_sets_only_shrink(seed in 0u64..1000, horizon in 20usize..200, src in source()) {
        for config in [
            scenarios::realized_elimination(horizon, seed, src),
            scenarios::subsequence_realized(horizon, seed),
            scenarios::masking(horizon, seed),
        ] {
            let out = run_simulation(&config).unwrap();
            for pair in out.transcript.records.windows(2) {
                for (before, after) in pair[0].agents.iter().zip(&pair[1].agents) {
                    for (b, a) in before.candidate_sets.iter().zip(&after.candidate_sets) {
                        prop_assert!(a.is_subset(*b), "round {}", pair[1].round);
                    }
                }
            }
        }
    }

    #[test]
    fn subsequence_benchmarks_sit_inside_candidate_sets(seed in 0u64..1000, horizon in 20usize..300) {
        let config = scenarios::subsequence_realized(horizon, seed);
        let out = run_simulation(&config).unwrap();
        let spec = &config.agent_specs().unwrap()[0];
        let scopes: Vec<Scope> = (0..config.subsequences.len()).map(Scope::Subsequence).collect();
        let bench = compute_benchmarks(&out.transcript, spec, &scopes, false).unwrap();
        for r in &out.transcript.records {
            let entry = &r.agents[0];
            for i in r.active.iter() {
                let held = entry.candidate_sets[i];
                prop_assert!(bench.realized(Scope::Subsequence(i)).is_subset(held), "round {} S{i}", r.round);
                prop_assert!(held.is_subset(entry.feasible), "round {} S{i}", r.round);
            }
        }
    }

    #[test]
    fn signed_ccv_and_external_regret_are_dominated(seed in 0u64..1000, horizon in 20usize..200, src in source()) {
        let mut configs = vec![
            scenarios::realized_elimination(horizon, seed, src),
            scenarios::subsequence_realized(horizon, seed),
            scenarios::downstream_realized(horizon, seed),
        ];
        for c in &mut configs {
            c.prediction_source = src;
        }
        for config in configs {
            let body = run_simulation(&config).unwrap().report.body;
            for agent in &body.agents {
                for m in &agent.scopes {
                    prop_assert!(m.ccv <= m.ccv_positive);
                    if let (Some(ext), Some(swap)) = (m.external_regret.value(), m.swap_regret.value()) {
                        prop_assert!(ext <= swap + 1e-9, "{ext} > {swap}");
                    }
                }
            }
        }
    }

    #[test]
    fn larger_scopes_have_smaller_benchmarks(
        seed in 0u64..1000,
        horizon in 30usize..200,
        cut in 0.1f64..0.9,
    ) {
        let mut config = scenarios::subsequence_realized(horizon, seed);
        let end = ((horizon as f64 * cut) as usize).max(2);
        config.subsequences = vec![
            SubsequenceDef::All,
            SubsequenceDef::Interval { start: 1, end },
            SubsequenceDef::Interval { start: 2, end },
            SubsequenceDef::Periodic { period: 2, offset: 0 },
        ];
        let out = run_simulation(&config).unwrap();
        let spec = &config.agent_specs().unwrap()[0];
        let scopes = Scope::all(config.subsequences.len());
        let bench = compute_benchmarks(&out.transcript, spec, &scopes, true).unwrap();
        let all = bench.realized(Scope::Full);
        prop_assert_eq!(all, bench.realized(Scope::Subsequence(0)));
        for (outer, inner) in [(0, 1), (1, 2), (0, 3)] {
            let (o, i) = (Scope::Subsequence(outer), Scope::Subsequence(inner));
            prop_assert!(bench.realized(o).is_subset(bench.realized(i)));
            prop_assert!(bench.expectation(o).unwrap().is_subset(bench.expectation(i).unwrap()));
        }
    }

    #[test]
    fn predictions_ignore_the_law_of_the_current_outcome(seed in 0u64..1000, switch in 5usize..60) {
        let horizon = switch + 10;
        let phase = |support: Vec<Vec<f64>>| DistributionConfig { support, probs: None };
        let make = |late: Vec<Vec<f64>>| {
            let mut c = scenarios::downstream_realized(horizon, seed);
            c.adversary = AdversaryConfig::Phased {
                phases: vec![
                    PhaseConfig { until: switch, dist: phase(vec![vec![0.2, 0.7], vec![0.6, 0.3]]) },
                    PhaseConfig { until: horizon, dist: phase(late) },
                ],
            };
            c
        };
        let a = run_simulation(&make(vec![vec![0.9, 0.9]])).unwrap().transcript;
        let b = run_simulation(&make(vec![vec![0.0, 0.1], vec![0.5, 0.5]])).unwrap().transcript;
        for t in 0..=switch {
            prop_assert_eq!(&a.records[t].forecast, &b.records[t].forecast, "round {}", t + 1);
            prop_assert_eq!(&a.records[t].prediction, &b.records[t].prediction);
        }
        prop_assert_ne!(&a.records[switch].outcome, &b.records[switch].outcome);
    }
}
