use omnipred::agents::{replay, LedgerParams};
use omnipred::harness::verify::{Suite, Verifier};
use omnipred::harness::{
    loglog_slope, max_ccv, run_simulation, run_sweep, scenarios, FaultConfig, PredictionSource, SweepAxis,
};

fn params(config: &omnipred::harness::RunConfig, n_agents: usize) -> LedgerParams {
    LedgerParams {
        horizon: config.horizon,
        num_agents: n_agents,
        delta: config.delta,
        subsequence_lens: config.subsequence_lens(),
        tau_override: config.tau,
        skip_realized_elimination: false,
    }
}

#[test]
fn transcript_replays_every_ledger() {
    for config in [
        scenarios::realized_elimination(200, 7, PredictionSource::Forecaster),
        scenarios::expectation_elimination(200, 7),
        scenarios::subsequence_realized(200, 7),
        scenarios::masking(200, 7),
        scenarios::downstream_realized(200, 7),
    ] {
        let out = run_simulation(&config).unwrap();
        let specs = config.agent_specs().unwrap();
        let p = params(&config, specs.len());
        for (i, spec) in specs.into_iter().enumerate() {
            let agent = replay(spec, &p, i, &out.transcript).unwrap();
            let reported = &out.report.body.agents[i].final_candidate_sets;
            assert_eq!(&agent.ledger.candidate_sets(), reported, "agent {i}");
        }
    }
}

#[test]
fn reported_ccv_matches_plain_recount() {
    let config = scenarios::realized_elimination(300, 3, PredictionSource::Uniform);
    let out = run_simulation(&config).unwrap();
    let spec = &config.agent_specs().unwrap()[0];
    let mut sums = vec![0.0; spec.constraints.len()];
    for r in &out.transcript.records {
        if let Some(a) = r.agents[0].action {
            for (j, s) in sums.iter_mut().enumerate() {
                *s += spec.constraints.eval(j, a, r.outcome.coords()).unwrap();
            }
        }
    }
    let expected = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let reported = out.report.body.agents[0].scopes[0].ccv;
    assert!((expected - reported).abs() < 1e-9, "{expected} vs {reported}");
}

#[test]
fn same_seed_gives_identical_report_body() {
    let config = scenarios::downstream_expectation(256, 11);
    let a = run_simulation(&config).unwrap().report.body.to_json().unwrap();
    let b = run_simulation(&config).unwrap().report.body.to_json().unwrap();
    assert_eq!(a, b);
    let mut other = config.clone();
    other.seed = 12;
    let c = run_simulation(&other).unwrap().report.body.to_json().unwrap();
    assert_ne!(a, c);
}

#[test]
fn sweep_members_and_aggregates_agree() {
    let template = scenarios::downstream_realized(128, 0);
    let axis = SweepAxis::parse("horizon=128,256").unwrap();
    let out = run_sweep(&template, &axis, &[0, 1]).unwrap();
    assert_eq!(out.members.len(), 4);
    for row in &out.aggregate {
        let bodies: Vec<_> = out
            .members
            .iter()
            .filter(|m| m.axis_value == row.axis_value)
            .filter_map(|m| m.report())
            .collect();
        assert_eq!(bodies.len(), 2);
        assert_eq!(row.runs, 2);
        assert_eq!(row.failures, 0);
        let ccv = bodies.iter().map(|b| max_ccv(b)).fold(f64::NEG_INFINITY, f64::max);
        let bias = bodies.iter().map(|b| b.max_bias()).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(row.max_ccv, ccv);
        assert_eq!(row.max_bias, bias);
        assert_eq!(bodies[0].horizon.to_string(), row.axis_value);
    }
    let xs: Vec<f64> = out.aggregate.iter().map(|r| r.x.unwrap()).collect();
    let ys: Vec<f64> = out.aggregate.iter().map(|r| r.mean_max_bias.max(1.0)).collect();
    assert_eq!(out.bias_slope, loglog_slope(&xs, &ys));
}

#[test]
fn sweep_rejects_unknown_path() {
    let template = scenarios::masking(64, 0);
    let axis = SweepAxis::parse("no_such_key=1,2").unwrap();
    assert!(run_sweep(&template, &axis, &[0]).is_err());
}

fn small_plan() -> omnipred::harness::verify::SuitePlan {
    let mut plan = Suite::Fast.plan();
    plan.realized_seeds = 2;
    plan.realized_horizon = 1000;
    plan.shape_seeds = 2;
    plan
}

#[test]
fn skipping_realized_elimination_is_caught() {
    let faults = FaultConfig {
        skip_realized_elimination: true,
        ..FaultConfig::default()
    };
    let v = Verifier::with_plan(small_plan()).with_faults(faults);
    let p1 = v.p1();
    let p3 = v.p3();
    println!("{p1}\n{p3}");
    assert!(!p1.passed);
    assert!(!p3.passed);
}

#[test]
fn flipped_expert_sign_is_caught() {
    let faults = FaultConfig {
        flip_expert_sign: true,
        ..FaultConfig::default()
    };
    let v = Verifier::with_plan(small_plan()).with_faults(faults);
    let p7 = v.p7();
    println!("{p7}");
    assert!(!p7.passed);
}

#[test]
fn finer_grid_shrinks_bias_near_decision_boundaries() {
    let template = scenarios::downstream_boundary(4096, 0);
    let axis = SweepAxis::parse("grid.points_per_coord=9,33").unwrap();
    let out = run_sweep(&template, &axis, &[0, 1, 2]).unwrap();
    let coarse = out.aggregate[0].mean_max_bias;
    let fine = out.aggregate[1].mean_max_bias;
    println!("mean max bias: m=9 {coarse:.2}, m=33 {fine:.2}");
    assert!(fine < coarse);
}
