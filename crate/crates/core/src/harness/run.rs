use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{PredictionSource, RunConfig};
use super::report::{
    AgentReport, BoundRow, EventReport, Flag, ReportBody, ReportHeader, RoundDiagnostic, RunReport,
    ScopeMetrics, SolverSummary, SCHEMA_VERSION,
};
use crate::agents::{Agent, Algorithm, CandidateLedger, Decision, LedgerParams};
use crate::domain::{ActionSet, AgentSpec, Mode, Outcome, OutcomeDistribution, RoundRecord, SubsequenceSet, Transcript};
use crate::env::{active_subsequences, SubsequenceDef};
use crate::forecast::{
    conditional_bias, register_events, AgentView, EventBias, EventIndex, Forecaster, PredictionGrid, RoundView,
};
use crate::metrics::{
    bias_bound, ccv, compute_benchmarks, external_regret, swap_regret, swap_regret_bound, BenchmarkSets,
    BoundParams, CcvVariant, Regret, Scope,
};
use crate::{Error, Result};

/// Stream identifiers of the run's generator.
pub mod streams {
    pub const ADVERSARY: u64 = 1;
    pub const FORECASTER: u64 = 2;
    pub const UNIFORM_PREDICTIONS: u64 = 3;
    pub const OUTCOMES: u64 = 4;
}

/// One independent stream of the run's seeded generator.
pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Slack on bounds whose measured side is a floating-point sum.
const FLOAT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub transcript: Transcript,
}

/// Executes the configured rounds and evaluates every metric and bound.
pub fn run_simulation(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let specs = config.agent_specs()?;
    let defs = &config.subsequences;
    let params = LedgerParams {
        horizon: config.horizon,
        num_agents: specs.len(),
        delta: config.delta,
        subsequence_lens: config.subsequence_lens(),
        tau_override: config.tau,
        skip_realized_elimination: config.faults.skip_realized_elimination,
    };
    let mut agents = specs
        .iter()
        .cloned()
        .map(|s| Agent::new(s, &params))
        .collect::<Result<Vec<_>>>()?;
    let mut adversary = config.adversary.build(config.dim, config.horizon, None)?;
    let events = register_events(&specs, (!defs.is_empty()).then_some(defs.len()));
    let mut forecaster = match config.prediction_source {
        PredictionSource::Forecaster => {
            let grid = PredictionGrid::new(config.grid.clone(), config.dim)?;
            let f = Forecaster::new(grid, events.clone(), config.horizon, config.solver_config(), config.eta)?;
            Some(if config.faults.flip_expert_sign { f.with_flipped_sign() } else { f })
        }
        _ => None,
    };

    let mut adversary_rng = stream(config.seed, streams::ADVERSARY);
    let mut forecaster_rng = stream(config.seed, streams::FORECASTER);
    let mut uniform_rng = stream(config.seed, streams::UNIFORM_PREDICTIONS);
    let mut outcome_rng = stream(config.seed, streams::OUTCOMES);

    let mut transcript = Transcript::new(config.seed, config.digest());
    let mut solver = SolverSummary::default();
    let mut support_total = 0usize;
    let mut diagnostics = config.diagnostics.then(Vec::new);
    let max_feature = max_feature_coord(defs);

    for t in 1..=config.horizon {
        // (1) the adversary commits to the context and the outcome distribution.
        let setup = adversary.next_round(t, &transcript, &mut adversary_rng)?;
        if let Some(c) = max_feature {
            if c >= setup.context.len() {
                return Err(Error::Protocol(format!(
                    "round {t}: context has {} coordinates but a subsequence reads coordinate {c}",
                    setup.context.len()
                )));
            }
        }
        let active = if defs.is_empty() {
            SubsequenceSet::empty()
        } else {
            active_subsequences(defs, t, &setup.context)?
        };

        // (2) the forecaster solves the round's game and samples a prediction.
        let (plan, prediction, forecast) = match (&forecaster, config.prediction_source) {
            (Some(f), _) => {
                let view = RoundView {
                    agents: agents
                        .iter()
                        .map(|a| {
                            Ok(AgentView {
                                utility: &a.spec.utility,
                                feasible: match a.exhausted_at() {
                                    Some(_) => None,
                                    None => Some(a.ledger.feasible(active)?),
                                },
                            })
                        })
                        .collect::<Result<Vec<_>>>()?,
                    active,
                };
                let plan = f.plan(&view)?;
                let k = plan.sample(&mut forecaster_rng);
                let forecast = plan.distribution(f.grid())?;
                (Some(plan), f.prediction(k).clone(), forecast)
            }
            (None, PredictionSource::Uniform) => {
                let p = Outcome::new((0..config.dim).map(|_| uniform_rng.random::<f64>()).collect())?;
                (None, p.clone(), OutcomeDistribution::point_mass(p))
            }
            (None, _) => {
                let mean = setup.handle.distribution().mean();
                let p = Outcome::new(mean.iter().map(|m| (1.0 - m).clamp(0.0, 1.0)).collect())?;
                (None, p.clone(), OutcomeDistribution::point_mass(p))
            }
        };
        if let Some(plan) = &plan {
            let s = &plan.solution;
            solver.rounds_solved += 1;
            solver.max_gap = solver.max_gap.max(s.gap);
            solver.total_iterations += s.iterations;
            support_total += plan.support.len();
            if let Some(diag) = diagnostics.as_mut() {
                diag.push(RoundDiagnostic {
                    round: t,
                    gap: s.gap,
                    value: s.upper,
                    support: plan.support.len(),
                    iterations: s.iterations,
                    weight_entropy: plan.weights_entropy,
                });
            }
        }

        // (3) agents best respond within their current sets.
        let mut decisions: Vec<Option<Decision>> = Vec::with_capacity(agents.len());
        let mut entries = Vec::with_capacity(agents.len());
        for agent in &mut agents {
            let decision = match agent.decide(prediction.coords(), active, t) {
                Ok(d) => Some(d),
                Err(Error::FeasibilityExhausted { .. }) => None,
                Err(e) => return Err(e),
            };
            entries.push(agent.round_entry(decision, active)?);
            decisions.push(decision);
        }

        // (4) the outcome is revealed; ledgers and experts update.
        let outcome = setup.handle.sample(&mut outcome_rng).clone();
        for (agent, decision) in agents.iter_mut().zip(&decisions) {
            if let Some(d) = decision {
                agent.observe(*d, outcome.coords(), active)?;
            }
        }
        if let (Some(f), Some(plan)) = (forecaster.as_mut(), &plan) {
            f.record(plan, outcome.coords());
        }

        transcript.push(RoundRecord {
            round: t,
            context: setup.context,
            active,
            forecast,
            prediction,
            outcome,
            expectation_supported: setup.handle.supports_expectation(),
            outcome_distribution: setup.handle.distribution().clone(),
            agents: entries,
        })?;
    }
    transcript.check_complete(config.horizon)?;
    if solver.rounds_solved > 0 {
        solver.mean_support = support_total as f64 / solver.rounds_solved as f64;
    }

    let body = evaluate(config, &specs, &agents, &events, &transcript, solver, diagnostics)?;
    Ok(RunOutput {
        report: RunReport {
            header: ReportHeader::now(),
            body,
        },
        transcript,
    })
}

fn max_feature_coord(defs: &[SubsequenceDef]) -> Option<usize> {
    defs.iter()
        .filter_map(|d| match d {
            SubsequenceDef::FeatureThreshold { coord, .. } => Some(*coord),
            _ => None,
        })
        .max()
}

/// Computes the report body from the finished transcript and ledgers.
fn evaluate(
    config: &RunConfig,
    specs: &[AgentSpec],
    agents: &[Agent],
    events: &EventIndex,
    transcript: &Transcript,
    solver: SolverSummary,
    diagnostics: Option<Vec<RoundDiagnostic>>,
) -> Result<ReportBody> {
    let num_subsequences = config.subsequences.len();
    let scopes = Scope::all(num_subsequences);
    let with_expectation = transcript.records.iter().all(|r| r.expectation_supported);
    let biases = conditional_bias(transcript, specs, events)?;
    let forecasting = config.prediction_source == PredictionSource::Forecaster;

    let mut flags = Vec::new();
    let mut bounds = Vec::new();
    let mut reports = Vec::with_capacity(agents.len());
    for (index, agent) in agents.iter().enumerate() {
        let spec = &agent.spec;
        let benchmarks = compute_benchmarks(transcript, spec, &scopes, with_expectation)?;
        if let Some(round) = agent.exhausted_at() {
            flags.push(Flag::FeasibilityExhausted {
                agent: spec.id.clone(),
                round,
            });
        }
        if spec.mode == Mode::Expectation && !with_expectation {
            flags.push(Flag::ExpectationUnsupported { agent: spec.id.clone() });
        }
        let mut metrics = Vec::with_capacity(scopes.len());
        for &scope in &scopes {
            let m = scope_metrics(transcript, agent, index, scope, &benchmarks)?;
            let benchmark = mode_benchmark(spec.mode, &benchmarks, scope);
            if benchmark.is_some_and(ActionSet::is_empty) {
                flags.push(Flag::BenchmarkEmpty {
                    agent: spec.id.clone(),
                    scope,
                });
            }
            if m.benchmark_preserved == Some(false) {
                flags.push(Flag::BenchmarkEliminated {
                    agent: spec.id.clone(),
                    scope,
                });
            }
            metrics.push(m);
        }
        agent_bounds(config, agent, &metrics, &biases, forecasting, &mut bounds)?;
        reports.push(AgentReport {
            id: spec.id.clone(),
            algorithm: agent.ledger.algorithm(),
            mode: spec.mode,
            num_actions: spec.num_actions(),
            num_constraints: spec.constraints.len(),
            lipschitz: spec.utility.lipschitz(),
            exhausted_at: agent.exhausted_at(),
            final_candidate_sets: agent.ledger.candidate_sets(),
            scopes: metrics,
            ledger: agent.ledger.clone(),
        });
    }

    let events_report: Vec<EventReport> = biases
        .into_iter()
        .map(|b| EventReport {
            label: b.label,
            bias: b.bias,
            count: b.count,
        })
        .collect();
    let max_bias = events_report.iter().map(|e| e.bias).fold(0.0, f64::max);
    bounds.push(BoundRow::check(
        "bias",
        None,
        None,
        Some(max_bias),
        bias_bound(config.horizon, config.dim, events.len().max(1)),
        FLOAT_SLACK,
        forecasting,
    ));

    Ok(ReportBody {
        schema_version: SCHEMA_VERSION,
        config_digest: config.digest(),
        seed: config.seed,
        horizon: config.horizon,
        dim: config.dim,
        prediction_source: config.prediction_source,
        adversary: config.adversary.name().to_string(),
        num_subsequences,
        agents: reports,
        events: events_report,
        bounds,
        solver,
        flags,
        transcript_path: None,
        diagnostics,
    })
}

fn mode_benchmark(mode: Mode, sets: &BenchmarkSets, scope: Scope) -> Option<ActionSet> {
    match mode {
        Mode::Realization => Some(sets.realized(scope)),
        Mode::Expectation => sets.expectation(scope),
    }
}

/// Which candidate-set slot tracks a scope, if any.
fn tracked_slot(algorithm: Algorithm, scope: Scope) -> Option<usize> {
    match (algorithm, scope) {
        (Algorithm::Realization | Algorithm::Expectation, Scope::Full) => Some(0),
        (Algorithm::SubsequenceRealization | Algorithm::SubsequenceExpectation, Scope::Subsequence(i)) => Some(i),
        _ => None,
    }
}

fn scope_metrics(
    transcript: &Transcript,
    agent: &Agent,
    index: usize,
    scope: Scope,
    benchmarks: &BenchmarkSets,
) -> Result<ScopeMetrics> {
    let spec = &agent.spec;
    let rounds: Vec<&RoundRecord> = transcript.records.iter().filter(|r| scope.contains(r)).collect();
    let plays = rounds.iter().filter(|r| r.agents[index].action.is_some()).count();
    let benchmark = mode_benchmark(spec.mode, benchmarks, scope);
    let (external, swap) = match benchmark {
        Some(b) => (
            external_regret(transcript, spec, index, b, scope),
            swap_regret(transcript, spec, index, b, scope),
        ),
        None => (Regret::Undefined, Regret::Undefined),
    };
    let preserved = match (tracked_slot(agent.ledger.algorithm(), scope), benchmark) {
        (Some(slot), Some(b)) => {
            let kept_each_round = rounds
                .iter()
                .all(|r| r.agents[index].candidate_sets.get(slot).is_some_and(|c| b.is_subset(*c)));
            let kept_at_end = agent.ledger.candidate_sets().get(slot).is_some_and(|c| b.is_subset(*c));
            Some(kept_each_round && kept_at_end)
        }
        _ => None,
    };
    let finite = |v: f64| if v.is_finite() { v } else { 0.0 };
    Ok(ScopeMetrics {
        scope,
        rounds: rounds.len(),
        plays,
        realized_benchmark: benchmarks.realized(scope),
        expectation_benchmark: benchmarks.expectation(scope),
        ccv: finite(ccv(transcript, spec, index, scope, CcvVariant::Signed)?),
        ccv_positive: finite(ccv(transcript, spec, index, scope, CcvVariant::Positive)?),
        external_regret: external,
        swap_regret: swap,
        benchmark_preserved: preserved,
    })
}

/// `Σ_a ‖bias‖_∞` over the agent's whole-horizon action events.
fn action_bias_total(id: &str, biases: &[EventBias]) -> f64 {
    biases
        .iter()
        .filter(|b| b.label.agent == id && b.label.subsequence.is_none())
        .map(|b| b.bias)
        .sum()
}

fn agent_bounds(
    config: &RunConfig,
    agent: &Agent,
    metrics: &[ScopeMetrics],
    biases: &[EventBias],
    forecasting: bool,
    rows: &mut Vec<BoundRow>,
) -> Result<()> {
    let spec = &agent.spec;
    let id = Some(spec.id.as_str());
    let n = spec.num_actions() as f64;
    let full = &metrics[0];
    let params = BoundParams {
        horizon: config.horizon,
        dim: config.dim,
        num_actions: spec.num_actions(),
        num_agents: config.agents.len(),
        num_constraints: spec.constraints.len(),
        delta: config.delta,
        subsequence_lens: config.subsequence_lens(),
        lipschitz: spec.utility.lipschitz(),
        num_events: biases.len().max(1),
    };
    match &agent.ledger {
        CandidateLedger::Realization(_) => {
            rows.push(BoundRow::check("ccv-realized", id, Some(Scope::Full), Some(full.ccv), n, 0.0, true));
            let refined = n - full.realized_benchmark.len() as f64;
            rows.push(BoundRow::check(
                "ccv-positive-realized",
                id,
                Some(Scope::Full),
                Some(full.ccv_positive),
                refined,
                0.0,
                true,
            ));
        }
        CandidateLedger::Expectation(l) => {
            rows.push(BoundRow::check(
                "ccv-expectation",
                id,
                Some(Scope::Full),
                Some(full.ccv),
                n * l.tau() + n,
                0.0,
                true,
            ));
        }
        CandidateLedger::SubsequenceRealization(l) => {
            let bound = n * l.sets().len() as f64;
            for m in &metrics[1..] {
                rows.push(BoundRow::check("ccv-subsequence-realized", id, Some(m.scope), Some(m.ccv), bound, 0.0, true));
            }
        }
        CandidateLedger::SubsequenceExpectation(l) => {
            let bound = l.taus().iter().map(|tau| n * tau).sum::<f64>() + n * l.taus().len() as f64;
            for m in &metrics[1..] {
                rows.push(BoundRow::check("ccv-subsequence-expectation", id, Some(m.scope), Some(m.ccv), bound, 0.0, true));
            }
        }
    }
    rows.push(BoundRow::check(
        "swap-regret",
        id,
        Some(Scope::Full),
        full.swap_regret.value(),
        swap_regret_bound(&params),
        FLOAT_SLACK,
        forecasting,
    ));
    // With the benchmark kept in every candidate set, each swap is a
    // prediction-time loss, so the regret is at most the utility's reaction to
    // the per-action bias.
    if matches!(agent.ledger.algorithm(), Algorithm::Realization | Algorithm::Expectation) {
        let bound = 2.0 * spec.utility.lipschitz() * action_bias_total(&spec.id, biases);
        rows.push(BoundRow::check(
            "swap-regret-calibration",
            id,
            Some(Scope::Full),
            full.swap_regret.value(),
            bound,
            FLOAT_SLACK,
            full.benchmark_preserved == Some(true),
        ));
    }
    Ok(())
}
