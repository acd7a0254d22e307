//! Acceptance checks P1 to P12 over the built-in scenarios.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{FaultConfig, PredictionSource, RunConfig};
use super::report::ReportBody;
use super::run::run_simulation;
use super::scenarios;
use super::sweep::loglog_slope;
use crate::agents::SubsequenceExpectationLedger;
use crate::domain::{
    ActionSet, AgentRound, AgentSpec, Constraint, ConstraintFamily, LinearUtility, Mode, Outcome,
    OutcomeDistribution, RoundRecord, SubsequenceSet, Transcript,
};
use crate::forecast::{mesh_minmax, solve_minmax, GameCoefficients, SolverConfig};
use crate::metrics::{
    bias_bound, ccv_expectation_bound, ccv_subsequence_expectation_bound, swap_regret, swap_regret_bound,
    swap_regret_brute_force, BoundParams, Scope,
};
use crate::{Error, Result};

/// Largest accepted log-log growth exponent of bias and swap regret.
pub const MAX_SLOPE: f64 = 0.75;

/// Largest accepted per-round duality gap.
pub const GAP_TOLERANCE: f64 = 1e-3;

/// Largest accepted distance between the solver's value and the mesh value.
pub const MESH_TOLERANCE: f64 = 2e-3;

const MESH_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Reduced seeds and horizons, for quick checks.
    Fast,
    /// The stated sizes.
    Full,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Suite::Fast),
            "full" => Ok(Suite::Full),
            other => Err(Error::Config(format!("unknown suite `{other}` (expected fast or full)"))),
        }
    }
}

/// Run counts and horizons of a suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuitePlan {
    pub realized_seeds: u64,
    pub realized_horizon: usize,
    pub expectation_seeds: u64,
    pub expectation_horizon: usize,
    pub subsequence_seeds: u64,
    pub subsequence_horizon: usize,
    pub masking_seeds: u64,
    pub masking_horizon: usize,
    pub shape_seeds: u64,
    pub shape_horizons: Vec<usize>,
    pub oracle_instances: usize,
    pub mesh_instances: usize,
}

impl Suite {
    pub fn plan(self) -> SuitePlan {
        match self {
            Suite::Full => SuitePlan {
                realized_seeds: 50,
                realized_horizon: 10_000,
                expectation_seeds: 200,
                expectation_horizon: 4096,
                subsequence_seeds: 50,
                subsequence_horizon: 8192,
                masking_seeds: 20,
                masking_horizon: 4096,
                shape_seeds: 10,
                shape_horizons: vec![512, 1024, 2048, 4096, 8192],
                oracle_instances: 200,
                mesh_instances: 50,
            },
            Suite::Fast => SuitePlan {
                realized_seeds: 5,
                realized_horizon: 2000,
                expectation_seeds: 20,
                expectation_horizon: 2048,
                subsequence_seeds: 5,
                subsequence_horizon: 2048,
                masking_seeds: 4,
                masking_horizon: 2048,
                shape_seeds: 3,
                shape_horizons: vec![256, 512, 1024, 2048],
                oracle_instances: 200,
                mesh_instances: 20,
            },
        }
    }
}

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{:<4} {verdict}  {}: {}", self.id, self.title, self.detail)
    }
}

/// A finished run of a scenario.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub config: RunConfig,
    pub outcome: std::result::Result<ReportBody, String>,
}

fn run_all(configs: Vec<RunConfig>) -> Vec<ScenarioRun> {
    configs
        .into_par_iter()
        .map(|config| {
            let outcome = run_simulation(&config)
                .map(|o| o.report.body)
                .map_err(|e| e.to_string());
            ScenarioRun { config, outcome }
        })
        .collect()
}

/// Splits runs into report bodies and a description of the first failure.
fn bodies(runs: &[ScenarioRun]) -> std::result::Result<Vec<&ReportBody>, String> {
    runs.iter()
        .map(|r| {
            r.outcome
                .as_ref()
                .map_err(|e| format!("seed {} failed: {e}", r.config.seed))
        })
        .collect()
}

/// Runs scenarios on demand and caches them, so criteria that share runs
/// (P1 to P3, P7 and P8) simulate once.
pub struct Verifier {
    plan: SuitePlan,
    faults: FaultConfig,
    realized: OnceLock<Vec<ScenarioRun>>,
    expectation: OnceLock<Vec<ScenarioRun>>,
    subsequence: OnceLock<Vec<ScenarioRun>>,
    masking: OnceLock<Vec<ScenarioRun>>,
    shape: OnceLock<Vec<ScenarioRun>>,
    shape_expectation: OnceLock<Vec<ScenarioRun>>,
}

impl Verifier {
    pub fn new(suite: Suite) -> Self {
        Self::with_plan(suite.plan())
    }

    pub fn with_plan(plan: SuitePlan) -> Self {
        Self {
            plan,
            faults: FaultConfig::default(),
            realized: OnceLock::new(),
            expectation: OnceLock::new(),
            subsequence: OnceLock::new(),
            masking: OnceLock::new(),
            shape: OnceLock::new(),
            shape_expectation: OnceLock::new(),
        }
    }

    /// Injects defects into every scenario run.
    pub fn with_faults(mut self, faults: FaultConfig) -> Self {
        self.faults = faults;
        self
    }

    pub fn plan(&self) -> &SuitePlan {
        &self.plan
    }

    fn prepare(&self, mut configs: Vec<RunConfig>) -> Vec<RunConfig> {
        for c in &mut configs {
            c.faults = self.faults;
        }
        configs
    }

    pub fn realized_runs(&self) -> &[ScenarioRun] {
        self.realized.get_or_init(|| {
            let p = &self.plan;
            let mut configs = Vec::new();
            for source in [PredictionSource::Forecaster, PredictionSource::Uniform, PredictionSource::Flipped] {
                for seed in 0..p.realized_seeds {
                    configs.push(scenarios::realized_elimination(p.realized_horizon, seed, source));
                }
            }
            run_all(self.prepare(configs))
        })
    }

    pub fn expectation_runs(&self) -> &[ScenarioRun] {
        self.expectation.get_or_init(|| {
            let p = &self.plan;
            let configs = (0..p.expectation_seeds)
                .map(|seed| scenarios::expectation_elimination(p.expectation_horizon, seed))
                .collect();
            run_all(self.prepare(configs))
        })
    }

    pub fn subsequence_runs(&self) -> &[ScenarioRun] {
        self.subsequence.get_or_init(|| {
            let p = &self.plan;
            let configs = (0..p.subsequence_seeds)
                .map(|seed| scenarios::subsequence_realized(p.subsequence_horizon, seed))
                .collect();
            run_all(self.prepare(configs))
        })
    }

    pub fn masking_runs(&self) -> &[ScenarioRun] {
        self.masking.get_or_init(|| {
            let p = &self.plan;
            let configs = (0..p.masking_seeds)
                .map(|seed| scenarios::masking(p.masking_horizon, seed))
                .collect();
            run_all(self.prepare(configs))
        })
    }

    fn shape_configs(&self, build: fn(usize, u64) -> RunConfig) -> Vec<RunConfig> {
        let p = &self.plan;
        let mut configs = Vec::new();
        for &t in &p.shape_horizons {
            for seed in 0..p.shape_seeds {
                configs.push(build(t, seed));
            }
        }
        self.prepare(configs)
    }

    pub fn shape_runs(&self) -> &[ScenarioRun] {
        self.shape
            .get_or_init(|| run_all(self.shape_configs(scenarios::downstream_realized)))
    }

    pub fn shape_expectation_runs(&self) -> &[ScenarioRun] {
        self.shape_expectation
            .get_or_init(|| run_all(self.shape_configs(scenarios::downstream_expectation)))
    }

    /// Every criterion in order.
    pub fn all(&self) -> Vec<CriterionResult> {
        vec![
            self.p1(),
            self.p2(),
            self.p3(),
            self.p4(),
            self.p5(),
            self.p6(),
            self.p7(),
            self.p8(),
            self.p9(),
            self.p10(),
            self.p11(),
            self.p12(),
        ]
    }

    pub fn criterion(&self, id: &str) -> Option<CriterionResult> {
        Some(match id.to_ascii_uppercase().as_str() {
            "P1" => self.p1(),
            "P2" => self.p2(),
            "P3" => self.p3(),
            "P4" => self.p4(),
            "P5" => self.p5(),
            "P6" => self.p6(),
            "P7" => self.p7(),
            "P8" => self.p8(),
            "P9" => self.p9(),
            "P10" => self.p10(),
            "P11" => self.p11(),
            "P12" => self.p12(),
            _ => return None,
        })
    }

    pub fn p1(&self) -> CriterionResult {
        let title = "realized elimination CCV <= |A|";
        let result = bodies(self.realized_runs()).map(|bs| {
            let mut worst = f64::NEG_INFINITY;
            let mut failures = 0;
            for b in &bs {
                let a = &b.agents[0];
                let m = &a.scopes[0];
                worst = worst.max(m.ccv);
                if m.ccv > a.num_actions as f64 {
                    failures += 1;
                }
            }
            (failures == 0, format!("{} runs, max CCV {worst:.4} (bound 8), {failures} over", bs.len()))
        });
        finish("P1", title, result)
    }

    pub fn p2(&self) -> CriterionResult {
        let title = "positive CCV <= |A| - |A^c|";
        let result = bodies(self.realized_runs()).map(|bs| {
            let mut failures = 0;
            let mut min_margin = f64::INFINITY;
            for b in &bs {
                let a = &b.agents[0];
                let m = &a.scopes[0];
                let bound = (a.num_actions - m.realized_benchmark.len()) as f64;
                min_margin = min_margin.min(bound - m.ccv_positive);
                if m.ccv_positive > bound {
                    failures += 1;
                }
            }
            (failures == 0, format!("{} runs, smallest margin {min_margin:.4}, {failures} over", bs.len()))
        });
        finish("P2", title, result)
    }

    pub fn p3(&self) -> CriterionResult {
        let title = "realized benchmark kept in every candidate set";
        let result = bodies(self.realized_runs()).map(|bs| {
            let mut lost = 0;
            let mut loose = 0;
            for b in &bs {
                let a = &b.agents[0];
                let m = &a.scopes[0];
                if m.benchmark_preserved != Some(true) {
                    lost += 1;
                }
                // Realized elimination removes exactly the observed violators.
                if a.final_candidate_sets.first() != Some(&m.realized_benchmark) {
                    loose += 1;
                }
            }
            (
                lost == 0 && loose == 0,
                format!(
                    "{} runs, {lost} lost a benchmark action, {loose} ended with a set other than A^c",
                    bs.len()
                ),
            )
        });
        finish("P3", title, result)
    }

    pub fn p4(&self) -> CriterionResult {
        let title = "threshold elimination keeps A^E[c] w.h.p. and CCV <= |A| tau + |A|";
        let result = bodies(self.expectation_runs()).and_then(|bs| {
            let known: ActionSet = scenarios::EXPECTATION_BENCHMARK.into_iter().collect();
            let runs = bs.len() as f64;
            let mut eliminated = 0usize;
            let mut over = 0usize;
            let mut worst_ratio = f64::NEG_INFINITY;
            for b in &bs {
                let a = &b.agents[0];
                let m = &a.scopes[0];
                if m.expectation_benchmark != Some(known) {
                    return Err(format!(
                        "seed {}: expectation benchmark {:?} differs from {known:?}",
                        b.seed, m.expectation_benchmark
                    ));
                }
                if m.benchmark_preserved != Some(true) {
                    eliminated += 1;
                }
                let bound = ccv_expectation_bound(&params_for(b, a.num_actions, a.num_constraints))
                    .map_err(|e| e.to_string())?;
                worst_ratio = worst_ratio.max(m.ccv / bound);
                if m.ccv > bound {
                    over += 1;
                }
            }
            let limit = 0.05 + 3.0 * (0.05 * 0.95 / runs).sqrt();
            let fraction = eliminated as f64 / runs;
            Ok((
                fraction <= limit && over == 0,
                format!(
                    "{} runs, eliminated fraction {fraction:.3} (limit {limit:.3}), {over} over the CCV bound, max CCV/bound {worst_ratio:.3}",
                    bs.len()
                ),
            ))
        });
        finish("P4", title, result)
    }

    pub fn p5(&self) -> CriterionResult {
        let title = "per-subsequence realized CCV(S) <= |A||S|";
        let result = bodies(self.subsequence_runs()).map(|bs| {
            let mut over = 0;
            let mut worst = f64::NEG_INFINITY;
            for b in &bs {
                let a = &b.agents[0];
                let bound = (a.num_actions * b.num_subsequences) as f64;
                for m in &a.scopes[1..] {
                    worst = worst.max(m.ccv);
                    if m.ccv > bound {
                        over += 1;
                    }
                }
            }
            (
                over == 0,
                format!("{} runs x 3 subsequences, max CCV(S) {worst:.4} (bound 18), {over} over", bs.len()),
            )
        });
        finish("P5", title, result)
    }

    pub fn p6(&self) -> CriterionResult {
        let title = "attributed elimination under masking";
        let (attributed, crippled) = masking_script_eliminations();
        let result = bodies(self.masking_runs()).and_then(|bs| {
            let mut over = 0;
            let mut worst_ratio = f64::NEG_INFINITY;
            for b in &bs {
                let a = &b.agents[0];
                let config = &self.masking_runs()[0].config;
                let lens = config.subsequence_lens().unwrap_or_default();
                let bound = ccv_subsequence_expectation_bound(&params_for(b, a.num_actions, a.num_constraints), &lens)
                    .map_err(|e| e.to_string())?;
                for m in &a.scopes[1..] {
                    worst_ratio = worst_ratio.max(m.ccv / bound);
                    if m.ccv > bound {
                        over += 1;
                    }
                }
            }
            Ok((
                over == 0 && attributed && !crippled,
                format!(
                    "{} runs, {over} CCV(S) over the bound (max ratio {worst_ratio:.3}); script: attributed ledger {} the masked action, responsible-only double {} it",
                    bs.len(),
                    if attributed { "eliminates" } else { "keeps" },
                    if crippled { "eliminates" } else { "keeps" },
                ),
            ))
        });
        finish("P6", title, result)
    }

    pub fn p7(&self) -> CriterionResult {
        finish("P7", "forecaster bias growth", shape_bias(self.shape_runs()))
    }

    pub fn p8(&self) -> CriterionResult {
        finish("P8", "downstream swap regret growth", shape_swap(self.shape_runs(), Mode::Realization))
    }

    pub fn p9(&self) -> CriterionResult {
        let title = "minmax solver certificate";
        let mut max_gap: f64 = 0.0;
        let mut solved = 0usize;
        let mut failure = None;
        let caches = [
            self.realized_runs(),
            self.expectation_runs(),
            self.subsequence_runs(),
            self.masking_runs(),
            self.shape_runs(),
            self.shape_expectation_runs(),
        ];
        for runs in caches {
            match bodies(runs) {
                Ok(bs) => {
                    for b in bs {
                        max_gap = max_gap.max(b.solver.max_gap);
                        solved += b.solver.rounds_solved;
                    }
                }
                Err(e) => failure = Some(e),
            }
        }
        let (mesh_ok, mesh_dev) = mesh_agreement(self.plan.mesh_instances);
        let result = match failure {
            Some(e) => Err(e),
            None => Ok((
                max_gap <= GAP_TOLERANCE && mesh_ok,
                format!(
                    "{solved} solved rounds, max gap {max_gap:.2e} (limit 1e-3); {} mesh instances, max deviation {mesh_dev:.2e} (limit 2e-3)",
                    self.plan.mesh_instances
                ),
            )),
        };
        finish("P9", title, result)
    }

    pub fn p10(&self) -> CriterionResult {
        let n = self.plan.oracle_instances;
        let mismatches = swap_oracle_mismatches(n, 20_240_601);
        finish(
            "P10",
            "swap regret decomposition equals brute force",
            Ok((mismatches == 0, format!("{n} instances, {mismatches} mismatches"))),
        )
    }

    pub fn p11(&self) -> CriterionResult {
        let title = "reruns reproduce the report body";
        let caches = [
            self.realized_runs(),
            self.expectation_runs(),
            self.subsequence_runs(),
            self.masking_runs(),
            self.shape_runs(),
            self.shape_expectation_runs(),
        ];
        let mut checked = 0;
        let mut differing = Vec::new();
        for runs in caches {
            let Some(first) = runs.first() else { continue };
            let Ok(body) = &first.outcome else { continue };
            checked += 1;
            let again = run_simulation(&first.config).and_then(|o| o.report.body.to_json());
            if body.to_json().ok() != again.ok() {
                differing.push(first.config.adversary.name());
            }
        }
        finish(
            "P11",
            title,
            Ok((
                differing.is_empty() && checked > 0,
                format!("{checked} configurations rerun, {} differ {differing:?}", differing.len()),
            )),
        )
    }

    pub fn p12(&self) -> CriterionResult {
        let runs = self.shape_expectation_runs();
        let bias = shape_bias(runs);
        let swap = shape_swap(runs, Mode::Expectation);
        let result = match (bias, swap) {
            (Ok((b_ok, b)), Ok((s_ok, s))) => Ok((b_ok && s_ok, format!("{b}; {s}"))),
            (Err(e), _) | (_, Err(e)) => Err(e),
        };
        finish("P12", "threshold agents with expectation-keyed events", result)
    }
}

fn finish(id: &'static str, title: &'static str, result: std::result::Result<(bool, String), String>) -> CriterionResult {
    match result {
        Ok((passed, detail)) => CriterionResult {
            id,
            title,
            passed,
            detail,
        },
        Err(detail) => CriterionResult {
            id,
            title,
            passed: false,
            detail,
        },
    }
}

fn params_for(body: &ReportBody, num_actions: usize, num_constraints: usize) -> BoundParams {
    BoundParams {
        horizon: body.horizon,
        dim: body.dim,
        num_actions,
        num_agents: body.agents.len(),
        num_constraints,
        delta: 0.05,
        subsequence_lens: None,
        lipschitz: 0.0,
        num_events: body.events.len().max(1),
    }
}

/// Bias growth: pooled least-squares slope of `ln max(bias, 1)` on `ln T`,
/// and the absolute bound at the largest horizon.
fn shape_bias(runs: &[ScenarioRun]) -> std::result::Result<(bool, String), String> {
    let bs = bodies(runs)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = bs.iter().map(|b| (b.horizon as f64, b.max_bias().max(1.0))).unzip();
    let slope = loglog_slope(&xs, &ys).ok_or("need at least two horizons")?;
    let t_max = bs.iter().map(|b| b.horizon).max().unwrap_or(0);
    let mut worst_ratio = f64::NEG_INFINITY;
    for b in bs.iter().filter(|b| b.horizon == t_max) {
        worst_ratio = worst_ratio.max(b.max_bias() / bias_bound(b.horizon, b.dim, b.events.len().max(1)));
    }
    Ok((
        slope <= MAX_SLOPE && worst_ratio <= 1.0,
        format!("bias slope {slope:.3} (limit 0.75), max bias/bound at T={t_max} {worst_ratio:.3}"),
    ))
}

/// Swap regret growth per agent against the benchmark of `mode`.
fn shape_swap(runs: &[ScenarioRun], mode: Mode) -> std::result::Result<(bool, String), String> {
    let bs = bodies(runs)?;
    let agents = bs.first().map_or(0, |b| b.agents.len());
    let mut ok = true;
    let mut parts = Vec::new();
    for i in 0..agents {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut worst_ratio = f64::NEG_INFINITY;
        for b in &bs {
            let a = &b.agents[i];
            let m = &a.scopes[0];
            let benchmark = match mode {
                Mode::Realization => Some(m.realized_benchmark),
                Mode::Expectation => m.expectation_benchmark,
            };
            if benchmark.is_none_or(ActionSet::is_empty) {
                return Err(format!("seed {} T={}: agent {} has an empty benchmark", b.seed, b.horizon, a.id));
            }
            let r = m
                .swap_regret
                .value()
                .ok_or_else(|| format!("agent {}: swap regret undefined", a.id))?;
            let mut params = params_for(b, a.num_actions, a.num_constraints);
            params.lipschitz = a.lipschitz;
            worst_ratio = worst_ratio.max(r / swap_regret_bound(&params));
            xs.push(b.horizon as f64);
            ys.push(r.max(1.0));
        }
        let slope = loglog_slope(&xs, &ys).ok_or("need at least two horizons")?;
        ok &= slope <= MAX_SLOPE && worst_ratio <= 1.0;
        let id = &bs[0].agents[i].id;
        parts.push(format!("{id}: swap slope {slope:.3}, max swap/bound {worst_ratio:.3}"));
    }
    Ok((ok, parts.join(", ")))
}

/// Per-subsequence threshold elimination that charges each play only to the
/// responsible subsequence's own accumulator, ignoring where else the round
/// falls. A deliberately weaker test double for the masking check.
#[derive(Debug, Clone)]
pub struct ResponsibleOnlyLedger {
    sets: Vec<ActionSet>,
    taus: Vec<f64>,
    num_actions: usize,
    num_constraints: usize,
    sums: Vec<f64>,
}

impl ResponsibleOnlyLedger {
    pub fn new(num_actions: usize, num_constraints: usize, taus: Vec<f64>) -> Self {
        let k = taus.len();
        Self {
            sets: vec![ActionSet::full(num_actions); k],
            sums: vec![0.0; k * num_actions * num_constraints],
            num_actions,
            num_constraints,
            taus,
        }
    }

    pub fn sets(&self) -> &[ActionSet] {
        &self.sets
    }

    pub fn union(&self, active: SubsequenceSet) -> ActionSet {
        active.iter().fold(ActionSet::empty(), |u, i| u.union(self.sets[i]))
    }

    pub fn responsible(&self, a: usize, active: SubsequenceSet) -> Option<usize> {
        active.iter().find(|&i| self.sets[i].contains(a))
    }

    pub fn step(&mut self, a: usize, y: &[f64], c: &ConstraintFamily, resp: usize) -> Result<bool> {
        let mut removed = false;
        for j in 0..self.num_constraints {
            let slot = (resp * self.num_actions + a) * self.num_constraints + j;
            self.sums[slot] += c.eval(j, a, y)?;
            if self.sums[slot] > self.taus[resp] {
                removed |= self.sets[resp].remove(a);
            }
        }
        Ok(removed)
    }
}

/// Forty scripted rounds: subsequence 0 holds every round and subsequence 1
/// the even ones; action 0 is preferred and violates by +1 on even rounds and
/// −1 on odd rounds; both thresholds are 1.5. Returns whether the attributed
/// ledger and the responsible-only double each remove action 0 from every
/// subsequence.
pub fn masking_script_eliminations() -> (bool, bool) {
    let family = ConstraintFamily::new(
        vec![Constraint::Threshold {
            coord: 0,
            thresholds: vec![0.5, 1.0],
            above: 1.0,
            below: -1.0,
        }],
        2,
        1,
    )
    .expect("valid family");
    let taus = vec![1.5, 1.5];
    let mut attributed = SubsequenceExpectationLedger::new(2, 1, taus.clone());
    let mut crippled = ResponsibleOnlyLedger::new(2, 1, taus);
    for t in 1..=40usize {
        let even = t % 2 == 0;
        let active: SubsequenceSet = if even { [0, 1].into_iter().collect() } else { SubsequenceSet::singleton(0) };
        let y = [if even { 1.0 } else { 0.0 }];

        let union = attributed.union(active).expect("active is non-empty");
        let a = if union.contains(0) { 0 } else { 1 };
        let r = attributed.responsible_index(a, active).expect("a is in the union");
        attributed.step(a, &y, &family, active, r).expect("valid play");

        let a = if crippled.union(active).contains(0) { 0 } else { 1 };
        let r = crippled.responsible(a, active).expect("a is in the union");
        crippled.step(a, &y, &family, r).expect("valid play");
    }
    let gone = |sets: &[ActionSet]| sets.iter().all(|s| !s.contains(scenarios::MASKED_ACTION));
    (gone(attributed.sets()), gone(crippled.sets()))
}

/// Solves random one-dimensional games on five points and compares with the
/// mesh enumeration. Returns whether all agree and the largest deviation.
pub fn mesh_agreement(instances: usize) -> (bool, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let points = vec![0.0, 0.25, 0.5, 0.75, 1.0];
    let config = SolverConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let coeffs: Vec<f64> = (0..points.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let game = GameCoefficients::from_parts(1, points.clone(), coeffs).expect("well-formed game");
        let Ok(solution) = solve_minmax(&game, &config) else {
            return (false, f64::INFINITY);
        };
        worst = worst.max((solution.upper - mesh_minmax(&game, MESH_STEPS)).abs());
    }
    (worst <= MESH_TOLERANCE, worst)
}

/// Random instances with `|A| <= 4`, `|B| <= 3`, `T <= 20` on a dyadic
/// lattice; counts disagreements between the decomposition and enumeration.
pub fn swap_oracle_mismatches(instances: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    for _ in 0..instances {
        let n = rng.random_range(1..=4);
        let weights: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..2).map(|_| rng.random_range(-4..=4) as f64 / 16.0).collect())
            .collect();
        let offsets = vec![0.5; n];
        let constraints = ConstraintFamily::new(
            vec![Constraint::Linear {
                weights: vec![vec![0.0, 0.0]; n],
                offsets: vec![-1.0; n],
            }],
            n,
            2,
        )
        .expect("valid family");
        let spec = AgentSpec::new(
            "oracle",
            LinearUtility::new(weights, offsets).expect("utility in range"),
            constraints,
            Mode::Realization,
        )
        .expect("consistent agent");
        let mut transcript = Transcript::new(seed, "");
        for t in 1..=rng.random_range(1..=20) {
            let y = Outcome::new((0..2).map(|_| rng.random_range(0..=8) as f64 / 8.0).collect())
                .expect("lattice point in the cube");
            transcript
                .push(RoundRecord {
                    round: t,
                    context: vec![],
                    active: SubsequenceSet::empty(),
                    forecast: OutcomeDistribution::point_mass(y.clone()),
                    prediction: y.clone(),
                    outcome: y.clone(),
                    outcome_distribution: std::sync::Arc::new(OutcomeDistribution::point_mass(y)),
                    expectation_supported: true,
                    agents: vec![AgentRound {
                        action: Some(rng.random_range(0..n)),
                        feasible: ActionSet::full(n),
                        candidate_sets: vec![ActionSet::full(n)],
                        responsible: None,
                    }],
                })
                .expect("increasing rounds");
        }
        let size = rng.random_range(1..=n.min(3));
        let mut benchmark = ActionSet::empty();
        while benchmark.len() < size {
            benchmark.insert(rng.random_range(0..n));
        }
        if swap_regret(&transcript, &spec, 0, benchmark, Scope::Full)
            != swap_regret_brute_force(&transcript, &spec, 0, benchmark, Scope::Full)
        {
            mismatches += 1;
        }
    }
    mismatches
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert_eq!("fast".parse::<Suite>().unwrap(), Suite::Fast);
        assert_eq!("full".parse::<Suite>().unwrap(), Suite::Full);
        assert!("medium".parse::<Suite>().is_err());
    }

    #[test]
    fn masking_script_separates_the_ledgers() {
        assert_eq!(masking_script_eliminations(), (true, false));
    }

    #[test]
    fn swap_oracle_agrees() {
        assert_eq!(swap_oracle_mismatches(200, 1), 0);
    }

    #[test]
    fn display_line() {
        let r = CriterionResult {
            id: "P1",
            title: "t",
            passed: true,
            detail: "d".into(),
        };
        assert_eq!(r.to_string(), "P1   PASS  t: d");
    }
}
