use std::io::Write;

use serde::Serialize;

use super::config::PredictionSource;
use crate::agents::{Algorithm, CandidateLedger};
use crate::domain::{ActionSet, Mode};
use crate::forecast::EventLabel;
use crate::metrics::{Regret, Scope};
use crate::Result;

/// Bumped whenever a field of the report body changes meaning or shape.
pub const SCHEMA_VERSION: u32 = 1;

/// A run's report. Only the header varies between reruns of the same config.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub header: ReportHeader,
    pub body: ReportBody,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportHeader {
    /// Seconds since the Unix epoch at report creation.
    pub generated_at: u64,
    pub version: &'static str,
}

impl ReportHeader {
    pub fn now() -> Self {
        Self {
            generated_at: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportBody {
    pub schema_version: u32,
    pub config_digest: String,
    pub seed: u64,
    pub horizon: usize,
    pub dim: usize,
    pub prediction_source: PredictionSource,
    pub adversary: String,
    pub num_subsequences: usize,
    pub agents: Vec<AgentReport>,
    pub events: Vec<EventReport>,
    pub bounds: Vec<BoundRow>,
    pub solver: SolverSummary,
    pub flags: Vec<Flag>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transcript_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Vec<RoundDiagnostic>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AgentReport {
    pub id: String,
    pub algorithm: Algorithm,
    pub mode: Mode,
    pub num_actions: usize,
    pub num_constraints: usize,
    pub lipschitz: f64,
    pub exhausted_at: Option<usize>,
    /// Candidate sets after the last round.
    pub final_candidate_sets: Vec<ActionSet>,
    pub scopes: Vec<ScopeMetrics>,
    /// Final ledger state, for audit.
    pub ledger: CandidateLedger,
}

impl AgentReport {
    pub fn scope(&self, scope: Scope) -> Option<&ScopeMetrics> {
        self.scopes.iter().find(|s| s.scope == scope)
    }
}

/// Metrics of one agent over one round set.
#[derive(Debug, Clone, Serialize)]
pub struct ScopeMetrics {
    pub scope: Scope,
    pub rounds: usize,
    pub plays: usize,
    pub realized_benchmark: ActionSet,
    pub expectation_benchmark: Option<ActionSet>,
    pub ccv: f64,
    pub ccv_positive: f64,
    /// Against the benchmark matching the agent's mode.
    pub external_regret: Regret,
    pub swap_regret: Regret,
    /// Whether the mode's benchmark stayed inside the candidate set on every
    /// round of the scope and at the end. `None` where no candidate set
    /// tracks the scope.
    pub benchmark_preserved: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EventReport {
    #[serde(flatten)]
    pub label: EventLabel,
    pub bias: f64,
    pub count: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The bound does not apply to this run.
    Skipped,
}

/// A measured quantity next to its closed-form bound.
#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agent: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scope: Option<Scope>,
    pub measured: f64,
    pub bound: f64,
    pub verdict: Verdict,
}

impl BoundRow {
    pub(crate) fn check(
        name: &str,
        agent: Option<&str>,
        scope: Option<Scope>,
        measured: Option<f64>,
        bound: f64,
        slack: f64,
        applies: bool,
    ) -> Self {
        let verdict = match measured {
            Some(m) if applies => {
                if m <= bound + slack {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            }
            _ => Verdict::Skipped,
        };
        Self {
            name: name.to_string(),
            agent: agent.map(str::to_string),
            scope,
            measured: measured.unwrap_or(f64::NAN),
            bound,
            verdict,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SolverSummary {
    pub rounds_solved: usize,
    pub max_gap: f64,
    pub mean_support: f64,
    pub total_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Flag {
    FeasibilityExhausted { agent: String, round: usize },
    BenchmarkEmpty { agent: String, scope: Scope },
    BenchmarkEliminated { agent: String, scope: Scope },
    ExpectationUnsupported { agent: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundDiagnostic {
    pub round: usize,
    pub gap: f64,
    pub value: f64,
    pub support: usize,
    pub iterations: usize,
    pub weight_entropy: f64,
}

impl ReportBody {
    pub fn agent(&self, id: &str) -> Option<&AgentReport> {
        self.agents.iter().find(|a| a.id == id)
    }

    /// Largest per-event bias, zero without events.
    pub fn max_bias(&self) -> f64 {
        self.events.iter().map(|e| e.bias).fold(0.0, f64::max)
    }

    pub fn failed_bounds(&self) -> impl Iterator<Item = &BoundRow> {
        self.bounds.iter().filter(|b| b.verdict == Verdict::Fail)
    }

    /// Canonical JSON of the body; identical across reruns with one seed.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| crate::Error::Invariant(e.to_string()))
    }

    /// One row per (agent, scope, metric) and per event, with columns
    /// `agent,scope,metric,variant,value,flag`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "agent,scope,metric,variant,value,flag")?;
        let mut row = |agent: &str, scope: &str, metric: &str, variant: &str, value: f64, flag: &str| {
            writeln!(w, "{agent},{scope},{metric},{variant},{value},{flag}")
        };
        for agent in &self.agents {
            let id = csv_field(&agent.id);
            let exhausted = if agent.exhausted_at.is_some() { "exhausted" } else { "" };
            for m in &agent.scopes {
                let scope = m.scope.label();
                row(&id, &scope, "ccv", "signed", m.ccv, exhausted)?;
                row(&id, &scope, "ccv", "positive", m.ccv_positive, exhausted)?;
                for (metric, r) in [("external-regret", m.external_regret), ("swap-regret", m.swap_regret)] {
                    match r {
                        Regret::Value(v) => row(&id, &scope, metric, mode_label(agent.mode), v, exhausted)?,
                        Regret::Undefined => row(&id, &scope, metric, mode_label(agent.mode), f64::NAN, "undefined")?,
                    }
                }
                row(&id, &scope, "benchmark-size", "realization", m.realized_benchmark.len() as f64, "")?;
                if let Some(b) = m.expectation_benchmark {
                    row(&id, &scope, "benchmark-size", "expectation", b.len() as f64, "")?;
                }
                row(&id, &scope, "plays", "", m.plays as f64, "")?;
                if let Some(kept) = m.benchmark_preserved {
                    row(&id, &scope, "benchmark-preserved", mode_label(agent.mode), f64::from(u8::from(kept)), "")?;
                }
            }
        }
        for e in &self.events {
            let scope = e.label.subsequence.map_or_else(|| "full".to_string(), |s| format!("S{s}"));
            let variant = format!("a{}", e.label.action);
            row(&csv_field(&e.label.agent), &scope, "bias", &variant, e.bias, "")?;
            row(&csv_field(&e.label.agent), &scope, "event-count", &variant, e.count, "")?;
        }
        Ok(())
    }
}

fn mode_label(mode: Mode) -> &'static str {
    match mode {
        Mode::Realization => "realization",
        Mode::Expectation => "expectation",
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
