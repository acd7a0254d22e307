//! Configuration, the round loop, sweeps, reports and the verification suite.

mod config;
mod report;
mod run;
mod sweep;

pub use config::{
    AdversaryConfig, AgentConfig, ConstraintConfig, DistributionConfig, FaultConfig, OutputConfig,
    PhaseConfig, PredictionSource, RunConfig, UtilityConfig, CONTEXT_DIM,
};
pub use report::{
    AgentReport, BoundRow, EventReport, Flag, ReportBody, ReportHeader, RoundDiagnostic, RunReport,
    ScopeMetrics, SolverSummary, Verdict, SCHEMA_VERSION,
};
pub use run::{run_simulation, stream, streams, RunOutput};
pub use sweep::{loglog_slope, max_ccv, max_swap, run_sweep, AggregateRow, SweepAxis, SweepMember, SweepOutput};

pub mod scenarios;
pub mod verify;
