//! Online omniprediction with long-term constraints.
//!
//! A forecaster publishes vector predictions in `[0,1]^d` that are kept
//! conditionally unbiased on the decisions of every downstream agent. Agents
//! best respond within a candidate action set that they shrink by eliminating
//! actions observed to violate their constraints. Adversaries generate
//! contexts and outcome distributions, and the metrics layer measures regret
//! and cumulative constraint violation from the recorded transcript.
//!
//! Module map:
//!
//! - [`domain`]: outcomes, affine utilities, constraint families, transcripts.
//! - [`agents`]: constrained best response and the four elimination ledgers.
//! - [`forecast`]: decision events, expert weights, the per-round minmax game.
//! - [`env`]: adversaries, outcome distributions and subsequence definitions.
//! - [`metrics`]: benchmark sets, CCV, external/swap regret, bound tables.
//! - [`harness`]: configuration, the round loop, sweeps, reports and verification.

pub mod agents;
pub mod domain;
pub mod env;
pub mod error;
pub mod forecast;
pub mod harness;
pub mod metrics;

pub use error::{Error, Result};
