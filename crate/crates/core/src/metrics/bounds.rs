use serde::Serialize;

use crate::agents::{tau_subsequence, threshold_tau};
use crate::Result;

/// Constant in front of the bias and swap-regret rates. The rates hold up to
/// an unspecified constant; this one is specific to this implementation.
pub const RATE_CONSTANT: f64 = 20.0;

/// Run parameters that the closed-form bounds depend on.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    pub horizon: usize,
    pub dim: usize,
    pub num_actions: usize,
    pub num_agents: usize,
    pub num_constraints: usize,
    pub delta: f64,
    /// `|S|` per subsequence when subsequences are configured.
    pub subsequence_lens: Option<Vec<usize>>,
    pub lipschitz: f64,
    pub num_events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedBound {
    pub name: &'static str,
    pub value: f64,
}

/// Realized elimination: `CCV ≤ |A|`.
pub fn ccv_realized_bound(num_actions: usize) -> f64 {
    num_actions as f64
}

/// Threshold elimination: `|A| τ + |A|`.
pub fn ccv_expectation_bound(p: &BoundParams) -> Result<f64> {
    let tau = threshold_tau(p.horizon, p.num_actions, p.num_agents, p.num_constraints, p.delta)?;
    Ok(p.num_actions as f64 * tau + p.num_actions as f64)
}

/// Realized elimination per subsequence: `CCV(S) ≤ |A| |𝒮|`.
pub fn ccv_subsequence_realized_bound(num_actions: usize, num_subsequences: usize) -> f64 {
    (num_actions * num_subsequences) as f64
}

/// Attributed elimination: `Σ_S |A| τ_S + |A| |𝒮|`.
pub fn ccv_subsequence_expectation_bound(p: &BoundParams, lens: &[usize]) -> Result<f64> {
    let a = p.num_actions as f64;
    let mut total = a * lens.len() as f64;
    for &len in lens {
        total += a * tau_subsequence(len.max(1), p.num_actions, p.num_agents, lens.len(), p.num_constraints, p.delta)?;
    }
    Ok(total)
}

/// `C sqrt(T ln(d |E| T))`.
pub fn bias_bound(horizon: usize, dim: usize, num_events: usize) -> f64 {
    let t = horizon as f64;
    RATE_CONSTANT * (t * (dim as f64 * num_events as f64 * t).ln().max(1.0)).sqrt()
}

/// `C L |A| sqrt(T ln(d |A| |N| T / δ))`.
pub fn swap_regret_bound(p: &BoundParams) -> f64 {
    let t = p.horizon as f64;
    let log = (p.dim as f64 * p.num_actions as f64 * p.num_agents as f64 * t / p.delta).ln();
    RATE_CONSTANT * p.lipschitz * p.num_actions as f64 * (t * log.max(1.0)).sqrt()
}

/// Every closed-form bound that applies to the parameters.
pub fn theorem_bounds(p: &BoundParams) -> Result<Vec<NamedBound>> {
    let mut rows = vec![
        NamedBound {
            name: "ccv-realized",
            value: ccv_realized_bound(p.num_actions),
        },
        NamedBound {
            name: "ccv-expectation",
            value: ccv_expectation_bound(p)?,
        },
        NamedBound {
            name: "bias",
            value: bias_bound(p.horizon, p.dim, p.num_events),
        },
        NamedBound {
            name: "swap-regret",
            value: swap_regret_bound(p),
        },
    ];
    if let Some(lens) = &p.subsequence_lens {
        rows.push(NamedBound {
            name: "ccv-subsequence-realized",
            value: ccv_subsequence_realized_bound(p.num_actions, lens.len()),
        });
        rows.push(NamedBound {
            name: "ccv-subsequence-expectation",
            value: ccv_subsequence_expectation_bound(p, lens)?,
        });
    }
    Ok(rows)
}
