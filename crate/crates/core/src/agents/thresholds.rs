use crate::{Error, Result};

fn check_counts(counts: &[(&str, usize)], delta: f64) -> Result<()> {
    for (name, n) in counts {
        if *n == 0 {
            return Err(Error::config(format!("{name} must be at least 1")));
        }
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::config(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// Elimination threshold for the expectation-benchmark ledger:
/// `4 sqrt(T ln(|A| |N| J T / δ))`.
pub fn threshold_tau(
    horizon: usize,
    num_actions: usize,
    num_agents: usize,
    num_constraints: usize,
    delta: f64,
) -> Result<f64> {
    check_counts(
        &[
            ("horizon", horizon),
            ("action count", num_actions),
            ("agent count", num_agents),
            ("constraint count", num_constraints),
        ],
        delta,
    )?;
    let log = (num_actions as f64).ln()
        + (num_agents as f64).ln()
        + (num_constraints as f64).ln()
        + (horizon as f64).ln()
        - delta.ln();
    if log <= 0.0 {
        return Err(Error::config("threshold log argument must exceed 1"));
    }
    Ok(4.0 * (horizon as f64 * log).sqrt())
}

/// Per-subsequence threshold for the attributed ledger:
/// `4 sqrt(|S| ln(|A| |N| |𝒮|² J |S| / δ))`.
pub fn tau_subsequence(
    subsequence_len: usize,
    num_actions: usize,
    num_agents: usize,
    num_subsequences: usize,
    num_constraints: usize,
    delta: f64,
) -> Result<f64> {
    check_counts(
        &[
            ("subsequence length", subsequence_len),
            ("action count", num_actions),
            ("agent count", num_agents),
            ("subsequence count", num_subsequences),
            ("constraint count", num_constraints),
        ],
        delta,
    )?;
    let log = (num_actions as f64).ln()
        + (num_agents as f64).ln()
        + 2.0 * (num_subsequences as f64).ln()
        + (num_constraints as f64).ln()
        + (subsequence_len as f64).ln()
        - delta.ln();
    if log <= 0.0 {
        return Err(Error::config("threshold log argument must exceed 1"));
    }
    Ok(4.0 * (subsequence_len as f64 * log).sqrt())
}
