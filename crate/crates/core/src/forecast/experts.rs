use super::EventTable;
use crate::domain::CompensatedSum;
use crate::{Error, Result};

/// `η = sqrt(8 ln(2 d |E|) / T)`.
pub fn learning_rate(dim: usize, num_events: usize, horizon: usize) -> Result<f64> {
    if dim == 0 || num_events == 0 || horizon == 0 {
        return Err(Error::config(
            "learning rate needs a positive dimension, event count and horizon",
        ));
    }
    Ok((8.0 * (2.0 * dim as f64 * num_events as f64).ln() / horizon as f64).sqrt())
}

/// Cumulative signed biases of the `2 d |E|` experts `(E, i, σ)`.
///
/// Only the `σ = +` side is stored: `G[E][i][−] = −G[E][i][+]`.
#[derive(Debug, Clone)]
pub struct ExpertState {
    dim: usize,
    num_events: usize,
    eta: f64,
    gains: Vec<CompensatedSum>,
    sign: f64,
}

/// Normalised expert weights, indexed `(e * d + i) * 2 + σ` with `σ = 0` for
/// `+` and `σ = 1` for `−`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertWeights {
    pub dim: usize,
    pub q: Vec<f64>,
}

impl ExpertWeights {
    /// `q(E,i,+) − q(E,i,−)`.
    #[inline]
    pub fn signed(&self, e: usize, i: usize) -> f64 {
        let k = (e * self.dim + i) * 2;
        self.q[k] - self.q[k + 1]
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .q
            .iter()
            .filter(|&&w| w > 0.0)
            .map(|w| w * w.ln())
            .sum::<f64>()
    }
}

impl ExpertState {
    pub fn new(dim: usize, num_events: usize, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::config(format!("learning rate must be positive, got {eta}")));
        }
        Ok(Self {
            dim,
            num_events,
            eta,
            gains: vec![CompensatedSum::new(); dim * num_events],
            sign: 1.0,
        })
    }

    /// Fault injection: every update enters with the wrong sign.
    #[doc(hidden)]
    pub fn with_flipped_sign(mut self) -> Self {
        self.sign = -1.0;
        self
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn num_events(&self) -> usize {
        self.num_events
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `G[e][i][+]`.
    pub fn gain(&self, e: usize, i: usize) -> f64 {
        self.gains[e * self.dim + i].value()
    }

    #[doc(hidden)]
    pub fn set_gain(&mut self, e: usize, i: usize, value: f64) {
        let mut s = CompensatedSum::new();
        s.add(value);
        self.gains[e * self.dim + i] = s;
    }

    /// `q ∝ exp((η/2) G)` with max subtraction before exponentiation.
    pub fn weights(&self) -> ExpertWeights {
        let half = 0.5 * self.eta;
        let shift = self
            .gains
            .iter()
            .map(|g| (half * g.value()).abs())
            .fold(0.0, f64::max);
        let mut q = Vec::with_capacity(2 * self.gains.len());
        let mut total = CompensatedSum::new();
        for g in &self.gains {
            let x = half * g.value();
            let plus = (x - shift).exp();
            let minus = (-x - shift).exp();
            total.add(plus);
            total.add(minus);
            q.push(plus);
            q.push(minus);
        }
        let z = total.value();
        for w in &mut q {
            *w /= z;
        }
        ExpertWeights { dim: self.dim, q }
    }

    /// Adds `Σ_p ψ_p E(p) (p^i − y^i)` to `G[E][i][+]`: the expected update
    /// under the round's prediction distribution. A point mass gives the
    /// update for a single sampled prediction.
    pub fn record<'a>(
        &mut self,
        psi: impl IntoIterator<Item = (usize, f64)>,
        points: impl Fn(usize) -> &'a [f64],
        table: &EventTable,
        y: &[f64],
    ) {
        for (k, mass) in psi {
            if mass == 0.0 {
                continue;
            }
            let p = points(k);
            for &e in table.firing(k) {
                for i in 0..self.dim {
                    self.gains[e * self.dim + i].add(self.sign * mass * (p[i] - y[i]));
                }
            }
        }
    }
}
