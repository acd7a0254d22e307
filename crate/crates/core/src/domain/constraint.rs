use std::fmt;
use std::sync::Arc;

use super::{CompensatedSum, OutcomeDistribution};
use crate::{Error, Result};

/// User-supplied constraint evaluator `(action, y) -> c(a, y)`.
#[derive(Clone)]
pub struct CustomConstraint(pub Arc<dyn Fn(usize, &[f64]) -> f64 + Send + Sync>);

impl fmt::Debug for CustomConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomConstraint(..)")
    }
}

/// One constraint function `c_j(a, y)`, parameterised per action.
#[derive(Debug, Clone)]
pub enum Constraint {
    /// `c(a, y) = <g_a, y> + h_a`.
    Linear {
        weights: Vec<Vec<f64>>,
        offsets: Vec<f64>,
    },
    /// Step function on one coordinate: `above` when `y[coord] > threshold_a`,
    /// otherwise `below`.
    Threshold {
        coord: usize,
        thresholds: Vec<f64>,
        above: f64,
        below: f64,
    },
    /// Piecewise-constant values on a uniform partition of the cube with
    /// `resolution` cells per coordinate. `values[a]` is indexed by the cell's
    /// mixed-radix index with coordinate 0 least significant.
    Tabular {
        resolution: usize,
        values: Vec<Vec<f64>>,
    },
    Custom(CustomConstraint),
}

impl Constraint {
    #[inline]
    fn raw(&self, a: usize, y: &[f64]) -> f64 {
        match self {
            Constraint::Linear { weights, offsets } => weights[a]
                .iter()
                .zip(y)
                .fold(offsets[a], |acc, (g, v)| acc + g * v),
            Constraint::Threshold {
                coord,
                thresholds,
                above,
                below,
            } => {
                if y[*coord] > thresholds[a] {
                    *above
                } else {
                    *below
                }
            }
            Constraint::Tabular { resolution, values } => values[a][cell_index(*resolution, y)],
            Constraint::Custom(f) => (f.0)(a, y),
        }
    }

    fn check_shape(&self, j: usize, num_actions: usize, dim: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::config(format!("constraint {j}: {msg}")));
        match self {
            Constraint::Linear { weights, offsets } => {
                if weights.len() != num_actions || offsets.len() != num_actions {
                    return bad(format!("expected parameters for {num_actions} actions"));
                }
                if let Some(w) = weights.iter().find(|w| w.len() != dim) {
                    return Err(Error::Dimension {
                        expected: dim,
                        actual: w.len(),
                    });
                }
                if weights.iter().flatten().chain(offsets).any(|x| !x.is_finite()) {
                    return bad("parameters must be finite".into());
                }
            }
            Constraint::Threshold {
                coord,
                thresholds,
                above,
                below,
            } => {
                if *coord >= dim {
                    return bad(format!("coordinate {coord} out of range for dimension {dim}"));
                }
                if thresholds.len() != num_actions {
                    return bad(format!("expected {num_actions} thresholds"));
                }
                if ![*above, *below].iter().all(|v| (-1.0..=1.0).contains(v)) {
                    return bad("step values must lie in [-1, 1]".into());
                }
            }
            Constraint::Tabular { resolution, values } => {
                if *resolution == 0 {
                    return bad("resolution must be positive".into());
                }
                let cells = (*resolution as u64)
                    .checked_pow(dim as u32)
                    .filter(|&c| c <= 1 << 20)
                    .ok_or_else(|| Error::config(format!("constraint {j}: table too large")))?
                    as usize;
                if values.len() != num_actions || values.iter().any(|v| v.len() != cells) {
                    return bad(format!(
                        "expected {num_actions} rows of {cells} cell values"
                    ));
                }
                if values.iter().flatten().any(|v| !(-1.0..=1.0).contains(v)) {
                    return bad("table values must lie in [-1, 1]".into());
                }
            }
            Constraint::Custom(_) => {}
        }
        Ok(())
    }
}

fn cell_index(resolution: usize, y: &[f64]) -> usize {
    let mut index = 0;
    let mut stride = 1;
    for &v in y {
        let k = ((v * resolution as f64).floor() as usize).min(resolution - 1);
        index += k * stride;
        stride *= resolution;
    }
    index
}

/// The `J` constraint functions of one agent.
#[derive(Debug, Clone)]
pub struct ConstraintFamily {
    constraints: Vec<Constraint>,
    num_actions: usize,
    dim: usize,
}

impl ConstraintFamily {
    pub fn new(constraints: Vec<Constraint>, num_actions: usize, dim: usize) -> Result<Self> {
        if constraints.is_empty() {
            return Err(Error::config("an agent needs at least one constraint"));
        }
        for (j, c) in constraints.iter().enumerate() {
            c.check_shape(j, num_actions, dim)?;
        }
        Ok(Self {
            constraints,
            num_actions,
            dim,
        })
    }

    /// `J`.
    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// `c_j(a, y)`. Values outside `[-1,1]` (including NaN) are errors, never clamped.
    #[inline]
    pub fn eval(&self, j: usize, a: usize, y: &[f64]) -> Result<f64> {
        let value = self.constraints[j].raw(a, y);
        if (-1.0..=1.0).contains(&value) {
            Ok(value)
        } else {
            Err(Error::ConstraintRange {
                constraint: j,
                action: a,
                value,
            })
        }
    }

    /// Writes `c_j(a, y)` for every `j` into `out`.
    pub fn eval_all(&self, a: usize, y: &[f64], out: &mut [f64]) -> Result<()> {
        for (j, slot) in out.iter_mut().enumerate().take(self.len()) {
            *slot = self.eval(j, a, y)?;
        }
        Ok(())
    }

    pub fn values(&self, a: usize, y: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.eval_all(a, y, &mut out)?;
        Ok(out)
    }

    /// Whether some constraint is strictly positive at `(a, y)`.
    pub fn violated(&self, a: usize, y: &[f64]) -> Result<bool> {
        for j in 0..self.len() {
            if self.eval(j, a, y)? > 0.0 {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `E_{y ~ dist}[c_j(a, y)]` for every `j`, by exact finite-support summation.
    pub fn expected(&self, a: usize, dist: &OutcomeDistribution) -> Result<Vec<f64>> {
        let mut sums = vec![CompensatedSum::new(); self.len()];
        for (y, p) in dist.iter() {
            for (j, s) in sums.iter_mut().enumerate() {
                s.add(p * self.eval(j, a, y.coords())?);
            }
        }
        Ok(sums.iter().map(CompensatedSum::value).collect())
    }
}
