use serde::{Deserialize, Serialize};

use crate::domain::Outcome;
use crate::{Error, Result};

/// Largest grid the uniform constructor will build.
pub const MAX_GRID_POINTS: usize = 1 << 16;

/// How the prediction grid is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridSpec {
    /// `m` evenly spaced values per coordinate, endpoints included.
    Uniform { points_per_coord: usize },
    Explicit { points: Vec<Vec<f64>> },
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Uniform { points_per_coord: 9 }
    }
}

/// Finite support for the forecaster's prediction distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionGrid {
    points: Vec<Outcome>,
    spec: GridSpec,
}

impl PredictionGrid {
    pub fn new(spec: GridSpec, dim: usize) -> Result<Self> {
        let points = match &spec {
            GridSpec::Uniform { points_per_coord: m } => uniform_points(*m, dim)?,
            GridSpec::Explicit { points } => {
                if points.is_empty() {
                    return Err(Error::config("explicit prediction grid is empty"));
                }
                let points = points
                    .iter()
                    .map(|p| Outcome::with_dim(p.clone(), dim))
                    .collect::<Result<Vec<_>>>()?;
                for (k, p) in points.iter().enumerate() {
                    if points[..k].contains(p) {
                        return Err(Error::config(format!(
                            "prediction grid lists {:?} twice",
                            p.coords()
                        )));
                    }
                }
                points
            }
        };
        Ok(Self { points, spec })
    }

    pub fn uniform(points_per_coord: usize, dim: usize) -> Result<Self> {
        Self::new(GridSpec::Uniform { points_per_coord }, dim)
    }

    pub fn points(&self) -> &[Outcome] {
        &self.points
    }

    pub fn point(&self, k: usize) -> &Outcome {
        &self.points[k]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }
}

fn uniform_points(m: usize, dim: usize) -> Result<Vec<Outcome>> {
    if m < 2 {
        return Err(Error::config("a uniform grid needs at least 2 points per coordinate"));
    }
    if dim == 0 {
        return Err(Error::config("dimension must be positive"));
    }
    let total = (m as u64)
        .checked_pow(dim as u32)
        .filter(|&n| n <= MAX_GRID_POINTS as u64)
        .ok_or_else(|| {
            Error::config(format!(
                "uniform grid with {m} points in {dim} dimensions is too large; list the points explicitly"
            ))
        })? as usize;
    let step = (m - 1) as f64;
    let mut points = Vec::with_capacity(total);
    for mut k in 0..total {
        let coords = (0..dim)
            .map(|_| {
                let c = k % m;
                k /= m;
                c as f64 / step
            })
            .collect();
        points.push(Outcome::new(coords)?);
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_layout() {
        let g = PredictionGrid::uniform(3, 2).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.point(0).coords(), &[0.0, 0.0]);
        assert_eq!(g.point(1).coords(), &[0.5, 0.0]);
        assert_eq!(g.point(8).coords(), &[1.0, 1.0]);
        assert_eq!(PredictionGrid::uniform(9, 2).unwrap().len(), 81);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(PredictionGrid::uniform(1, 2).is_err());
        assert!(PredictionGrid::uniform(9, 8).is_err());
        let dup = GridSpec::Explicit {
            points: vec![vec![0.1, 0.2], vec![0.1, 0.2]],
        };
        assert!(PredictionGrid::new(dup, 2).is_err());
        let outside = GridSpec::Explicit {
            points: vec![vec![1.5]],
        };
        assert!(PredictionGrid::new(outside, 1).is_err());
        let wrong_dim = GridSpec::Explicit {
            points: vec![vec![0.5]],
        };
        assert!(PredictionGrid::new(wrong_dim, 2).is_err());
    }
}
