use serde::{Deserialize, Serialize};

use super::simplex::solve_matrix_game;
use super::{EventTable, ExpertWeights, PredictionGrid};
use crate::{Error, Result};

/// Largest vertex count the exact solver enumerates as columns.
const MAX_EXACT_VERTICES: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethod {
    /// Dense simplex on the grid-by-vertex matrix game.
    Simplex,
    /// Multiplicative weights for the predictor against best-responding outcomes.
    MultiplicativeWeights,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Largest accepted duality gap.
    pub tolerance: f64,
    pub method: SolverMethod,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-3,
            method: SolverMethod::Simplex,
        }
    }
}

impl SolverConfig {
    /// Iteration budget of the iterative solver: `10 ⌈1/ε²⌉`.
    pub fn iteration_budget(&self) -> usize {
        10 * (1.0 / (self.tolerance * self.tolerance)).ceil() as usize
    }
}

/// The round's game in coefficient form: at grid point `p_k` the objective is
/// `Σ_i c_i(p_k) (p_k^i − y^i)` with `c_i(p) = Σ_E E(p) (q(E,i,+) − q(E,i,−))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GameCoefficients {
    dim: usize,
    points: Vec<f64>,
    coeffs: Vec<f64>,
}

impl GameCoefficients {
    pub fn new(grid: &PredictionGrid, table: &EventTable, weights: &ExpertWeights) -> Self {
        let dim = grid.dim();
        let mut coeffs = vec![0.0; grid.len() * dim];
        for k in 0..grid.len() {
            for &e in table.firing(k) {
                for i in 0..dim {
                    coeffs[k * dim + i] += weights.signed(e, i);
                }
            }
        }
        let points = grid.points().iter().flat_map(|p| p.coords().iter().copied()).collect();
        Self { dim, points, coeffs }
    }

    /// Builds the game directly from per-point coefficients.
    pub fn from_parts(dim: usize, points: Vec<f64>, coeffs: Vec<f64>) -> Result<Self> {
        if dim == 0 || points.is_empty() || !points.len().is_multiple_of(dim) || coeffs.len() != points.len() {
            return Err(Error::config("game coefficients do not match the point list"));
        }
        Ok(Self { dim, points, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_points(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    pub fn coeffs(&self, k: usize) -> &[f64] {
        &self.coeffs[k * self.dim..(k + 1) * self.dim]
    }

    /// Objective at grid point `k` against outcome `y`.
    #[inline]
    pub fn objective(&self, k: usize, y: &[f64]) -> f64 {
        self.coeffs(k)
            .iter()
            .zip(self.point(k))
            .zip(y)
            .map(|((c, p), y)| c * (p - y))
            .sum()
    }

    /// `max_y E_{p~ψ}[objective]`. Linear in `y`, so the maximum sits at the
    /// vertex `y_i = 1[B_i < 0]` where `B_i = Σ_k ψ_k c_i(p_k)`.
    pub fn inner_max(&self, psi: &[f64]) -> (f64, Vec<f64>) {
        let d = self.dim;
        let mut a = vec![0.0; d];
        let mut b = vec![0.0; d];
        for (k, &w) in psi.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..d {
                let c = self.coeffs[k * d + i];
                a[i] += w * c * self.points[k * d + i];
                b[i] += w * c;
            }
        }
        let y: Vec<f64> = b.iter().map(|&bi| if bi < 0.0 { 1.0 } else { 0.0 }).collect();
        let value = (0..d).map(|i| a[i] - b[i] * y[i]).sum();
        (value, y)
    }

    /// `min_k objective(k, y)`.
    pub fn best_point(&self, y: &[f64]) -> (usize, f64) {
        (0..self.num_points())
            .map(|k| (k, self.objective(k, y)))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    }
}

/// A prediction distribution with its duality certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct MinmaxSolution {
    /// Probability of every grid point.
    pub psi: Vec<f64>,
    /// `max_y` objective under `psi`.
    pub upper: f64,
    /// `min_p` objective against the outcome player's mixed strategy, a lower
    /// bound on the game value.
    pub lower: f64,
    pub gap: f64,
    pub worst_y: Vec<f64>,
    pub iterations: usize,
}

/// Finds the prediction distribution minimising the worst-case objective.
pub fn solve_minmax(game: &GameCoefficients, config: &SolverConfig) -> Result<MinmaxSolution> {
    if !(config.tolerance > 0.0) {
        return Err(Error::config("solver tolerance must be positive"));
    }
    let solution = match config.method {
        SolverMethod::Simplex => solve_exact(game)?,
        SolverMethod::MultiplicativeWeights => {
            solve_iterative(game, config.tolerance, config.iteration_budget())
        }
    };
    check_gap(solution, config.tolerance)
}

fn check_gap(solution: MinmaxSolution, tolerance: f64) -> Result<MinmaxSolution> {
    if solution.gap > tolerance {
        return Err(Error::Solver {
            target: tolerance,
            achieved: solution.gap,
            iterations: solution.iterations,
        });
    }
    Ok(solution)
}

fn certify(game: &GameCoefficients, psi: Vec<f64>, y_mean: &[f64], iterations: usize) -> MinmaxSolution {
    let (upper, worst_y) = game.inner_max(&psi);
    let (_, lower) = game.best_point(y_mean);
    MinmaxSolution {
        psi,
        upper,
        lower,
        gap: (upper - lower).max(0.0),
        worst_y,
        iterations,
    }
}

fn solve_exact(game: &GameCoefficients) -> Result<MinmaxSolution> {
    let d = game.dim;
    let vertices = 1usize
        .checked_shl(d as u32)
        .filter(|&v| v <= MAX_EXACT_VERTICES)
        .ok_or_else(|| {
            Error::Unsupported(format!(
                "exact minmax solving enumerates 2^{d} outcome vertices; use the iterative solver"
            ))
        })?;
    let rows = game.num_points();
    let mut payoff = vec![0.0; rows * vertices];
    let mut y = vec![0.0; d];
    for v in 0..vertices {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (v >> i & 1) as f64;
        }
        for k in 0..rows {
            payoff[k * vertices + v] = game.objective(k, &y);
        }
    }
    let sol = solve_matrix_game(&payoff, rows, vertices)?;
    let mut y_mean = vec![0.0; d];
    for (v, w) in sol.cols.iter().enumerate() {
        for (i, m) in y_mean.iter_mut().enumerate() {
            *m += w * (v >> i & 1) as f64;
        }
    }
    Ok(certify(game, sol.rows, &y_mean, sol.pivots))
}

fn solve_iterative(game: &GameCoefficients, tolerance: f64, budget: usize) -> MinmaxSolution {
    let n = game.num_points();
    let d = game.dim;
    // Payoffs lie in [-1, 1].
    let eta = (8.0 * (n.max(2) as f64).ln() / budget as f64).sqrt();
    let mut losses = vec![0.0; n];
    let mut psi_sum = vec![0.0; n];
    let mut y_sum = vec![0.0; d];
    let mut weights = vec![0.0; n];
    let mut best = None;
    for it in 1..=budget {
        let min_loss = losses.iter().copied().fold(f64::INFINITY, f64::min);
        let mut z = 0.0;
        for (w, l) in weights.iter_mut().zip(&losses) {
            *w = (-eta * (l - min_loss)).exp();
            z += *w;
        }
        weights.iter_mut().for_each(|w| *w /= z);
        let (_, y) = game.inner_max(&weights);
        for k in 0..n {
            losses[k] += game.objective(k, &y);
            psi_sum[k] += weights[k];
        }
        y_sum.iter_mut().zip(&y).for_each(|(s, v)| *s += v);
        if it % 64 == 0 || it == budget {
            let psi: Vec<f64> = psi_sum.iter().map(|s| s / it as f64).collect();
            let y_mean: Vec<f64> = y_sum.iter().map(|s| s / it as f64).collect();
            let sol = certify(game, psi, &y_mean, it);
            if sol.gap <= tolerance {
                return sol;
            }
            best = Some(sol);
        }
    }
    best.expect("budget is positive")
}

/// Reference value of the game by enumerating every distribution on a mesh of
/// the simplex over the grid with the given number of steps. Exponential in
/// the grid size; meant for small oracle checks.
pub fn mesh_minmax(game: &GameCoefficients, steps: usize) -> f64 {
    // The inner maximum of a mixture is `Σ_i max(A_i, A_i − B_i)` with
    // `A_i = Σ ψ_k c_i p_k^i` and `B_i = Σ ψ_k c_i`; both are carried through
    // the recursion as running sums.
    struct Mesh<'a> {
        game: &'a GameCoefficients,
        unit: f64,
        a: Vec<f64>,
        b: Vec<f64>,
        best: f64,
    }
    impl Mesh<'_> {
        fn shift(&mut self, k: usize, mass: f64) {
            let d = self.game.dim;
            for i in 0..d {
                let c = self.game.coeffs[k * d + i];
                self.a[i] += mass * c * self.game.points[k * d + i];
                self.b[i] += mass * c;
            }
        }
        fn walk(&mut self, k: usize, left: usize) {
            if k + 1 == self.game.num_points() {
                let mass = left as f64 * self.unit;
                self.shift(k, mass);
                let v: f64 = self.a.iter().zip(&self.b).map(|(a, b)| a.max(a - b)).sum();
                self.best = self.best.min(v);
                self.shift(k, -mass);
                return;
            }
            for units in 0..=left {
                let mass = units as f64 * self.unit;
                self.shift(k, mass);
                self.walk(k + 1, left - units);
                self.shift(k, -mass);
            }
        }
    }
    let mut mesh = Mesh {
        game,
        unit: 1.0 / steps as f64,
        a: vec![0.0; game.dim],
        b: vec![0.0; game.dim],
        best: f64::INFINITY,
    };
    mesh.walk(0, steps);
    mesh.best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one_dim(points: &[f64], coeffs: &[f64]) -> GameCoefficients {
        GameCoefficients::from_parts(1, points.to_vec(), coeffs.to_vec()).unwrap()
    }

    #[test]
    fn symmetric_weights_give_zero() {
        let g = one_dim(&[0.0, 0.5, 1.0], &[0.0; 3]);
        for psi in [[1.0, 0.0, 0.0], [0.2, 0.3, 0.5]] {
            assert_eq!(g.inner_max(&psi).0, 0.0);
        }
        let sol = solve_minmax(&g, &SolverConfig::default()).unwrap();
        assert!(sol.upper.abs() < 1e-12);
    }

    #[test]
    fn single_event_point_mass_at_zero() {
        let g = one_dim(&[0.0, 0.5, 1.0], &[1.0; 3]);
        let (v, y) = g.inner_max(&[1.0, 0.0, 0.0]);
        assert_eq!(v, 0.0);
        assert_eq!(y, vec![0.0]);
        let sol = solve_minmax(&g, &SolverConfig::default()).unwrap();
        assert!((sol.psi[0] - 1.0).abs() < 1e-12);
        assert!(sol.upper.abs() < 1e-12);
        assert!(sol.gap < 1e-12);
    }

    #[test]
    fn inner_max_matches_vertex_enumeration() {
        let g = GameCoefficients::from_parts(
            3,
            vec![0.1, 0.9, 0.5, 0.7, 0.2, 0.3],
            vec![0.3, -0.2, 0.1, -0.25, 0.05, -0.1],
        )
        .unwrap();
        let psi = [0.35, 0.65];
        let brute = (0..8)
            .map(|v| {
                let y: Vec<f64> = (0..3).map(|i| (v >> i & 1) as f64).collect();
                psi[0] * g.objective(0, &y) + psi[1] * g.objective(1, &y)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((g.inner_max(&psi).0 - brute).abs() < 1e-15);
    }

    fn crafted_five_point() -> GameCoefficients {
        // Two events: one fires on the lower half of the grid, one on the upper
        // half, with opposite-signed weights.
        one_dim(&[0.0, 0.25, 0.5, 0.75, 1.0], &[0.4, 0.4, -0.3, -0.3, -0.3])
    }

    #[test]
    fn simplex_matches_mesh_enumeration() {
        let g = crafted_five_point();
        let mesh = mesh_minmax(&g, 200);
        let sol = solve_minmax(&g, &SolverConfig::default()).unwrap();
        assert!(sol.upper <= mesh + 1e-12);
        assert!(mesh - sol.upper <= 2e-3);
    }

    #[test]
    fn iterative_solver_reaches_tolerance() {
        let g = crafted_five_point();
        let config = SolverConfig {
            tolerance: 1e-2,
            method: SolverMethod::MultiplicativeWeights,
        };
        let sol = solve_minmax(&g, &config).unwrap();
        let exact = solve_minmax(&g, &SolverConfig::default()).unwrap();
        assert!(sol.gap <= 1e-2);
        assert!(sol.upper - exact.upper <= 1e-2 + 1e-12);
    }

    #[test]
    fn exhausted_budget_reports_gap() {
        let g = crafted_five_point();
        let sol = solve_iterative(&g, 1e-9, 64);
        assert!(sol.gap > 1e-9);
        let achieved = sol.gap;
        assert!(matches!(
            check_gap(sol, 1e-9),
            Err(Error::Solver { achieved: a, iterations: 64, .. }) if a == achieved
        ));
        let budget = SolverConfig { tolerance: 0.3, method: SolverMethod::MultiplicativeWeights };
        assert_eq!(budget.iteration_budget(), 120);
    }

    proptest! {
        #[test]
        fn exact_solver_certificate(
            coeffs in proptest::collection::vec(-0.5f64..0.5, 18),
            pts in proptest::collection::vec(0.0f64..1.0, 18),
        ) {
            let g = GameCoefficients::from_parts(2, pts, coeffs).unwrap();
            let sol = solve_minmax(&g, &SolverConfig::default()).unwrap();
            prop_assert!(sol.gap <= 1e-9);
            prop_assert!((sol.psi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(sol.psi.iter().all(|&w| w >= 0.0));
        }
    }
}
