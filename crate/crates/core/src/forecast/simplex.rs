//! Exact solution of small zero-sum matrix games by a dense tableau simplex.

use crate::{Error, Result};

const PIVOT_EPS: f64 = 1e-12;

/// Optimal strategies of a matrix game where the row player minimises
/// `x^T M y` and the column player maximises it.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGameSolution {
    pub rows: Vec<f64>,
    pub cols: Vec<f64>,
    pub value: f64,
    pub pivots: usize,
}

/// Solves the game with payoff `payoff[r * cols + c]`.
///
/// Bland's rule guarantees termination.
pub fn solve_matrix_game(payoff: &[f64], rows: usize, cols: usize) -> Result<MatrixGameSolution> {
    if rows == 0 || cols == 0 || payoff.len() != rows * cols {
        return Err(Error::Invariant(format!(
            "matrix game of shape {rows}x{cols} with {} entries",
            payoff.len()
        )));
    }
    let min = payoff.iter().copied().fold(f64::INFINITY, f64::min);
    if !min.is_finite() || payoff.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invariant("matrix game payoff is not finite".into()));
    }
    let shift = 1.0 - min;

    // After the shift the minimiser's problem is `max Σx s.t. M^T x ≤ 1,
    // x ≥ 0` with value `1/Σx`; the maximiser's strategy is read off the dual
    // values of the slack columns. Tableau: one row per column of the game
    // plus the objective row; columns are the `rows` structural variables,
    // `cols` slacks and the right-hand side.
    let (m, n) = (cols, rows);
    let width = n + m + 1;
    let rhs = width - 1;
    let mut t = vec![0.0; (m + 1) * width];
    for c in 0..m {
        let row = &mut t[c * width..(c + 1) * width];
        for r in 0..n {
            row[r] = payoff[r * cols + c] + shift;
        }
        row[n + c] = 1.0;
        row[rhs] = 1.0;
    }
    let obj = m * width;
    for r in 0..n {
        t[obj + r] = -1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_pivots = 50 * (n + m) + 1000;
    let mut pivots = 0;
    // Bland's rule: lowest-index entering column, lowest-index leaving
    // variable among ratio ties.
    while let Some(enter) = (0..n + m).find(|&c| t[obj + c] < -PIVOT_EPS) {
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            let a = t[r * width + enter];
            if a > PIVOT_EPS {
                let ratio = t[r * width + rhs] / a;
                let better = match leave {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < lratio - 1e-15 || (ratio <= lratio + 1e-15 && basis[r] < basis[lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((pr, _)) = leave else {
            return Err(Error::Invariant("matrix game LP is unbounded".into()));
        };
        pivot(&mut t, width, m + 1, pr, enter);
        basis[pr] = enter;
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Solver {
                target: 0.0,
                achieved: f64::NAN,
                iterations: pivots,
            });
        }
    }

    let mut x = vec![0.0; n];
    for (r, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = t[r * width + rhs].max(0.0);
        }
    }
    let duals: Vec<f64> = (0..m).map(|c| t[obj + n + c].max(0.0)).collect();
    let total_x: f64 = x.iter().sum();
    let total_y: f64 = duals.iter().sum();
    if !(total_x > 0.0 && total_y > 0.0) {
        return Err(Error::Invariant("degenerate matrix game solution".into()));
    }
    Ok(MatrixGameSolution {
        rows: x.iter().map(|v| v / total_x).collect(),
        cols: duals.iter().map(|v| v / total_y).collect(),
        value: 1.0 / total_x - shift,
        pivots,
    })
}

fn pivot(t: &mut [f64], width: usize, height: usize, pr: usize, pc: usize) {
    let inv = 1.0 / t[pr * width + pc];
    for v in &mut t[pr * width..(pr + 1) * width] {
        *v *= inv;
    }
    let (before, rest) = t.split_at_mut(pr * width);
    let (prow, after) = rest.split_at_mut(width);
    let eliminate = |row: &mut [f64]| {
        let f = row[pc];
        if f != 0.0 {
            for (v, p) in row.iter_mut().zip(prow.iter()) {
                *v -= f * p;
            }
            row[pc] = 0.0;
        }
    };
    before.chunks_exact_mut(width).for_each(eliminate);
    after.chunks_exact_mut(width).take(height - pr - 1).for_each(eliminate);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn payoff(m: &[f64], cols: usize, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(r, xr)| xr * (0..cols).map(|c| m[r * cols + c] * y[c]).sum::<f64>())
            .sum()
    }

    #[test]
    fn matching_pennies() {
        let sol = solve_matrix_game(&[1.0, -1.0, -1.0, 1.0], 2, 2).unwrap();
        assert!(sol.value.abs() < 1e-12);
        for v in sol.rows.iter().chain(&sol.cols) {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_saddle_point() {
        // Row 1 dominates for the minimiser; column 0 is the best reply.
        let sol = solve_matrix_game(&[3.0, 2.0, 1.0, 0.0], 2, 2).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-12);
        assert!((sol.rows[1] - 1.0).abs() < 1e-12);
        assert!((sol.cols[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rock_paper_scissors() {
        let m = [0.0, 1.0, -1.0, -1.0, 0.0, 1.0, 1.0, -1.0, 0.0];
        let sol = solve_matrix_game(&m, 3, 3).unwrap();
        assert!(sol.value.abs() < 1e-12);
        for v in &sol.rows {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    proptest! {
        /// The strategies certify each other: the row strategy holds every
        /// column to the value and the column strategy forces every row to it.
        #[test]
        fn strategies_certify_the_value(
            (rows, cols, m) in (1usize..12, 1usize..6).prop_flat_map(|(r, c)| {
                (Just(r), Just(c), proptest::collection::vec(-1.0f64..1.0, r * c))
            })
        ) {
            let sol = solve_matrix_game(&m, rows, cols).unwrap();
            let best_col = (0..cols)
                .map(|c| (0..rows).map(|r| sol.rows[r] * m[r * cols + c]).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            let best_row = (0..rows)
                .map(|r| (0..cols).map(|c| sol.cols[c] * m[r * cols + c]).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(best_col - best_row <= 1e-9);
            prop_assert!((best_col - sol.value).abs() <= 1e-9);
            prop_assert!((payoff(&m, cols, &sol.rows, &sol.cols) - sol.value).abs() <= 1e-9);
            prop_assert!((sol.rows.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
