use serde::Serialize;

use super::Outcome;
use crate::{Error, Result};

/// Largest dimension for which [`validate_utility_range`] enumerates cube vertices.
pub const MAX_VERTEX_DIM: usize = 20;

/// Slack allowed when checking that utilities stay inside `[0,1]`.
const RANGE_SLACK: f64 = 1e-12;

/// Affine utility `u(a, y) = <w_a, y> + b_a` over a finite action set.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearUtility {
    weights: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    dim: usize,
    lipschitz: f64,
}

impl LinearUtility {
    /// Builds a utility and checks that every action maps the cube into `[0,1]`.
    ///
    /// The extremes of an affine map over the cube are `b + Σ min(w_i, 0)` and
    /// `b + Σ max(w_i, 0)`, so the check is exact without vertex enumeration.
    pub fn new(weights: Vec<Vec<f64>>, offsets: Vec<f64>) -> Result<Self> {
        let u = Self::from_raw(weights, offsets)?;
        for a in 0..u.num_actions() {
            let (lo, hi) = u.range(a);
            if lo < -RANGE_SLACK || hi > 1.0 + RANGE_SLACK {
                return Err(Error::config(format!(
                    "utility of action {a} ranges over [{lo}, {hi}] on the outcome cube; it must stay within [0, 1]"
                )));
            }
        }
        Ok(u)
    }

    /// Builds a utility checking only shapes and finiteness.
    ///
    /// The range invariant is not enforced; run [`validate_utility_range`] to
    /// find the offending vertices.
    pub fn from_raw(weights: Vec<Vec<f64>>, offsets: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::config("a utility needs at least one action"));
        }
        if weights.len() > crate::domain::ActionSet::CAPACITY {
            return Err(Error::config(format!(
                "at most {} actions are supported",
                crate::domain::ActionSet::CAPACITY
            )));
        }
        if offsets.len() != weights.len() {
            return Err(Error::config(format!(
                "{} weight vectors but {} offsets",
                weights.len(),
                offsets.len()
            )));
        }
        let dim = weights[0].len();
        if dim == 0 {
            return Err(Error::config("utility weights need at least one coordinate"));
        }
        for w in &weights {
            if w.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    actual: w.len(),
                });
            }
        }
        if weights.iter().flatten().chain(&offsets).any(|x| !x.is_finite()) {
            return Err(Error::config("utility parameters must be finite"));
        }
        let lipschitz = weights
            .iter()
            .map(|w| w.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        Ok(Self {
            weights,
            offsets,
            dim,
            lipschitz,
        })
    }

    pub fn num_actions(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self, a: usize) -> &[f64] {
        &self.weights[a]
    }

    pub fn offset(&self, a: usize) -> f64 {
        self.offsets[a]
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// `<w_a, y> + b_a` without shape checks.
    #[inline]
    pub fn value(&self, a: usize, y: &[f64]) -> f64 {
        debug_assert_eq!(y.len(), self.dim);
        self.weights[a]
            .iter()
            .zip(y)
            .fold(self.offsets[a], |acc, (w, v)| acc + w * v)
    }

    /// Minimum and maximum of the action's utility over the cube.
    pub fn range(&self, a: usize) -> (f64, f64) {
        let b = self.offsets[a];
        let lo = b + self.weights[a].iter().map(|w| w.min(0.0)).sum::<f64>();
        let hi = b + self.weights[a].iter().map(|w| w.max(0.0)).sum::<f64>();
        (lo, hi)
    }
}

/// `u(a, y)`; fails on an unknown action or a dimension mismatch.
pub fn eval_utility(u: &LinearUtility, a: usize, y: &Outcome) -> Result<f64> {
    if a >= u.num_actions() {
        return Err(Error::config(format!(
            "action {a} out of range for a utility over {} actions",
            u.num_actions()
        )));
    }
    if y.dim() != u.dim() {
        return Err(Error::Dimension {
            expected: u.dim(),
            actual: y.dim(),
        });
    }
    Ok(u.value(a, y.coords()))
}

/// `max_a ||w_a||_1`, the tight ℓ∞ Lipschitz constant of an affine utility.
pub fn lipschitz_constant(u: &LinearUtility) -> f64 {
    u.lipschitz()
}

/// A cube vertex at which an action's utility leaves `[0,1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeDiagnostic {
    pub action: usize,
    pub vertex: Vec<u8>,
    pub value: f64,
}

/// Enumerates every vertex of `{0,1}^d` for every action and reports each
/// value outside `[0,1]`.
pub fn validate_utility_range(u: &LinearUtility) -> Result<Vec<RangeDiagnostic>> {
    let d = u.dim();
    if d > MAX_VERTEX_DIM {
        return Err(Error::config(format!(
            "refusing to enumerate 2^{d} vertices (limit is dimension {MAX_VERTEX_DIM})"
        )));
    }
    let mut out = Vec::new();
    let mut point = vec![0.0; d];
    for a in 0..u.num_actions() {
        for mask in 0u32..(1u32 << d) {
            for (i, c) in point.iter_mut().enumerate() {
                *c = f64::from((mask >> i) & 1);
            }
            let value = u.value(a, &point);
            if !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&value) {
                out.push(RangeDiagnostic {
                    action: a,
                    vertex: point.iter().map(|&c| c as u8).collect(),
                    value,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn y(v: &[f64]) -> Outcome {
        Outcome::new(v.to_vec()).unwrap()
    }

    #[test]
    fn eval_examples() {
        let u = LinearUtility::new(vec![vec![1.0, 0.0]], vec![0.0]).unwrap();
        assert_eq!(eval_utility(&u, 0, &y(&[0.7, 0.3])).unwrap(), 0.7);

        let u = LinearUtility::new(vec![vec![0.0, 0.0]], vec![0.5]).unwrap();
        assert_eq!(eval_utility(&u, 0, &y(&[0.1, 0.9])).unwrap(), 0.5);

        // 1/4 + 1/4 + 1/4 is exact in binary floating point.
        let u = LinearUtility::new(vec![vec![0.25, 0.25]], vec![0.25]).unwrap();
        assert_eq!(eval_utility(&u, 0, &y(&[1.0, 1.0])).unwrap(), 0.75);
    }

    #[test]
    fn eval_rejects_dimension_mismatch() {
        let u = LinearUtility::new(vec![vec![0.5, 0.5]], vec![0.0]).unwrap();
        assert!(matches!(
            eval_utility(&u, 0, &y(&[0.5])),
            Err(Error::Dimension { .. })
        ));
        assert!(eval_utility(&u, 3, &y(&[0.5, 0.5])).is_err());
    }

    #[test]
    fn lipschitz_examples() {
        let u = LinearUtility::new(vec![vec![1.0, 0.0]], vec![0.0]).unwrap();
        assert_eq!(lipschitz_constant(&u), 1.0);
        let u = LinearUtility::new(vec![vec![0.5, 0.5], vec![0.2, 0.1]], vec![0.0, 0.0]).unwrap();
        assert_eq!(lipschitz_constant(&u), 1.0);
    }

    /// Sup of |u(a,y1) - u(a,y2)| / ||y1 - y2||_inf over all vertex pairs plus
    /// random interior pairs.
    fn sampled_ratio_sup(u: &LinearUtility, rng: &mut ChaCha8Rng) -> f64 {
        let d = u.dim();
        let vertex = |mask: u32| -> Vec<f64> { (0..d).map(|i| f64::from((mask >> i) & 1)).collect() };
        let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
        for m1 in 0..(1u32 << d) {
            for m2 in 0..(1u32 << d) {
                if m1 != m2 {
                    pairs.push((vertex(m1), vertex(m2)));
                }
            }
        }
        for _ in 0..2000 {
            let a: Vec<f64> = (0..d).map(|_| rng.random()).collect();
            let b: Vec<f64> = (0..d).map(|_| rng.random()).collect();
            pairs.push((a, b));
        }
        let mut best: f64 = 0.0;
        for (p, q) in &pairs {
            let dist = p.iter().zip(q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if dist == 0.0 {
                continue;
            }
            for a in 0..u.num_actions() {
                best = best.max((u.value(a, p) - u.value(a, q)).abs() / dist);
            }
        }
        best
    }

    #[test]
    fn lipschitz_matches_sampled_ratio_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let weights: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..3).map(|_| rng.random_range(-0.3..0.3)).collect())
                .collect();
            let u = LinearUtility::from_raw(weights, vec![0.5; 3]).unwrap();
            let oracle = sampled_ratio_sup(&u, &mut rng);
            assert!((oracle - lipschitz_constant(&u)).abs() < 1e-9);
        }
    }

    #[test]
    fn range_validation_examples() {
        let u = LinearUtility::from_raw(vec![vec![1.0, 0.0]], vec![0.0]).unwrap();
        assert!(validate_utility_range(&u).unwrap().is_empty());

        let u = LinearUtility::from_raw(vec![vec![1.0, 1.0]], vec![0.0]).unwrap();
        let diags = validate_utility_range(&u).unwrap();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].vertex, vec![1, 1]);
        assert_eq!(diags[0].value, 2.0);

        let u = LinearUtility::from_raw(vec![vec![0.6, 0.6]], vec![-0.1]).unwrap();
        let diags = validate_utility_range(&u).unwrap();
        let got: Vec<(Vec<u8>, f64)> = diags.iter().map(|d| (d.vertex.clone(), d.value)).collect();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].0, vec![0, 0]);
        assert!((got[0].1 + 0.1).abs() < 1e-15);
        assert_eq!(got[1].0, vec![1, 1]);
        assert!((got[1].1 - 1.1).abs() < 1e-15);
        assert!(LinearUtility::new(vec![vec![0.6, 0.6]], vec![-0.1]).is_err());
    }

    #[test]
    fn range_validation_refuses_large_dimension() {
        let u = LinearUtility::from_raw(vec![vec![0.0; 21]], vec![0.5]).unwrap();
        assert!(validate_utility_range(&u).is_err());
    }

    fn utility_strategy() -> impl Strategy<Value = LinearUtility> {
        (1usize..4, 1usize..5).prop_flat_map(|(n, d)| {
            proptest::collection::vec(proptest::collection::vec(-0.12f64..0.12, d), n)
                .prop_map(move |w| LinearUtility::new(w, vec![0.5; n]).unwrap())
        })
    }

    proptest! {
        #[test]
        fn utility_is_affine_along_segments(u in utility_strategy(), alpha in 0.0f64..=1.0, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = u.dim();
            let y1: Vec<f64> = (0..d).map(|_| rng.random()).collect();
            let y2: Vec<f64> = (0..d).map(|_| rng.random()).collect();
            let mix: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
            for a in 0..u.num_actions() {
                let lhs = u.value(a, &mix);
                let rhs = alpha * u.value(a, &y1) + (1.0 - alpha) * u.value(a, &y2);
                prop_assert!((lhs - rhs).abs() <= 1e-12);
            }
        }

        #[test]
        fn utility_respects_lipschitz_bound(u in utility_strategy(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = u.dim();
            let y1: Vec<f64> = (0..d).map(|_| rng.random()).collect();
            let y2: Vec<f64> = (0..d).map(|_| rng.random()).collect();
            let dist = y1.iter().zip(&y2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            for a in 0..u.num_actions() {
                let diff = (u.value(a, &y1) - u.value(a, &y2)).abs();
                prop_assert!(diff <= lipschitz_constant(&u) * dist + 1e-12);
            }
        }
    }
}
