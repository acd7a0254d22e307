use crate::domain::{ActionSet, LinearUtility};

/// Constrained best response: `argmax_{a in feasible} u(a, p)`.
///
/// Ties go to the lowest action index. Returns `None` when `feasible` is empty.
#[inline]
pub fn constrained_best_response(
    utility: &LinearUtility,
    feasible: ActionSet,
    p: &[f64],
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for a in feasible {
        let v = utility.value(a, p);
        match best {
            Some((_, bv)) if v <= bv => {}
            _ => best = Some((a, v)),
        }
    }
    best.map(|(a, _)| a)
}
