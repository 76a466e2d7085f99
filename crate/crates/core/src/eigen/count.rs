//! Exact eigenvalue counts of the infinite operator below a point under the
//! band. The left free half-line contributes the Schur complement `k I`, the
//! window is eliminated by `LDL^*`, and on the free right half-line the pivots
//! follow `z -> k + 1/k - 1/z`, which turns negative exactly once when it
//! starts in `(0, 1/k)` and never otherwise. Bisection on these counts gives
//! eigenvalues with no truncation at all.

use crate::eigen::block::{checked_quadratic, LDL_FLOOR};
use crate::linalg::{CMat, Pivot};
use crate::operator::{BlockJacobiOperator, JacobiOperator};

fn k_below(x: f64) -> f64 {
    let y = -x;
    0.5 * (y + ((y - 2.0) * (y + 2.0)).sqrt())
}

/// Number of eigenvalues of the infinite scalar operator below `x < -2`.
pub fn scalar_count_below(op: &JacobiOperator, x: f64) -> usize {
    let k = k_below(x);
    let tiny = f64::MIN_POSITIVE * 1e4;
    let mut d = k;
    let mut count = 0;
    for n in op.window_start()..=op.window_end() {
        let a = op.a(n - 1);
        d = op.b(n) - x - a * a / d;
        if d.abs() < tiny {
            d = -tiny;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    if d > 0.0 && d < 1.0 / k {
        count += 1;
    }
    count
}

fn try_block_count(op: &BlockJacobiOperator, x: f64) -> Option<usize> {
    let k = k_below(x);
    let m = op.block_dim();
    let (a_win, b_win) = (op.a_window(), op.b_window());
    let free_a = CMat::scalar(m, -1.0);
    let mut prev = Pivot::ldl(&CMat::scalar(m, k), LDL_FLOOR)?;
    let mut count = 0;
    for i in 0..=a_win.len() {
        let a = if i == 0 { &free_a } else { &a_win[i - 1] };
        let corr = checked_quadratic(&prev, a)?;
        let d = match b_win.get(i) {
            Some(b) => (&b.add_diag(-x) - &corr).hermitize(),
            None => corr.scale(-1.0).add_diag(-x),
        };
        let p = if i < a_win.len() {
            Pivot::ldl(&d, LDL_FLOOR).unwrap_or_else(|| Pivot::eigen(&d))
        } else {
            Pivot::eigen(&d)
        };
        if p.is_eigen() {
            let scale = d.max_abs().max(1.0);
            if p.weights().iter().any(|v| v.abs() <= 64.0 * f64::EPSILON * scale) {
                return None;
            }
        }
        count += p.negative_count();
        prev = p;
    }
    Some(count + prev.weights().iter().filter(|&&v| v > 0.0 && v < 1.0 / k).count())
}

/// Number of eigenvalues (with multiplicity) of the infinite block operator
/// below `x < -2`.
pub fn block_count_below(op: &BlockJacobiOperator, x: f64) -> usize {
    for attempt in 0..8 {
        let shift = x - x.abs() * f64::EPSILON * 64.0 * attempt as f64;
        if let Some(c) = try_block_count(op, shift) {
            return c;
        }
    }
    try_block_count(op, x - 1e-12 * x.abs()).unwrap_or(0)
}

/// Ascending eigenvalues in `[lo, hi)` given a monotone count of eigenvalues
/// below a point, `c_lo = count(lo)` and `c_hi = count(hi)`. Intervals are
/// split until each holds one eigenvalue or reaches machine resolution, so
/// counts near the top of the tree are shared between eigenvalues.
pub(crate) fn bisect_counts(lo: f64, hi: f64, c_lo: usize, c_hi: usize, count: impl Fn(f64) -> usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(c_hi.saturating_sub(c_lo));
    let mut stack = vec![(lo, hi, c_lo, c_hi)];
    while let Some((x, y, cx, cy)) = stack.pop() {
        if cy <= cx {
            continue;
        }
        let mid = 0.5 * (x + y);
        if mid <= x || mid >= y || y - x <= 2.0 * f64::EPSILON * x.abs().max(y.abs()) {
            out.extend(std::iter::repeat_n(mid, cy - cx));
            continue;
        }
        let cm = count(mid).clamp(cx, cy);
        // Upper half first so the lower half is popped first.
        stack.push((mid, y, cm, cy));
        stack.push((x, mid, cx, cm));
    }
    out
}

fn bisect_below(lower: f64, upper: f64, count: impl Fn(f64) -> usize) -> Vec<f64> {
    let total = count(upper);
    bisect_counts(lower, upper, 0, total, count)
}

/// Ascending eigenvalues of the infinite scalar operator below `upper < -2`.
pub fn scalar_eigenvalues_below(op: &JacobiOperator, upper: f64) -> Vec<f64> {
    let reach = op.b_window().iter().fold(0.0f64, |m, b| m.max(b.abs()))
        + 2.0 * op.a_window().iter().fold(1.0f64, |m, a| m.max(a.abs()));
    bisect_below(-reach - 1.0, upper, |x| scalar_count_below(op, x))
}

/// Ascending eigenvalues (repeated by multiplicity) of the infinite block
/// operator below `upper < -2`.
pub fn block_eigenvalues_below(op: &BlockJacobiOperator, upper: f64) -> Vec<f64> {
    let norm = |m: &CMat| m.frobenius_sq().sqrt();
    let reach = op.b_window().iter().fold(0.0f64, |m, b| m.max(norm(b)))
        + 2.0 * op.a_window().iter().fold(1.0f64, |m, a| m.max(norm(a)));
    bisect_below(-reach - 1.0, upper, |x| block_count_below(op, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::tridiagonal::sturm_count;
    use crate::linalg::C64;

    #[test]
    fn delta_count() {
        let op = JacobiOperator::new(0, vec![-1.0], vec![-3.0]).unwrap();
        let lambda = -13f64.sqrt();
        assert_eq!(scalar_count_below(&op, lambda - 1e-9), 0);
        assert_eq!(scalar_count_below(&op, lambda + 1e-9), 1);
        assert_eq!(scalar_count_below(&op, -2.0 - 1e-12), 1);
        assert_eq!(scalar_count_below(&JacobiOperator::free(), -2.0 - 1e-12), 0);
    }

    #[test]
    fn agrees_with_large_truncation() {
        let op = JacobiOperator::new(-3, vec![-0.9, -1.1, -1.0, -1.3, -0.8], vec![-1.0, 0.5, -2.0, 0.1, -0.4]).unwrap();
        let (_, d, e) = op.truncated_tridiagonal(400);
        for x in [-4.0, -3.0, -2.5, -2.1, -2.001] {
            assert_eq!(scalar_count_below(&op, x), sturm_count(&d, &e, x), "x = {x}");
        }
    }

    #[test]
    fn weakly_bound_state_is_counted() {
        // b = -0.01 at one site binds at -2 - O(1e-4 / 4), far beyond a short truncation.
        let op = JacobiOperator::new(0, vec![-1.0], vec![-0.01]).unwrap();
        let lambda = -(4.0f64 + 1e-4).sqrt();
        assert_eq!(scalar_count_below(&op, lambda + 1e-12), 1);
        assert_eq!(scalar_count_below(&op, lambda - 1e-12), 0);
    }

    #[test]
    fn block_matches_scalar_channels() {
        let b = CMat::from_fn(2, |i, j| C64::new(if i == j { [-3.0, -0.5][i] } else { 0.0 }, 0.0));
        let op = BlockJacobiOperator::new(0, 2, vec![CMat::scalar(2, -1.0)], vec![b]).unwrap();
        assert_eq!(block_count_below(&op, -2.0 - 1e-12), 2);
        assert_eq!(block_count_below(&op, -2.1), 1);
    }
}
