//! Inertia counting for block tridiagonal matrices through the block LDL^*
//! recurrence `D_i = B_i - x - A_{i-1}^* D_{i-1}^{-1} A_{i-1}`.

use crate::eigen::count::bisect_counts;
use crate::linalg::{CMat, Pivot};
use crate::operator::BlockJacobiOperator;

/// Pivots of a block below this fraction of its largest entry send the
/// inertia count to the eigen-decomposition fallback.
pub const LDL_FLOOR: f64 = 1e-6;

/// Pivot of a finite block `LDL^*` recurrence; `None` when it is numerically
/// singular and the count must be retried at a shifted point.
fn window_pivot(d: &CMat) -> Option<Pivot> {
    let p = Pivot::new(d, LDL_FLOOR);
    let tiny = f64::EPSILON * 4.0 * d.max_abs().max(1.0) * 1e-3;
    if p.is_eigen() && p.weights().iter().any(|v| v.abs() <= tiny) {
        return None;
    }
    Some(p)
}

/// `a^* D^{-1} a`, or `None` when it overflows.
pub(crate) fn checked_quadratic(p: &Pivot, a: &CMat) -> Option<CMat> {
    let q = p.quadratic(a);
    q.is_finite().then_some(q)
}

/// Block tridiagonal truncation stored site by site.
pub struct BlockTridiagonal {
    pub diag: Vec<CMat>,
    /// `upper[i]` couples site `i` to site `i + 1`.
    pub upper: Vec<CMat>,
}

impl BlockTridiagonal {
    pub fn from_operator(op: &BlockJacobiOperator, pad: usize) -> (i64, Self) {
        let first = op.window_start() - pad as i64;
        let last = op.window_end() + pad as i64;
        let diag = (first..last).map(|n| op.b(n)).collect();
        let upper = (first..last - 1).map(|n| op.a(n)).collect();
        (first, Self { diag, upper })
    }

    pub fn dim(&self) -> usize {
        self.diag.len() * self.diag.first().map_or(0, |m| m.dim())
    }

    /// Crude enclosure of the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let fro = |m: &CMat| m.frobenius_sq().sqrt();
        let mut r = 0.0f64;
        for i in 0..self.diag.len() {
            let left = if i > 0 { fro(&self.upper[i - 1]) } else { 0.0 };
            let right = self.upper.get(i).map_or(0.0, fro);
            r = r.max(fro(&self.diag[i]) + left + right);
        }
        (-r - 1.0, r + 1.0)
    }

    /// Number of eigenvalues below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut shift = x;
        for attempt in 0..8 {
            if let Some(c) = self.try_count(shift) {
                return c;
            }
            let bump = (x.abs().max(1.0)) * f64::EPSILON * 16.0 * (attempt + 1) as f64;
            shift = x - bump;
        }
        self.try_count(x - 1e-12 * x.abs().max(1.0)).unwrap_or(0)
    }

    fn try_count(&self, x: f64) -> Option<usize> {
        let mut count = 0;
        let mut prev: Option<Pivot> = None;
        for i in 0..self.diag.len() {
            let mut d = self.diag[i].add_diag(-x);
            if let Some(p) = &prev {
                d = &d - &checked_quadratic(p, &self.upper[i - 1])?;
            }
            let p = window_pivot(&d.hermitize())?;
            count += p.negative_count();
            prev = Some(p);
        }
        Some(count)
    }

    /// Eigenvalues in `(lo, hi)` by bisection on inertia counts.
    pub fn eigenvalues_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let (blo, bhi) = self.bounds();
        let lo = lo.max(blo);
        let hi = hi.min(bhi);
        if lo >= hi {
            return Vec::new();
        }
        bisect_counts(lo, hi, self.count_below(lo), self.count_below(hi), |x| self.count_below(x))
    }
}

/// Truncation of a block operator padded by `pad` free sites on each side.
/// The free sites are never stored: with `A = -I` and `B = 0` their LDL^*
/// pivots are Möbius images `d -> -x - 1/d` of a scalar on the left and of
/// the eigenvalues of one Hermitian pivot on the right.
pub struct PaddedTruncation {
    pad: usize,
    window: BlockTridiagonal,
    /// Coupling from the last window site to the first right free site.
    exit: CMat,
}

impl PaddedTruncation {
    pub fn from_operator(op: &BlockJacobiOperator, pad: usize) -> Self {
        let (_, window) = BlockTridiagonal::from_operator(op, 0);
        Self {
            pad,
            window,
            exit: op.a(op.window_end() - 1),
        }
    }

    fn block_dim(&self) -> usize {
        self.exit.dim()
    }

    pub fn dim(&self) -> usize {
        self.window.dim() + 2 * self.pad * self.block_dim()
    }

    pub fn bounds(&self) -> (f64, f64) {
        let (lo, hi) = self.window.bounds();
        let exit = self.exit.frobenius_sq().sqrt();
        let free = 2.0 * (self.block_dim() as f64).sqrt() + exit;
        (lo.min(-free) - free, hi.max(free) + free)
    }

    pub fn count_below(&self, x: f64) -> usize {
        let mut shift = x;
        for attempt in 0..8 {
            if let Some(c) = self.try_count(shift) {
                return c;
            }
            let bump = (x.abs().max(1.0)) * f64::EPSILON * 16.0 * (attempt + 1) as f64;
            shift = x - bump;
        }
        self.try_count(x - 1e-12 * x.abs().max(1.0)).unwrap_or(0)
    }

    fn try_count(&self, x: f64) -> Option<usize> {
        let m = self.block_dim();
        let tiny = f64::EPSILON * x.abs().max(1.0) * 1e-3;
        let mut count = 0;
        let scalar_pivot = |d: f64| -> Option<f64> {
            if d.abs() <= tiny {
                return None;
            }
            Some(-x - 1.0 / d)
        };
        // Left free sites; the pivot entering the window is 1/d times I.
        let mut inv_left = None;
        let mut d = -x;
        for _ in 0..self.pad {
            if d < 0.0 {
                count += m;
            }
            inv_left = Some(1.0 / d);
            d = scalar_pivot(d)?;
        }
        let mut prev: Option<Pivot> = None;
        for i in 0..self.window.diag.len() {
            let mut d = self.window.diag[i].add_diag(-x);
            if let Some(p) = &prev {
                d = &d - &checked_quadratic(p, &self.window.upper[i - 1])?;
            } else if let Some(s) = inv_left {
                d = d.add_diag(-s);
            }
            let p = window_pivot(&d.hermitize())?;
            count += p.negative_count();
            prev = Some(p);
        }
        if self.pad == 0 {
            return Some(count);
        }
        let first = match &prev {
            Some(p) => checked_quadratic(p, &self.exit)?.scale(-1.0).add_diag(-x),
            None => CMat::scalar(m, -x - inv_left.unwrap_or(0.0)),
        };
        let (mut mu, _) = first.hermitize().hermitian_eigen();
        for step in 0..self.pad {
            for v in mu.iter_mut() {
                if *v < 0.0 {
                    count += 1;
                }
                if step + 1 < self.pad {
                    *v = scalar_pivot(*v)?;
                } else if v.abs() <= tiny {
                    return None;
                }
            }
        }
        Some(count)
    }

    /// Eigenvalues in `(lo, hi)` by bisection on inertia counts.
    pub fn eigenvalues_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let (blo, bhi) = self.bounds();
        let lo = lo.max(blo);
        let hi = hi.min(bhi);
        if lo >= hi {
            return Vec::new();
        }
        bisect_counts(lo, hi, self.count_below(lo), self.count_below(hi), |x| self.count_below(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Operator;
    use crate::verify::{random_operator, RandomOperatorSpec};

    #[test]
    fn padded_truncation_counts_match_stored_truncation() {
        for (trial, m) in [(0, 2), (1, 3), (2, 2), (3, 3)] {
            let spec = RandomOperatorSpec {
                block_dim: m,
                offdiag_jitter: 0.3,
                potential_scale: 1.5,
                seed: 11,
                window_half_width: 2,
            };
            let Operator::Block(op) = random_operator(&spec, trial).unwrap() else {
                panic!("expected block operator");
            };
            for pad in [0, 1, 5, 40] {
                let padded = PaddedTruncation::from_operator(&op, pad);
                let (_, stored) = BlockTridiagonal::from_operator(&op, pad);
                assert_eq!(padded.dim(), stored.dim());
                for i in 0..60 {
                    let x = -6.0 + 0.2 * i as f64 + 0.013;
                    assert_eq!(padded.count_below(x), stored.count_below(x), "m {m} pad {pad} x {x}");
                }
            }
        }
    }

    #[test]
    fn empty_window_is_free_chain() {
        let op = BlockJacobiOperator::free(2);
        let padded = PaddedTruncation::from_operator(&op, 10);
        // Free chain of 20 sites: eigenvalues 2 cos(j pi / 21), each twice.
        let expected = (1..=20).filter(|j| 2.0 * (*j as f64 * std::f64::consts::PI / 21.0).cos() < 0.5).count();
        assert_eq!(padded.count_below(0.5), 2 * expected);
    }
}
