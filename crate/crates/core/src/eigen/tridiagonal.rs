//! Sturm-sequence bisection for real symmetric tridiagonal matrices.

/// Smallest pivot magnitude allowed in the LDL^T recurrence.
fn pivmin(off: &[f64]) -> f64 {
    let emax = off.iter().fold(1.0f64, |m, e| m.max(e * e));
    f64::MIN_POSITIVE * emax * 4.0
}

/// Number of eigenvalues below `x`; an exact tie counts as below.
/// Zero off-diagonals are allowed.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    sturm_count_with(diag, off, x, pivmin(off))
}

fn sturm_count_with(diag: &[f64], off: &[f64], x: f64, pmin: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 {
            d - x
        } else {
            let e = off[i - 1];
            d - x - e * e / q
        };
        if q.abs() < pmin {
            q = -pmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval containing the whole spectrum.
pub fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// Eigenvalues in the open interval `(lo, hi)`, ascending, each refined by
/// bisection until the bracket reaches machine precision.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let n = diag.len();
    if n == 0 || lo >= hi {
        return Vec::new();
    }
    assert_eq!(off.len() + 1, n, "off-diagonal length must be n - 1");
    let pmin = pivmin(off);
    let (glo, ghi) = gershgorin(diag, off);
    let span = (ghi - glo).abs().max(1.0);
    let lo = lo.max(glo - span * f64::EPSILON - pmin);
    let hi = hi.min(ghi + span * f64::EPSILON + pmin);
    if lo >= hi {
        return Vec::new();
    }
    let c_lo = sturm_count_with(diag, off, lo, pmin);
    let c_hi = sturm_count_with(diag, off, hi, pmin);
    let mut out = Vec::with_capacity(c_hi.saturating_sub(c_lo));
    for j in c_lo..c_hi {
        // Find x with count(x) <= j < count(y), shrinking [x, y].
        let (mut x, mut y) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (x + y);
            if mid <= x || mid >= y {
                break;
            }
            let tolerance = 2.0 * f64::EPSILON * x.abs().max(y.abs()) + pmin;
            if y - x <= tolerance {
                break;
            }
            if sturm_count_with(diag, off, mid, pmin) > j {
                y = mid;
            } else {
                x = mid;
            }
        }
        out.push(0.5 * (x + y));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_matrix_matches_cosines() {
        let n = 50;
        let d = vec![0.0; n];
        let e = vec![-1.0; n - 1];
        let vals = tridiagonal_eigenvalues(&d, &e, -3.0, 3.0);
        assert_eq!(vals.len(), n);
        for (j, v) in vals.iter().enumerate() {
            let exact = -2.0 * (std::f64::consts::PI * (j + 1) as f64 / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 4e-16 * 2.0 * 4.0, "{v} vs {exact}");
        }
    }

    #[test]
    fn zero_off_diagonals_split() {
        let d = vec![3.0, -1.0, 5.0, 0.5];
        let e = vec![0.0, 0.0, 0.0];
        let vals = tridiagonal_eigenvalues(&d, &e, -10.0, 10.0);
        for (v, x) in vals.iter().zip([-1.0, 0.5, 3.0, 5.0]) {
            assert!((v - x).abs() < 1e-14);
        }
        assert_eq!(sturm_count(&d, &e, 0.0), 1);
    }

    #[test]
    fn interval_selects_eigenvalues() {
        let d = vec![1.0, 2.0];
        let e = vec![0.0];
        assert_eq!(tridiagonal_eigenvalues(&d, &e, 1.5, 2.5).len(), 1);
        assert_eq!(tridiagonal_eigenvalues(&d, &e, 0.5, 2.5).len(), 2);
    }

    #[test]
    fn repeated_eigenvalues_are_counted() {
        let d = vec![2.0, 2.0, 2.0];
        let e = vec![0.0, 0.0];
        let vals = tridiagonal_eigenvalues(&d, &e, 0.0, 4.0);
        assert_eq!(vals.len(), 3);
        assert!(vals.iter().all(|v| (v - 2.0).abs() < 1e-14));
    }
}
