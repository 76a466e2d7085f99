//! Dense Hermitian eigensolver: Householder reduction to a real tridiagonal
//! followed by implicit QL with accumulated vectors.

use crate::linalg::{CMat, C64};

/// Implicit-shift QL on the symmetric tridiagonal `(d, e)` where `e[i]`
/// couples `i` and `i + 1`. Rotations are accumulated into the columns of `z`.
/// Returns `false` if some eigenvalue needed more than 200 sweeps.
pub fn tql2(d: &mut [f64], e: &mut [f64], mut z: Option<&mut CMat>) -> bool {
    let n = d.len();
    if n == 0 {
        return true;
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m] == 0.0 {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                return false;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[(k, i + 1)];
                        z[(k, i + 1)] = z[(k, i)] * s + f * c;
                        z[(k, i)] = z[(k, i)] * c - f * s;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    true
}

/// Reduces a Hermitian matrix to real symmetric tridiagonal form
/// `H = Q T Q^*`; returns `(diag, offdiag, Q)`.
pub fn tridiagonalize(h: &CMat) -> (Vec<f64>, Vec<f64>, CMat) {
    let n = h.dim();
    let mut a = h.clone();
    let mut q = CMat::identity(n);
    let zero = C64::new(0.0, 0.0);
    for k in 0..n.saturating_sub(2) {
        if (k + 2..n).all(|i| a[(i, k)] == zero) {
            continue;
        }
        // The reflector is invariant under scaling of u; scaling by the
        // largest entry keeps the squares away from underflow.
        let scale = (k + 1..n).map(|i| a[(i, k)].norm()).fold(0.0, f64::max);
        let xnorm: f64 = (k + 1..n).map(|i| (a[(i, k)] / scale).norm_sqr()).sum::<f64>().sqrt();
        let alpha = a[(k + 1, k)];
        let phase = if alpha.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            alpha / alpha.norm()
        };
        // u = x / scale + phase |x / scale| e1, reflector P = I - beta u u^*.
        let mut u = vec![zero; n];
        for i in k + 1..n {
            u[i] = a[(i, k)] / scale;
        }
        u[k + 1] += phase * xnorm;
        let unorm2: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        let beta = 2.0 / unorm2;
        // p = beta A u over the trailing block (rows k..n to include column k).
        let mut p = vec![zero; n];
        for i in k..n {
            let mut s = zero;
            for j in k + 1..n {
                s += a[(i, j)] * u[j];
            }
            p[i] = s * beta;
        }
        let vp: C64 = (k + 1..n).map(|i| u[i].conj() * p[i]).sum();
        let kk = 0.5 * beta * vp.re;
        let qv: Vec<C64> = (0..n).map(|i| p[i] - u[i] * kk).collect();
        for i in k..n {
            for j in k..n {
                let upd = u[i] * qv[j].conj() + qv[i] * u[j].conj();
                a[(i, j)] -= upd;
            }
        }
        // Column/row k beyond the subdiagonal are annihilated exactly.
        for i in k + 2..n {
            a[(i, k)] = zero;
            a[(k, i)] = zero;
        }
        // Q <- Q P
        for r in 0..n {
            let s: C64 = (k + 1..n).map(|j| q[(r, j)] * u[j]).sum();
            let s = s * beta;
            for j in k + 1..n {
                let upd = s * u[j].conj();
                q[(r, j)] -= upd;
            }
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut off = vec![0.0; n];
    let mut phase = C64::new(1.0, 0.0);
    let mut phases = vec![phase; n];
    for i in 0..n.saturating_sub(1) {
        let e = a[(i + 1, i)];
        off[i] = e.norm();
        if off[i] > 0.0 {
            phase *= e / off[i];
        }
        phases[i + 1] = phase;
    }
    for r in 0..n {
        for j in 0..n {
            q[(r, j)] *= phases[j];
        }
    }
    (diag, off, q)
}

/// Ascending eigenvalues and orthonormal eigenvectors (as columns) of a
/// Hermitian matrix.
pub fn hermitian_eigen(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.dim();
    let (mut d, mut e, mut z) = tridiagonalize(h);
    let ok = tql2(&mut d, &mut e, Some(&mut z));
    debug_assert!(ok, "QL iteration failed to converge");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let vals = order.iter().map(|&i| d[i]).collect();
    let vecs = CMat::from_fn(n, |r, c| z[(r, order[c])]);
    (vals, vecs)
}

/// Ascending eigenvalues of a real symmetric tridiagonal matrix together with
/// the first component of each normalized eigenvector.
pub fn tridiagonal_eigen_first_components(diag: &[f64], off: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.resize(n, 0.0);
    let mut z = CMat::identity(n);
    let ok = tql2(&mut d, &mut e, Some(&mut z));
    debug_assert!(ok, "QL iteration failed to converge");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let vals = order.iter().map(|&i| d[i]).collect();
    let first = order.iter().map(|&i| z[(0, i)].norm()).collect();
    (vals, first)
}
