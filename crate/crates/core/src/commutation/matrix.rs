use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{flip_spectrum, spectrum_shrinks, CommutationReport, IdentityResiduals, MATRIX_IDENTITY_TOL};
use crate::eigen::block::BlockTridiagonal;
use crate::eigen::{block_eigen, decay_padding, SpectralPoint, SpectrumResult, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::functional::k_functional;
use crate::linalg::{CMat, C64};
use crate::operator::{BlockJacobiOperator, Operator};

/// Eigenvalue floor for `F(n)` before taking square roots.
pub const PD_FLOOR: f64 = 1e-13;
/// Eigenvalues of `F` this close to `1/k` count as snapped channels.
pub const SNAP_WINDOW: f64 = 1e-6;
/// Per-site bound on the Riccati residual.
pub const RICCATI_TOL: f64 = 1e-9;
const CUT_TOL: f64 = 1e-15;
const MAX_CONTINUATION: usize = 100_000;
const RENORMALIZE_EVERY: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceLimit {
    pub power: i32,
    pub observed: f64,
    /// `m1 k^-p + (m - m1) k^p`.
    pub expected: f64,
}

/// The sequence `F(n) = -A(n) Phi(n+1) Phi(n)^-1` on `[first_site, cut_site]`
/// and its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiccatiChain {
    pub first_site: i64,
    /// First site at which the output coefficients are free.
    pub cut_site: i64,
    /// Number of eigenvalues of `F` pinned to `1/k` at the right edge.
    pub snapped: usize,
    /// Eigenvalues of `F(window_end)` within `SNAP_WINDOW` of `1/k`.
    pub near_snap_count: usize,
    pub snap_deviation: f64,
    /// Gap between the smallest unsnapped eigenvalue and `1/k`.
    pub separation: Option<f64>,
    /// Largest `|A^* F(n-1)^-1 A + F(n) - B + lambda|` over the window.
    pub riccati_residual: f64,
    /// Largest gap between `F` and the naive forward Riccati recursion, which
    /// loses the decaying channel on long windows.
    pub forward_deviation: f64,
    /// Distance of the unsnapped eigenvalues from `k` at the cut, relative to `k`.
    pub cut_residual: f64,
    pub limit_traces: Vec<TraceLimit>,
    #[serde(skip)]
    pub f: Vec<CMat>,
    /// Columns of the matrix solution at each window site, normalized.
    #[serde(skip)]
    pub solution: Vec<CMat>,
}

impl RiccatiChain {
    pub fn f_at(&self, n: i64) -> Option<&CMat> {
        usize::try_from(n - self.first_site).ok().and_then(|i| self.f.get(i))
    }
}

type Vector = Vec<Vec<C64>>;

fn inner(x: &Vector, y: &Vector) -> C64 {
    x.iter()
        .zip(y)
        .flat_map(|(u, v)| u.iter().zip(v).map(|(a, b)| a.conj() * b))
        .sum()
}

fn factor_shifted(bt: &BlockTridiagonal, sigma: f64) -> Option<Vec<CMat>> {
    let mut dinv: Vec<CMat> = Vec::with_capacity(bt.diag.len());
    for i in 0..bt.diag.len() {
        let mut d = bt.diag[i].add_diag(-sigma);
        if i > 0 {
            let a = &bt.upper[i - 1];
            d = &d - &(&(&a.adjoint() * &dinv[i - 1]) * a);
        }
        let d = d.hermitize();
        if !d.is_finite() || d.hermitian_eigen().0[0] <= 0.0 {
            return None;
        }
        dinv.push(d.inverse()?);
    }
    Some(dinv)
}

fn solve_factored(bt: &BlockTridiagonal, dinv: &[CMat], y: &Vector) -> Vector {
    let n = y.len();
    let mut z = y.clone();
    for i in 1..n {
        let t = bt.upper[i - 1].adjoint().mul_vec(&dinv[i - 1].mul_vec(&z[i - 1]));
        z[i].iter_mut().zip(t).for_each(|(a, b)| *a -= b);
    }
    let mut x = vec![Vec::new(); n];
    x[n - 1] = dinv[n - 1].mul_vec(&z[n - 1]);
    for i in (0..n - 1).rev() {
        let t = bt.upper[i].mul_vec(&x[i + 1]);
        let r: Vec<C64> = z[i].iter().zip(t).map(|(a, b)| a - b).collect();
        x[i] = dinv[i].mul_vec(&r);
    }
    x
}

/// Orthonormal basis of the bottom eigenspace of the truncation, by subspace
/// inverse iteration at a shift just below `lambda` (where the block LDL^*
/// factorization is a Cholesky factorization).
fn bottom_eigenvectors(op: &BlockJacobiOperator, lambda: f64, copies: usize, pad: usize) -> Result<(i64, Vec<Vector>)> {
    let (first, bt) = BlockTridiagonal::from_operator(op, pad);
    let m = op.block_dim();
    let mut dinv = None;
    for e in 0..6 {
        let sigma = lambda - 1e-10 * 10f64.powi(e) * lambda.abs().max(1.0);
        if let Some(d) = factor_shifted(&bt, sigma) {
            dinv = Some(d);
            break;
        }
    }
    let dinv = dinv.ok_or(Error::NotPositiveDefinite {
        site: first,
        min_eigenvalue: f64::NAN,
    })?;
    let sites = bt.diag.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0b10c);
    let mut basis: Vec<Vector> = (0..copies)
        .map(|_| {
            (0..sites)
                .map(|_| (0..m).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect())
                .collect()
        })
        .collect();
    for _ in 0..4 {
        let mut next: Vec<Vector> = Vec::with_capacity(copies);
        for v in &basis {
            let mut x = solve_factored(&bt, &dinv, v);
            for q in &next {
                let c = inner(q, &x);
                x.iter_mut()
                    .zip(q)
                    .for_each(|(xs, qs)| xs.iter_mut().zip(qs).for_each(|(a, b)| *a -= c * b));
            }
            let norm = inner(&x, &x).re.sqrt();
            x.iter_mut().for_each(|xs| xs.iter_mut().for_each(|a| *a /= norm));
            next.push(x);
        }
        basis = next;
    }
    Ok((first, basis))
}

/// A bound solution on `[s - 1, e1 + 1]` as unit directions and log norms.
struct BoundColumn {
    dirs: Vec<Vec<C64>>,
    log_norm: Vec<f64>,
}

fn unit(v: Vec<C64>) -> (Vec<C64>, f64) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    (v.iter().map(|z| z / norm).collect(), norm.ln())
}

/// Rebuilds each bound column from its peak outward: rightward with the
/// Riccati map of the right-decaying solutions (computed backward), leftward
/// with that of the left-decaying ones (computed forward). The eigenvector is
/// only trusted near its peak; far out it is below rounding.
fn propagate_bound(op: &BlockJacobiOperator, lambda: f64, k: f64, peaks: &[(i64, Vec<C64>)]) -> Result<Vec<BoundColumn>> {
    let m = op.block_dim();
    let s = op.window_start();
    let e1 = op.window_end();
    let lo = peaks.iter().map(|p| p.0).min().unwrap_or(s - 1);
    let hi = peaks.iter().map(|p| p.0).max().unwrap_or(e1 + 1);
    let singular = |site: i64| Error::NotPositiveDefinite {
        site,
        min_eigenvalue: 0.0,
    };
    // right[n - (s - 1)] = D(n + 1) D(n)^-1 for right-decaying D.
    let mut right = vec![CMat::scalar(m, 1.0 / k); (e1 - s + 3) as usize];
    for n in (lo + 1..=e1 + 1).rev() {
        let shifted = &op.b(n).scale(-1.0).add_diag(lambda) - &(&op.a(n) * &right[(n - (s - 1)) as usize]);
        let back = &op.a(n - 1).adjoint().inverse().ok_or_else(|| singular(n - 1))? * &shifted;
        right[(n - 1 - (s - 1)) as usize] = back.inverse().ok_or_else(|| singular(n - 1))?;
    }
    // left[n - (s - 1)] = D(n - 1) D(n)^-1 for left-decaying D.
    let mut left = vec![CMat::scalar(m, 1.0 / k); (e1 - s + 3) as usize];
    for n in s - 1..hi {
        let shifted = &op.b(n).scale(-1.0).add_diag(lambda) - &(&op.a(n - 1).adjoint() * &left[(n - (s - 1)) as usize]);
        let fwd = &op.a(n).inverse().ok_or_else(|| singular(n))? * &shifted;
        left[(n + 1 - (s - 1)) as usize] = fwd.inverse().ok_or_else(|| singular(n))?;
    }
    let len = (e1 - s + 3) as usize;
    Ok(peaks
        .iter()
        .map(|(p, v)| {
            let ip = (p - (s - 1)) as usize;
            let mut dirs = vec![Vec::new(); len];
            let mut log_norm = vec![0.0; len];
            dirs[ip] = unit(v.clone()).0;
            for i in ip + 1..len {
                let (d, l) = unit(right[i - 1].mul_vec(&dirs[i - 1]));
                dirs[i] = d;
                log_norm[i] = log_norm[i - 1] + l;
            }
            for i in (0..ip).rev() {
                let (d, l) = unit(left[i + 1].mul_vec(&dirs[i + 1]));
                dirs[i] = d;
                log_norm[i] = log_norm[i + 1] + l;
            }
            BoundColumn { dirs, log_norm }
        })
        .collect())
}

fn check_pd(f: &CMat, site: i64) -> Result<(Vec<f64>, CMat)> {
    let (vals, vecs) = f.hermitian_eigen();
    if !(vals[0] > PD_FLOOR) {
        return Err(Error::NotPositiveDefinite {
            site,
            min_eigenvalue: vals[0],
        });
    }
    Ok((vals, vecs))
}

/// Columns normalized to unit length; the same factors are applied to `y`.
fn normalize_pair(x: &mut [Vec<C64>], y: &mut [Vec<C64>]) {
    for (cx, cy) in x.iter_mut().zip(y.iter_mut()) {
        let norm = cx.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cx.iter_mut().for_each(|z| *z /= norm);
        cy.iter_mut().for_each(|z| *z /= norm);
    }
}

/// Removes the bottom eigenvalue `point` (with all `point.multiplicity`
/// copies) from a block operator.
pub fn matrix_step(op: &BlockJacobiOperator, point: SpectralPoint) -> Result<CommutationReport> {
    let before = block_eigen(op, DEFAULT_TOL)?;
    step_with_spectrum(op, point, &before)
}

fn step_with_spectrum(op: &BlockJacobiOperator, point: SpectralPoint, before: &SpectrumResult) -> Result<CommutationReport> {
    let m = op.block_dim();
    let m1 = point.multiplicity;
    if !point.is_below_band() {
        return Err(Error::DomainError("matrix_step removes an eigenvalue below -2".into()));
    }
    if m1 == 0 || m1 > m {
        return Err(Error::DomainError(format!("multiplicity {m1} outside 1..={m}")));
    }
    if op.is_empty() {
        return Err(Error::NoEigenvalue);
    }
    let k = point.k;
    let lambda = point.lambda;
    let s = op.window_start();
    let e1 = op.window_end();
    let (first, bound) = bottom_eigenvectors(op, lambda, m1, before.truncation_used.max(decay_padding(k)))?;
    let peaks: Vec<(i64, Vec<C64>)> = bound
        .iter()
        .map(|v| {
            let n = (s - 1..=e1 + 1)
                .max_by(|&x, &y| {
                    let norm = |n: i64| v[(n - first) as usize].iter().map(|z| z.norm_sqr()).sum::<f64>();
                    norm(x).total_cmp(&norm(y))
                })
                .expect("window is nonempty");
            (n, v[(n - first) as usize].clone())
        })
        .collect();
    let bound = propagate_bound(op, lambda, k, &peaks)?;
    let psi = |j: usize, n: i64| bound[j].dirs[(n - (s - 1)) as usize].clone();

    // Complement of the bound directions at s - 1, continued forward. These
    // columns grow to the right, so the forward recursion is stable for them.
    let projector = CMat::from_fn(m, |i, l| (0..m1).map(|j| psi(j, s - 1)[i] * psi(j, s - 1)[l].conj()).sum());
    let (_, pv) = projector.hermitian_eigen();
    let mut prev: Vec<Vec<C64>> = (0..m - m1).map(|c| (0..m).map(|i| pv[(i, c)] / k).collect()).collect();
    let mut cur: Vec<Vec<C64>> = prev.iter().map(|v| v.iter().map(|z| z * k).collect()).collect();
    let mut grow = vec![cur.clone()];
    let mut log_scale = vec![0.0];
    let mut scale = 0.0;
    for (step, n) in (s - 1..=e1).enumerate() {
        let a_inv = op.a(n).inverse().ok_or(Error::SingularOffDiagonal {
            index: n,
            condition: f64::INFINITY,
        })?;
        let lhs = op.b(n).scale(-1.0).add_diag(lambda);
        let a_prev_adj = op.a(n - 1).adjoint();
        let mut next: Vec<Vec<C64>> = cur
            .iter()
            .zip(&prev)
            .map(|(c, p)| {
                let r: Vec<C64> = lhs.mul_vec(c).iter().zip(a_prev_adj.mul_vec(p)).map(|(x, y)| x - y).collect();
                a_inv.mul_vec(&r)
            })
            .collect();
        if next.iter().flatten().any(|z| !z.is_finite()) {
            return Err(Error::RecursionOverflow { site: n + 1 });
        }
        prev = cur;
        if (step + 1) % RENORMALIZE_EVERY == 0 {
            let d = next.iter().chain(&prev).flatten().fold(0.0f64, |acc, z| acc.max(z.norm()));
            if d > 0.0 {
                next.iter_mut().chain(prev.iter_mut()).flatten().for_each(|z| *z /= d);
                scale += d.ln();
            }
        }
        cur = next;
        grow.push(cur.clone());
        log_scale.push(scale);
    }
    // grow[i] and log_scale[i] refer to site s - 1 + i; bound columns are
    // scaled relative to their size at `base`.
    let columns = |n: i64, base: i64, rel: f64| -> Vec<Vec<C64>> {
        let i = (n - (s - 1)) as usize;
        let ib = (base - (s - 1)) as usize;
        let factor = (log_scale[i] - rel).exp();
        bound
            .iter()
            .map(|c| {
                let f = (c.log_norm[i] - c.log_norm[ib]).exp();
                c.dirs[i].iter().map(|z| z * f).collect()
            })
            .chain(grow[i].iter().map(|v| v.iter().map(|z| z * factor).collect()))
            .collect()
    };

    let mut f = vec![CMat::scalar(m, k)];
    let mut solution = vec![CMat::identity(m)];
    for n in s..=e1 {
        let rel = log_scale[(n - (s - 1)) as usize];
        let mut x = columns(n, n, rel);
        let mut y = columns(n + 1, n, rel);
        normalize_pair(&mut x, &mut y);
        let xm = CMat::from_columns(&x);
        let x_inv = xm.inverse().ok_or(Error::NotPositiveDefinite {
            site: n,
            min_eigenvalue: 0.0,
        })?;
        let fn_ = (&(&op.a(n) * &CMat::from_columns(&y)) * &x_inv).scale(-1.0).hermitize();
        check_pd(&fn_, n)?;
        f.push(fn_);
        solution.push(xm);
    }

    let mut riccati_residual = 0.0f64;
    let mut forward_deviation = 0.0f64;
    let mut naive = Some(CMat::scalar(m, k));
    for n in s..=e1 {
        let i = (n - (s - 1)) as usize;
        let a = op.a(n - 1);
        let coupling = |prev: &CMat| prev.inverse().map(|inv| &(&a.adjoint() * &inv) * &a);
        let target = op.b(n).add_diag(-lambda);
        let c = coupling(&f[i - 1]).ok_or(Error::NotPositiveDefinite {
            site: n - 1,
            min_eigenvalue: 0.0,
        })?;
        riccati_residual = riccati_residual.max((&(&c + &f[i]) - &target).max_abs());
        naive = naive.as_ref().and_then(coupling).map(|c| (&target - &c).hermitize());
        forward_deviation = forward_deviation.max(
            naive
                .as_ref()
                .map_or(f64::INFINITY, |g| (g - &f[i]).max_abs() / f[i].max_abs().max(1.0)),
        );
    }
    let b_scale = 1.0 + k + op.b_window().iter().map(CMat::max_abs).fold(0.0, f64::max);
    if riccati_residual > RICCATI_TOL * b_scale {
        return Err(Error::IdentityViolation {
            identity: "riccati",
            residual: riccati_residual,
            scale: b_scale,
        });
    }

    // Snap the bound channels at the right edge and continue analytically:
    // to the right of the window F(n + 1) = k + 1/k - F(n)^-1.
    let (raw, u) = f.last().expect("window is nonempty").hermitian_eigen();
    let inv_k = 1.0 / k;
    let snap_deviation = raw[..m1].iter().map(|v| (v - inv_k).abs()).fold(0.0, f64::max);
    let near_snap_count = raw.iter().filter(|v| (*v - inv_k).abs() < SNAP_WINDOW).count();
    let separation = raw.get(m1).map(|v| v - inv_k);
    let mut mu = raw.clone();
    mu[..m1].iter_mut().for_each(|v| *v = inv_k);
    let limit: Vec<f64> = (0..m).map(|i| if i < m1 { inv_k } else { k }).collect();
    // Rounding moves the fixed point of the computed map off k by up to
    // eps k / (1 - 1/k^2); stop there as well.
    let stall = 4.0 * f64::EPSILON * k / (1.0 - 1.0 / (k * k));
    let unconverged = |mu: &[f64]| mu[m1..].iter().any(|v| (v - k).abs() >= (CUT_TOL * k).max(stall));
    let mut steps = 0;
    *f.last_mut().expect("window is nonempty") = CMat::reassemble(&u, &mu);
    while unconverged(&mu) && steps < MAX_CONTINUATION {
        for v in &mut mu[m1..] {
            *v = k + inv_k - 1.0 / *v;
        }
        steps += 1;
        f.push(CMat::reassemble(&u, &mu));
    }
    let cut_residual = mu[m1..].iter().map(|v| (v - k).abs() / k).fold(0.0, f64::max);
    let limit_traces = [1, 2, -1, -2]
        .into_iter()
        .map(|p| TraceLimit {
            power: p,
            observed: raw[..m1].iter().chain(&mu[m1..]).map(|v| v.powi(p)).sum(),
            expected: m1 as f64 * k.powi(-p) + (m - m1) as f64 * k.powi(p),
        })
        .collect();
    *f.last_mut().expect("nonempty") = CMat::reassemble(&u, &limit);
    let cut_site = e1 + steps as i64;

    let mut a1 = Vec::new();
    let mut b1 = Vec::new();
    let mut roots = Vec::with_capacity(f.len());
    for (i, fi) in f.iter().enumerate() {
        let (vals, vecs) = check_pd(fi, s - 1 + i as i64)?;
        let half = CMat::reassemble(&vecs, &vals.iter().map(|v| v.sqrt()).collect::<Vec<_>>());
        let neg_half = CMat::reassemble(&vecs, &vals.iter().map(|v| 1.0 / v.sqrt()).collect::<Vec<_>>());
        roots.push((half, neg_half));
    }
    for n in s - 1..cut_site {
        let i = (n - (s - 1)) as usize;
        let a = op.a(n);
        let neg_half = &roots[i].1;
        a1.push(&(neg_half * &a) * &roots[i + 1].0);
        let b = &(&(&(neg_half * &a) * &a.adjoint()) * neg_half) + &f[i];
        b1.push(b.add_diag(lambda).hermitize());
    }
    let transformed = BlockJacobiOperator::new(s - 1, m, a1, b1)?;

    let mf = m1 as f64;
    let sum = transformed.sum_tr_b_sq()
        - (op.sum_tr_b_sq()
            + mf * (1.0 / (k * k) - k * k)
            + 2.0 * (op.sum_tr_aa_minus_id() - transformed.sum_tr_aa_minus_id()));
    let product = transformed.sum_log_det_aa() - op.sum_log_det_aa() + 2.0 * mf * point.log_k();
    let residuals = IdentityResiduals {
        product,
        scale: 1.0 + op.size_scale() + mf * k * k,
        sum,
    };
    if !residuals.within(MATRIX_IDENTITY_TOL) {
        let (identity, residual) = if sum.abs() > product.abs() { ("sum", sum) } else { ("product", product) };
        return Err(Error::IdentityViolation {
            identity,
            residual,
            scale: residuals.scale,
        });
    }
    let after = block_eigen(&transformed, DEFAULT_TOL)?;
    let (removed_only, mismatch) = spectrum_shrinks(before, &after, lambda, m1);
    Ok(CommutationReport {
        identity_residuals: residuals,
        input_eigenvalue: point,
        output_spectrum: after,
        removed_only,
        riccati: Some(RiccatiChain {
            first_site: s - 1,
            cut_site,
            snapped: m1,
            near_snap_count,
            snap_deviation,
            separation,
            riccati_residual,
            forward_deviation,
            cut_residual,
            limit_traces,
            f,
            solution,
        }),
        spectrum_mismatch: mismatch,
        transformed: Operator::Block(transformed),
    })
}

fn top_with_spectrum(op: &BlockJacobiOperator, point: SpectralPoint, before: &SpectrumResult) -> Result<CommutationReport> {
    let flipped_point = SpectralPoint::from_lambda(-point.lambda, point.multiplicity)?;
    let mut report = step_with_spectrum(&op.sign_flip_conjugate(), flipped_point, &flip_spectrum(before)?)?;
    report.input_eigenvalue = point;
    report.output_spectrum = flip_spectrum(&report.output_spectrum)?;
    report.transformed = report.transformed.sign_flip_conjugate();
    Ok(report)
}

/// Discarded deviations when an operator is cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutReport {
    pub cut_site: i64,
    /// Largest entry of `A(n) + I` over the discarded sites.
    pub offdiag_tail: f64,
    /// Largest entry of `B(n)` over the discarded sites.
    pub diag_tail: f64,
}

/// Replaces the coefficients at sites `n >= cut_site` by their free values.
pub fn matrix_cut(op: &BlockJacobiOperator, cut_site: i64) -> (BlockJacobiOperator, CutReport) {
    let m = op.block_dim();
    let minus_id = CMat::scalar(m, -1.0);
    let mut report = CutReport {
        cut_site,
        offdiag_tail: 0.0,
        diag_tail: 0.0,
    };
    for n in cut_site.max(op.window_start())..op.window_end() {
        report.offdiag_tail = report.offdiag_tail.max((&op.a(n) - &minus_id).max_abs());
        report.diag_tail = report.diag_tail.max(op.b(n).max_abs());
    }
    let keep = (cut_site - op.window_start()).clamp(0, op.len() as i64) as usize;
    if keep == 0 {
        return (BlockJacobiOperator::free(m), report);
    }
    let cut = BlockJacobiOperator::new(
        op.window_start(),
        m,
        op.a_window()[..keep].to_vec(),
        op.b_window()[..keep].to_vec(),
    )
    .expect("a prefix of a valid operator is valid");
    (cut, report)
}

/// Result of removing every eigenvalue of a block operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockChainReport {
    pub certified_slack: f64,
    pub direct_slack: f64,
    pub final_operator: Operator,
    pub final_product_residual: f64,
    pub final_sum_residual: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub scale: f64,
    pub steps: Vec<CommutationReport>,
}

/// Removes all eigenvalues of a block operator, bottom ones first.
pub fn eliminate_all_block(op: &BlockJacobiOperator, tol: f64) -> Result<BlockChainReport> {
    let mut current = op.clone();
    let mut spectrum = block_eigen(op, tol)?;
    let initial = spectrum.points.len();
    let mut steps: Vec<CommutationReport> = Vec::new();
    let mut removed: Vec<SpectralPoint> = Vec::new();
    loop {
        let report = if let Some(p) = spectrum.bottom() {
            step_with_spectrum(&current, p, &spectrum)?
        } else if let Some(p) = spectrum.top() {
            top_with_spectrum(&current, p, &spectrum)?
        } else {
            break;
        };
        if !report.removed_only || steps.len() >= initial {
            return Err(Error::ChainStalled {
                step: steps.len(),
                detail: format!(
                    "spectrum after removing {} does not match (mismatch {:e})",
                    report.input_eigenvalue.lambda, report.spectrum_mismatch
                ),
            });
        }
        removed.push(report.input_eigenvalue);
        spectrum = report.output_spectrum.clone();
        current = match &report.transformed {
            Operator::Block(t) => t.clone(),
            Operator::Scalar(_) => unreachable!("block chain"),
        };
        steps.push(report);
    }
    let lhs: f64 = removed.iter().map(|p| p.multiplicity as f64 * k_functional(p.k)).sum();
    let rhs = op.final_functional();
    let sum_k: f64 = removed
        .iter()
        .map(|p| p.multiplicity as f64 * (p.k * p.k - 1.0 / (p.k * p.k)))
        .sum();
    let log_k: f64 = removed.iter().map(|p| 2.0 * p.multiplicity as f64 * p.log_k()).sum();
    let final_sum_residual = current.sum_tr_b_sq()
        - (op.sum_tr_b_sq() - sum_k + 2.0 * (op.sum_tr_aa_minus_id() - current.sum_tr_aa_minus_id()));
    let final_product_residual = current.sum_log_det_aa() - (op.sum_log_det_aa() - log_k);
    Ok(BlockChainReport {
        certified_slack: current.final_functional(),
        direct_slack: rhs - lhs,
        final_product_residual,
        final_sum_residual,
        lhs,
        rhs,
        scale: 1.0
            + op.size_scale()
            + removed.iter().map(|p| p.multiplicity as f64 * p.k * p.k).sum::<f64>(),
        final_operator: Operator::Block(current),
        steps,
    })
}
