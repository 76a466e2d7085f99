//! Library results against references computed independently in the test:
//! dense `nalgebra` eigensolves, brute-force quadrature and the finite-well
//! transcendental equation.

use jacobi_lt::continuum::{negative_eigenvalues, ContinuumProblem, Potential};
use jacobi_lt::eigen::tridiagonal::{sturm_count, tridiagonal_eigenvalues};
use jacobi_lt::eigen::{block_eigen, eigenvalues_outside_band, ground_state, SolverOptions, Side};
use jacobi_lt::functional::{g_gamma, g_gamma_closed, k_functional, rhs_block, rhs_scalar, RhsKind};
use jacobi_lt::linalg::{CMat, C64};
use jacobi_lt::operator::{make_reflectionless, BlockJacobiOperator, JacobiOperator, ReflectionlessSpec};
use nalgebra::{DMatrix, Complex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dense_scalar(op: &JacobiOperator, pad: i64) -> DMatrix<f64> {
    let lo = op.window_start() - pad;
    let n = (op.len() as i64 + 2 * pad) as usize;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let site = lo + i as i64;
        m[(i, i)] = op.b(site);
        if i + 1 < n {
            m[(i, i + 1)] = op.a(site);
            m[(i + 1, i)] = op.a(site);
        }
    }
    m
}

fn dense_outside_band(m: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().filter(|x| x.abs() > 2.0 + 1e-6).collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn single_site_against_dense_truncation() {
    let op = JacobiOperator::new(0, vec![-1.0], vec![-3.0]).unwrap();
    let dense = dense_outside_band(dense_scalar(&op, 1000));
    let ours = eigenvalues_outside_band(&op, 1e-9).unwrap().expanded();
    assert_eq!(dense.len(), 1);
    assert!((ours[0] - dense[0]).abs() < 1e-12);
    assert!((ours[0] + 13f64.sqrt()).abs() < 1e-12);
}

#[test]
fn ground_state_decays_with_delta_model_rate() {
    let op = JacobiOperator::new(0, vec![-1.0], vec![-3.0]).unwrap();
    let gs = ground_state(&op, Side::Bottom).unwrap();
    let k = (13f64.sqrt() + 3.0) / 2.0;
    assert!((gs.point.k - k).abs() < 1e-12);
    assert!((gs.ratio(0) - 1.0 / k).abs() < 1e-10);
    assert!((gs.phi(-1) / gs.phi(0) - 1.0 / k).abs() < 1e-10);
}

#[test]
fn random_operators_against_dense_truncation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let len = 20;
        let a = (0..len).map(|_| -1.0 + 0.6 * (rng.random::<f64>() - 0.5)).collect();
        let b = (0..len).map(|_| 4.0 * (rng.random::<f64>() - 0.5)).collect();
        let op = JacobiOperator::new(-10, a, b).unwrap();
        let ours = eigenvalues_outside_band(&op, 1e-9).unwrap().expanded();
        // Keep only well separated eigenvalues: weakly bound states need a
        // longer dense truncation than is practical here.
        let dense = dense_outside_band(dense_scalar(&op, 250));
        let firm: Vec<f64> = ours.iter().copied().filter(|x| x.abs() > 2.01).collect();
        let dense_firm: Vec<f64> = dense.iter().copied().filter(|x| x.abs() > 2.01).collect();
        assert_eq!(firm.len(), dense_firm.len());
        for (x, y) in firm.iter().zip(&dense_firm) {
            assert!((x - y).abs() < 1e-10, "{x} {y}");
        }
    }
}

#[test]
fn tridiagonal_bisection_against_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let n = 60;
        let d: Vec<f64> = (0..n).map(|_| 4.0 * rng.random::<f64>() - 2.0).collect();
        let e: Vec<f64> = (0..n - 1).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = d[i];
            if i + 1 < n {
                m[(i, i + 1)] = e[i];
                m[(i + 1, i)] = e[i];
            }
        }
        let mut dense: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        dense.sort_by(f64::total_cmp);
        let (lo, hi) = (-1.0, 1.5);
        let ours = tridiagonal_eigenvalues(&d, &e, lo, hi);
        let expected: Vec<f64> = dense.iter().copied().filter(|x| *x > lo && *x < hi).collect();
        assert_eq!(ours.len(), expected.len());
        assert_eq!(ours.len(), sturm_count(&d, &e, hi) - sturm_count(&d, &e, lo));
        for (x, y) in ours.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn block_operator_against_dense_hermitian() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let m = 2;
    let len = 6;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for _ in 0..len {
        a.push(CMat::from_fn(m, |_, _| C64::new(0.2 * (rng.random::<f64>() - 0.5), 0.2 * (rng.random::<f64>() - 0.5))).add_diag(-1.0));
        b.push(CMat::from_fn(m, |_, _| C64::new(3.0 * (rng.random::<f64>() - 0.5), 3.0 * (rng.random::<f64>() - 0.5))).hermitize());
    }
    let op = BlockJacobiOperator::new(0, m, a, b).unwrap();
    let pad = 300i64;
    let sites = len as i64 + 2 * pad;
    let n = sites as usize * m;
    let mut h = DMatrix::<Complex<f64>>::zeros(n, n);
    for s in 0..sites {
        let site = s - pad;
        let bb = op.b(site);
        let aa = op.a(site);
        for i in 0..m {
            for j in 0..m {
                let r = s as usize * m;
                h[(r + i, r + j)] = Complex::new(bb[(i, j)].re, bb[(i, j)].im);
                if s + 1 < sites {
                    h[(r + i, r + m + j)] = Complex::new(aa[(i, j)].re, aa[(i, j)].im);
                    h[(r + m + j, r + i)] = Complex::new(aa[(i, j)].re, -aa[(i, j)].im);
                }
            }
        }
    }
    let mut dense: Vec<f64> = h.symmetric_eigenvalues().iter().copied().filter(|x| x.abs() > 2.01).collect();
    dense.sort_by(f64::total_cmp);
    let ours: Vec<f64> = block_eigen(&op, 1e-9).unwrap().expanded().into_iter().filter(|x| x.abs() > 2.01).collect();
    assert_eq!(ours.len(), dense.len());
    for (x, y) in ours.iter().zip(&dense) {
        assert!((x - y).abs() < 1e-9, "{x} {y}");
    }
}

#[test]
fn unit_blocks_match_scalar_spectrum() {
    let s = JacobiOperator::new(-2, vec![-1.3, -0.7, -1.1, -1.0], vec![-2.0, 1.0, 0.5, -1.5]).unwrap();
    let x = eigenvalues_outside_band(&s, 1e-9).unwrap().expanded();
    let y = block_eigen(&s.to_block(), 1e-9).unwrap().expanded();
    assert_eq!(x.len(), y.len());
    for (p, q) in x.iter().zip(&y) {
        assert!((p - q).abs() < 1e-12);
    }
}

/// Midpoint rule after `E = lambda - u^p`, `p = 1/(gamma - 1/2)`, which
/// turns the weight `(lambda - E)^(gamma - 3/2) dE` into `p du`.
fn midpoint_g(gamma: f64, lambda: f64, panels: usize) -> f64 {
    let p = 1.0 / (gamma - 0.5);
    let top = (lambda - 2.0).powf(gamma - 0.5);
    let h = top / panels as f64;
    (0..panels)
        .map(|i| {
            let u = (i as f64 + 0.5) * h;
            let e = lambda - u.powf(p);
            p * (e * e - 4.0).sqrt()
        })
        .sum::<f64>()
        * h
}

#[test]
fn g_gamma_against_midpoint_rule() {
    let brute = midpoint_g(1.0, 2.5, 1_000_000);
    let ours = g_gamma(1.0, 2.5, 1e-12).unwrap();
    assert!((ours / brute - 1.0).abs() < 1e-8, "{ours} {brute}");
    for gamma in [0.75, 1.25, 2.0, 3.0] {
        for lambda in [2.05, 3.0, 7.5, 20.0] {
            let brute = midpoint_g(gamma, lambda, 400_000);
            let ours = g_gamma(gamma, lambda, 1e-12).unwrap();
            assert!((ours / brute - 1.0).abs() < 1e-8, "{gamma} {lambda}: {ours} {brute}");
        }
    }
}

#[test]
fn closed_form_at_reference_point() {
    let e = std::f64::consts::E;
    let expected = 0.5 * (e * e - 1.0 / (e * e) - 4.0);
    assert!((g_gamma_closed(1.5, e).unwrap() - expected).abs() < 1e-14);
    assert!((midpoint_g(1.5, 2.0 * 1f64.cosh(), 1_000_000) / expected - 1.0).abs() < 1e-8);
    assert!((g_gamma_closed(2.5, 2.0).unwrap() / midpoint_g(2.5, 2.5, 1_000_000) - 1.0).abs() < 1e-9);
}

#[test]
fn near_band_series_against_taylor_sum() {
    // With s = log k the functional is 2 sinh(2s) - 4s = sum over odd
    // n >= 3 of 2 (2s)^n / n!.
    let delta = 1e-6f64;
    let k = 1.0 + delta;
    let s = (k - 1.0).ln_1p();
    let mut exact = 0.0;
    let mut fact = 1.0;
    for n in 1..30 {
        fact *= n as f64;
        if n >= 3 && n % 2 == 1 {
            exact += 2.0 * (2.0 * s).powi(n) / fact;
        }
    }
    assert!((k_functional(k) / exact - 1.0).abs() < 1e-12);
    assert!((k_functional(k) / (8.0 / 3.0 * delta.powi(3)) - 1.0).abs() < 1e-3);
}

#[test]
fn reflectionless_coefficients_from_cosh() {
    let omega = 1.0f64;
    let op = make_reflectionless(&ReflectionlessSpec {
        omega,
        half_width: Some(8),
    })
    .unwrap();
    let c = |n: i64| (omega * n as f64).cosh();
    for n in -8..=8i64 {
        let a = -(c(n) * c(n + 2)).sqrt() / c(n + 1);
        let b = c(n) / c(n + 1) - c(n - 1) / c(n);
        assert!((op.a(n) - a).abs() < 1e-13, "a({n})");
        assert!((op.b(n) - b).abs() < 1e-13, "b({n})");
    }
}

#[test]
fn block_offdiagonal_term_per_eigenvalue() {
    let a0 = CMat::from_real_diag(&[-1.2, -0.9]);
    let op = BlockJacobiOperator::new(0, 2, vec![a0], vec![CMat::zeros(2)]).unwrap();
    let expected = 2.0 * [1.44f64, 0.81].iter().map(|x| x - 1.0 - x.ln()).sum::<f64>();
    let got = rhs_block(&op);
    assert!((got.offdiag_term - expected).abs() < 1e-14);
    assert!((got.offdiag_term - 0.192_156).abs() < 1e-6);
}

#[test]
fn unit_block_rhs_matches_scalar() {
    let s = JacobiOperator::new(0, vec![-1.2, -0.6], vec![0.3, -1.0]).unwrap();
    let x = rhs_scalar(&s, RhsKind::Final, None, false).unwrap().total;
    let y = rhs_block(&s.to_block()).total;
    assert!((x - y).abs() < 1e-12);
}

#[test]
fn poschl_teller_ground_state_energy() {
    let p = ContinuumProblem::new(Potential::PoschlTeller { s: 1.0 }, 1.5, 0.5).with_domain(12.0);
    let mu = negative_eigenvalues(&p, 64, &SolverOptions::default()).unwrap();
    let exact = Potential::PoschlTeller { s: 1.0 }.exact_eigenvalues().unwrap();
    assert_eq!(mu.len(), exact.len());
    assert!((mu[0] - exact[0]).abs() < 0.01);
}

/// Bound states of `-u'' - V0 u` on `|x| < L`: roots of
/// `q tan(q L) = kappa` (even) and `-q cot(q L) = kappa` (odd) with
/// `q^2 + kappa^2 = V0`, found by bisection on each branch.
fn finite_well_energies(depth: f64, half_width: f64) -> Vec<f64> {
    let q_max = depth.sqrt();
    let even = |q: f64| q * (q * half_width).tan() - (depth - q * q).sqrt();
    let odd = |q: f64| -q / (q * half_width).tan() - (depth - q * q).sqrt();
    let mut out = Vec::new();
    let mut branch = 0;
    loop {
        let lo = branch as f64 * std::f64::consts::FRAC_PI_2 / half_width;
        if lo >= q_max {
            break;
        }
        let hi = ((branch + 1) as f64 * std::f64::consts::FRAC_PI_2 / half_width).min(q_max);
        let f: &dyn Fn(f64) -> f64 = if branch % 2 == 0 { &even } else { &odd };
        let (mut a, mut b) = (lo + 1e-12, hi - 1e-12);
        if f(a).signum() != f(b).signum() {
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if f(mid).signum() == f(a).signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let q = 0.5 * (a + b);
            out.push(q * q - depth);
        }
        branch += 1;
    }
    out.sort_by(f64::total_cmp);
    out
}

#[test]
fn square_well_bound_state_count() {
    let exact = finite_well_energies(4.0, 1.0);
    assert_eq!(exact.len(), 2);
    let p = ContinuumProblem::new(Potential::SquareWell { depth: 4.0, width: 2.0 }, 0.5, 0.5);
    let mu = negative_eigenvalues(&p, 64, &SolverOptions::default()).unwrap();
    assert_eq!(mu.len(), exact.len());
    for (x, y) in mu.iter().zip(&exact) {
        assert!((x - y).abs() < 0.02 * y.abs(), "{x} {y}");
    }
}
