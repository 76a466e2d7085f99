//! Gauss-Jacobi rules by Golub-Welsch and the adaptive integrator behind
//! `G_gamma`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::special::{gamma, ln_gamma};
use crate::eigen::dense::tridiagonal_eigen_first_components;

/// Nodes and weights on `[-1, 1]` for the weight `(1 - x)^alpha (1 + x)^beta`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn build_rule(n: usize, alpha: f64, beta: f64) -> GaussRule {
    let ab = alpha + beta;
    let diag: Vec<f64> = (0..n)
        .map(|j| {
            if j == 0 {
                (beta - alpha) / (ab + 2.0)
            } else {
                let t = 2.0 * j as f64 + ab;
                (beta * beta - alpha * alpha) / (t * (t + 2.0))
            }
        })
        .collect();
    let off: Vec<f64> = (1..n)
        .map(|j| {
            let j = j as f64;
            let t = 2.0 * j + ab;
            if j == 1.0 {
                // (j + ab) / (t - 1) cancels to 1; avoids 0/0 at ab = -1.
                (4.0 * (1.0 + alpha) * (1.0 + beta) / (t * t * (t + 1.0))).sqrt()
            } else {
                (4.0 * j * (j + alpha) * (j + beta) * (j + ab) / (t * t * (t + 1.0) * (t - 1.0))).sqrt()
            }
        })
        .collect();
    let mu0 = if ab + 2.0 < 150.0 {
        2f64.powf(ab + 1.0) * gamma(alpha + 1.0) * gamma(beta + 1.0) / gamma(ab + 2.0)
    } else {
        ((ab + 1.0) * 2f64.ln() + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0) - ln_gamma(ab + 2.0)).exp()
    };
    let (nodes, first) = tridiagonal_eigen_first_components(&diag, &off);
    let weights = first.iter().map(|v| mu0 * v * v).collect();
    GaussRule { nodes, weights }
}

type RuleKey = (usize, u64, u64);

/// Cached `n`-point Gauss-Jacobi rule.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<GaussRule>>>> = OnceLock::new();
    let key = (n, alpha.to_bits(), beta.to_bits());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("rule cache").get(&key) {
        return rule.clone();
    }
    let rule = Arc::new(build_rule(n, alpha, beta));
    cache.lock().expect("rule cache").insert(key, rule.clone());
    rule
}

pub fn gauss_legendre(n: usize) -> Arc<GaussRule> {
    gauss_jacobi(n, 0.0, 0.0)
}

const LOW_ORDER: usize = 20;
const HIGH_ORDER: usize = 40;
const MAX_DEPTH: u32 = 60;

/// `int_0^1 t^(1/2) (1 - t)^alpha f(t) dt` for smooth `f`, adaptive in
/// subintervals, with the endpoint weights absorbed into Gauss-Jacobi rules.
pub fn integrate_jacobi_weighted(alpha: f64, f: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let panel = |u: f64, v: f64, n: usize| -> f64 {
        let at_zero = u == 0.0;
        let at_one = v == 1.0;
        match (at_zero, at_one) {
            (true, true) => {
                let rule = gauss_jacobi(n, alpha, 0.5);
                let scale = 2f64.powf(-alpha - 1.5);
                scale * dot(&rule, |x| f(0.5 * (1.0 + x)))
            }
            (true, false) => {
                let rule = gauss_jacobi(n, 0.0, 0.5);
                let h = 0.5 * v;
                h.powf(1.5) * dot(&rule, |x| {
                    let t = h * (1.0 + x);
                    (1.0 - t).powf(alpha) * f(t)
                })
            }
            (false, true) => {
                let rule = gauss_jacobi(n, alpha, 0.0);
                let h = 0.5 * (1.0 - u);
                h.powf(alpha + 1.0) * dot(&rule, |x| {
                    let t = u + h * (1.0 + x);
                    t.sqrt() * f(t)
                })
            }
            (false, false) => {
                let rule = gauss_legendre(n);
                let h = 0.5 * (v - u);
                h * dot(&rule, |x| {
                    let t = u + h * (1.0 + x);
                    t.sqrt() * (1.0 - t).powf(alpha) * f(t)
                })
            }
        }
    };
    let whole = panel(0.0, 1.0, HIGH_ORDER);
    let target = tol * whole.abs();
    let mut total = 0.0;
    let mut stack = vec![(0.0f64, 1.0f64, 0u32)];
    while let Some((u, v, depth)) = stack.pop() {
        let lo = panel(u, v, LOW_ORDER);
        let hi = panel(u, v, HIGH_ORDER);
        if (hi - lo).abs() <= 0.05 * target || depth >= MAX_DEPTH || hi == 0.0 && lo == 0.0 {
            total += hi;
        } else {
            let mid = 0.5 * (u + v);
            stack.push((u, mid, depth + 1));
            stack.push((mid, v, depth + 1));
        }
    }
    total
}

fn dot(rule: &GaussRule, g: impl Fn(f64) -> f64) -> f64 {
    rule.nodes.iter().zip(&rule.weights).map(|(&x, &w)| w * g(x)).sum()
}
