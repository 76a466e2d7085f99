//! Lattice approximations of `-d^2/dx^2 + V` with spacing `1/k`.
//!
//! The weighted scheme puts `c V(n/k)` on the diagonal and `d V(n/k)` on
//! the off-diagonal, `d = (1 - c)/2`; after scaling by `k^-2` and shifting
//! by `-2` this is a Jacobi operator `W_k` whose eigenvalues `lambda < -2`
//! approximate the continuum eigenvalues through `mu = k^2 (lambda + 2)`.

mod potential;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use potential::Potential;

use crate::eigen::{eigenvalues_outside_band_with, SolverOptions};
use crate::error::{Error, Result};
use crate::functional::{beta, l_classical, rhs_scalar, RhsKind};
use crate::operator::JacobiOperator;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumProblem {
    /// Half-width `X` of the sampled interval `[-X, X]`.
    pub domain: f64,
    pub gamma: f64,
    pub potential: Potential,
    /// Diagonal weight `c`; the off-diagonal weight is `(1 - c)/2`.
    pub scheme_c: f64,
}

impl ContinuumProblem {
    /// Problem on the potential's default domain.
    pub fn new(potential: Potential, gamma: f64, scheme_c: f64) -> Self {
        let domain = potential.default_domain();
        Self {
            domain,
            gamma,
            potential,
            scheme_c,
        }
    }

    pub fn with_domain(mut self, domain: f64) -> Self {
        self.domain = domain;
        self
    }

    pub fn scheme_d(&self) -> f64 {
        0.5 * (1.0 - self.scheme_c)
    }

    pub fn validate(&self) -> Result<()> {
        self.potential.validate()?;
        if !(0.0..=1.0).contains(&self.scheme_c) {
            return Err(Error::DomainError(format!("scheme weight c = {} outside [0, 1]", self.scheme_c)));
        }
        if !(self.domain > 0.0) || !self.domain.is_finite() {
            return Err(Error::DomainError(format!("domain half-width {} must be positive", self.domain)));
        }
        if !(self.gamma >= 0.5) || !self.gamma.is_finite() {
            return Err(Error::DomainError(format!("gamma = {} below 1/2", self.gamma)));
        }
        Ok(())
    }

    /// `int V_-^(gamma + 1/2) dx`.
    pub fn rhs_integral(&self) -> f64 {
        self.potential.negative_part_integral(self.gamma + 0.5)
    }
}

/// `W_k` together with the factor `k^2` relating its spectrum to `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub k: usize,
    pub operator: JacobiOperator,
    pub scale: f64,
}

/// Samples the potential on `n/k`, `|n| <= X k`.
pub fn discretize(problem: &ContinuumProblem, k: usize) -> Result<Discretization> {
    problem.validate()?;
    if k == 0 {
        return Err(Error::DomainError("grid density k must be at least 1".into()));
    }
    let kf = k as f64;
    let sites = (problem.domain * kf).floor() as i64;
    let c = problem.scheme_c;
    let d = problem.scheme_d();
    let inv_k2 = 1.0 / (kf * kf);
    let mut a = Vec::with_capacity(2 * sites as usize + 1);
    let mut b = Vec::with_capacity(2 * sites as usize + 1);
    for n in -sites..=sites {
        let v = problem.potential.value(n as f64 / kf) * inv_k2;
        let an = -1.0 + d * v;
        if !(an < 0.0) {
            return Err(Error::OffDiagonalSignLoss { site: n, value: an });
        }
        a.push(an);
        b.push(c * v);
    }
    Ok(Discretization {
        k,
        operator: JacobiOperator::new(-sites, a, b)?,
        scale: kf * kf,
    })
}

/// Approximations `k^2 (lambda + 2)` of the negative continuum eigenvalues,
/// ascending.
pub fn negative_eigenvalues(problem: &ContinuumProblem, k: usize, opts: &SolverOptions) -> Result<Vec<f64>> {
    let disc = discretize(problem, k)?;
    let spec = eigenvalues_outside_band_with(&disc.operator, opts)?;
    let mut mu: Vec<f64> = spec
        .points
        .iter()
        .filter(|p| p.is_below_band())
        .flat_map(|p| std::iter::repeat_n(-disc.scale * p.distance_to_band(), p.multiplicity))
        .collect();
    mu.sort_by(f64::total_cmp);
    Ok(mu)
}

/// Best constant the lattice argument yields for `sum |mu|^gamma <= C int
/// V_-^(gamma + 1/2)` with scheme weight `c`.
pub fn limiting_constant(gamma: f64, c: f64) -> f64 {
    if gamma == 0.5 {
        return 0.5;
    }
    let d = 0.5 * (1.0 - c);
    let p = gamma + 0.5;
    let two_lcl = 2.0 * l_classical(gamma);
    let mut best = two_lcl * 3f64.powf(gamma - 0.5) * (c.powf(p) + 2.0 * d.powf(p));
    if c == 1.0 {
        best = best.min(two_lcl);
    }
    if gamma == 1.5 {
        best = best.min(two_lcl * (c * c + 4.0 * d * d));
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub bound: f64,
    pub c: f64,
    pub eigenvalues: Vec<f64>,
    pub gamma: f64,
    pub k: usize,
    /// `sum |mu_j|^gamma`.
    pub lhs: f64,
    /// `bound - ratio`.
    pub margin: f64,
    pub ratio: f64,
    /// `int V_-^(gamma + 1/2)`.
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedRow {
    pub c: f64,
    pub gamma: f64,
    pub k: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<ConvergenceRow>,
    pub skipped: Vec<SkippedRow>,
}

/// One row per `(gamma, k)`; grids where the off-diagonal loses its sign are
/// listed in `skipped`.
pub fn constant_sweep(problem: &ContinuumProblem, gammas: &[f64], ks: &[usize], opts: &SolverOptions) -> Result<SweepResult> {
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::DomainError("k list must be strictly increasing".into()));
    }
    for &g in gammas {
        ContinuumProblem { gamma: g, ..problem.clone() }.validate()?;
    }
    // Eigenvalues do not depend on gamma; solve once per k.
    let spectra: Vec<Result<Vec<f64>>> = ks.par_iter().map(|&k| negative_eigenvalues(problem, k, opts)).collect();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &gamma in gammas {
        let p = ContinuumProblem { gamma, ..problem.clone() };
        let rhs = p.rhs_integral();
        let bound = limiting_constant(gamma, p.scheme_c);
        for (&k, mu) in ks.iter().zip(&spectra) {
            match mu {
                Ok(mu) => {
                    let lhs: f64 = mu.iter().map(|m| m.abs().powf(gamma)).sum();
                    let ratio = lhs / rhs;
                    rows.push(ConvergenceRow {
                        bound,
                        c: p.scheme_c,
                        eigenvalues: mu.clone(),
                        gamma,
                        k,
                        lhs,
                        margin: bound - ratio,
                        ratio,
                        rhs,
                    });
                }
                Err(e @ Error::OffDiagonalSignLoss { .. }) => skipped.push(SkippedRow {
                    c: p.scheme_c,
                    gamma,
                    k,
                    reason: e.to_string(),
                }),
                Err(e) => return Err(e.clone()),
            }
        }
    }
    Ok(SweepResult { rows, skipped })
}

/// Richardson extrapolation of `f(k)` and `f(2k)` for an error `O(k^-order)`.
pub fn richardson(coarse: f64, fine: f64, order: f64) -> f64 {
    let r = 2f64.powf(order);
    (r * fine - coarse) / (r - 1.0)
}

/// `k^3` times the right-hand side of the main inequality on `W_k`; tends to
/// `(c^2 + 4 d^2) int V^2`.
pub fn final_rhs_scaled(problem: &ContinuumProblem, k: usize) -> Result<f64> {
    let disc = discretize(problem, k)?;
    let kf = k as f64;
    Ok(kf.powi(3) * rhs_scalar(&disc.operator, RhsKind::Final, None, false)?.total)
}

/// `(c^2 + 4 d^2) int V^2`.
pub fn final_rhs_limit(problem: &ContinuumProblem) -> f64 {
    let c = problem.scheme_c;
    let d = problem.scheme_d();
    (c * c + 4.0 * d * d) * problem.potential.negative_part_integral(2.0)
}

/// Constant of the `gamma = 3/2` route at finite `k`:
/// `k^3 RHS(W_k) / (4 B(1, 3/2) int V^2)`, tending to `limiting_constant(3/2, c)`.
pub fn final_route_constant(problem: &ContinuumProblem, k: usize) -> Result<f64> {
    Ok(final_rhs_scaled(problem, k)? / (4.0 * beta(1.0, 1.5) * problem.potential.negative_part_integral(2.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{check, InequalityName};

    fn pt(c: f64) -> ContinuumProblem {
        ContinuumProblem::new(Potential::PoschlTeller { s: 1.0 }, 1.5, c).with_domain(12.0)
    }

    #[test]
    fn zero_potential_is_free() {
        let p = ContinuumProblem::new(Potential::Gaussian { depth: 0.0, sigma: 1.0 }, 1.0, 0.3).with_domain(3.0);
        let d = discretize(&p, 8).unwrap();
        assert!(d.operator.a_window().iter().all(|&a| a == -1.0));
        assert!(d.operator.b_window().iter().all(|&b| b == 0.0));
        assert!(negative_eigenvalues(&p, 8, &SolverOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn weighted_coefficients() {
        let d = discretize(&pt(0.5), 4).unwrap();
        assert_eq!(d.operator.a(0), -1.03125);
        assert_eq!(d.operator.b(0), -0.0625);
        let pure = discretize(&pt(1.0), 4).unwrap();
        assert!(pure.operator.has_free_offdiagonal());
        for c in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let p = pt(c);
            assert_eq!(p.scheme_c + 2.0 * p.scheme_d(), 1.0);
        }
    }

    #[test]
    fn sign_loss_is_reported() {
        let p = ContinuumProblem::new(Potential::SquareWell { depth: -40.0, width: 1.0 }, 1.0, 0.0);
        assert!(matches!(discretize(&p, 2), Err(Error::OffDiagonalSignLoss { .. })));
        let sweep = constant_sweep(&p, &[1.0], &[2, 16], &SolverOptions::default()).unwrap();
        assert_eq!(sweep.skipped.len(), 1);
        assert_eq!(sweep.rows.len(), 1);
    }

    #[test]
    fn poschl_teller_ground_state() {
        let mu = negative_eigenvalues(&pt(0.5), 64, &SolverOptions::default()).unwrap();
        assert_eq!(mu.len(), 1);
        assert!((mu[0] + 1.0).abs() < 0.01, "{mu:?}");
    }

    #[test]
    fn discretized_operators_satisfy_inequalities() {
        let d = discretize(&pt(0.5), 16).unwrap();
        for name in [InequalityName::Final, InequalityName::HsMain] {
            assert!(check(&d.operator.clone().into(), name, None).unwrap().passed);
        }
    }

    #[test]
    fn limiting_constants() {
        assert!((limiting_constant(1.5, 0.5) - 3.0 / 16.0).abs() < 1e-15);
        assert!((limiting_constant(1.5, 1.0) - 0.375).abs() < 1e-15);
        assert!((limiting_constant(1.0, 1.0 / 3.0) - 2.0 * l_classical(1.0)).abs() < 1e-14);
        assert_eq!(limiting_constant(0.5, 0.2), 0.5);
        assert_eq!(richardson(1.0, 0.25, 2.0), 0.0);
    }
}
