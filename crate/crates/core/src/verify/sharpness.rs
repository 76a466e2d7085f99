use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_with, check_with_spectrum, InequalityName};
use crate::eigen::{spectrum, SolverOptions};
use crate::error::{Error, Result};
use crate::functional::{beta, d_gamma, k_functional};
use crate::operator::{make_reflectionless, Operator, ReflectionlessSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpnessRow {
    /// `e^(2 omega) - e^(-2 omega) - 4 omega`.
    pub expected_lhs: f64,
    pub half_width: usize,
    pub lhs: f64,
    pub omega: f64,
    pub relative_slack: f64,
    pub rhs: f64,
    pub tail_bound: f64,
}

/// `final` on the reflectionless operator for each `omega`, window sized
/// automatically.
pub fn reflectionless_sharpness(omegas: &[f64], opts: &SolverOptions) -> Result<Vec<SharpnessRow>> {
    omegas
        .par_iter()
        .map(|&omega| {
            let rs = ReflectionlessSpec::new(omega);
            let half_width = rs.auto_half_width();
            let op: Operator = make_reflectionless(&rs)?.into();
            let r = check_with(&op, InequalityName::Final, None, opts)?;
            Ok(SharpnessRow {
                expected_lhs: k_functional(omega.exp()),
                half_width,
                lhs: r.lhs,
                omega,
                relative_slack: r.relative_slack(),
                rhs: r.rhs,
                tail_bound: rs.tail_bound(half_width),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceRow {
    pub lhs: f64,
    pub name: InequalityName,
    /// Left-hand side divided by the inequality's constant.
    pub normalized: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceTable {
    /// `orderalpha` normalized LHS is at least the `hsfree` one.
    pub better1: bool,
    /// `orderalpha` normalized LHS is at least the `hsfree2` one.
    pub better2: bool,
    pub gamma: f64,
    pub rows: Vec<DominanceRow>,
}

/// Normalized left-hand sides of `orderalpha`, `hsfree` and `hsfree2`; all
/// three share the right-hand side `sum tr |B|^(gamma + 1/2)`.
pub fn dominance_table(op: &Operator, gamma: f64, opts: &SolverOptions) -> Result<DominanceTable> {
    if !op.has_free_offdiagonal() {
        return Err(Error::DomainError("dominance comparison needs a = -1".into()));
    }
    let spec = spectrum(op, opts)?;
    let names = [InequalityName::OrderAlpha, InequalityName::HsFree, InequalityName::HsFree2];
    let constants = [beta(gamma - 0.5, 2.0), d_gamma(gamma), 1.0];
    let mut rows = Vec::with_capacity(3);
    for (name, c) in names.into_iter().zip(constants) {
        let r = check_with_spectrum(op, name, Some(gamma), spec.clone(), opts.tol)?;
        rows.push(DominanceRow {
            lhs: r.lhs,
            name,
            normalized: r.lhs / c,
            rhs: r.rhs / c,
        });
    }
    Ok(DominanceTable {
        better1: rows[0].normalized >= rows[1].normalized,
        better2: rows[0].normalized >= rows[2].normalized,
        gamma,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::JacobiOperator;

    fn site(beta: f64) -> Operator {
        JacobiOperator::new(0, vec![-1.0], vec![-beta]).unwrap().into()
    }

    #[test]
    fn reflectionless_rows_are_sharp() {
        let rows = reflectionless_sharpness(&[0.5, 1.0], &SolverOptions::default()).unwrap();
        for r in rows {
            assert!(r.relative_slack.abs() <= 1e-6, "{r:?}");
            assert!((r.lhs / r.expected_lhs - 1.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn dominance_orderings() {
        let opts = SolverOptions::default();
        let t = dominance_table(&site(3.0), 1.0, &opts).unwrap();
        assert!(t.better1 && t.better2);

        // Near the band orderalpha and hsfree agree to leading order.
        let near = dominance_table(&site(0.05), 1.0, &opts).unwrap();
        assert!((near.rows[0].normalized / near.rows[1].normalized - 1.0).abs() < 0.01);

        // Far from the band it approaches hsfree2.
        let far = dominance_table(&site(50.0), 1.0, &opts).unwrap();
        assert!((far.rows[0].normalized / far.rows[2].normalized - 1.0).abs() < 0.1);

        let jittered: Operator = JacobiOperator::new(0, vec![-1.1], vec![-1.0]).unwrap().into();
        assert!(dominance_table(&jittered, 1.0, &opts).is_err());
    }
}
