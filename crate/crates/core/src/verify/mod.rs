//! Left- and right-hand sides of the named inequalities, checked on concrete
//! operators, random corpora and the reflectionless family.

mod fuzz;
mod sharpness;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use fuzz::{coupling_scan, fuzz, loglog_slope, random_operator, FuzzFailure, FuzzSummary, NameSummary, RandomOperatorSpec, ScalingRow};
pub use sharpness::{dominance_table, reflectionless_sharpness, DominanceRow, DominanceTable, SharpnessRow};

use crate::eigen::{spectrum, SolverOptions, SpectrumResult, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::functional::{
    beta, d_gamma, g_gamma, k_functional, rhs_block, rhs_block_power, rhs_scalar, RhsBreakdown, RhsKind, DEFAULT_QUAD_TOL,
};
use crate::operator::Operator;

/// Relative part of the pass criterion.
pub const RELATIVE_SLACK_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InequalityName {
    Final,
    FinalMatrix,
    HsMain,
    Hs1,
    Hs2,
    OrderAlpha,
    HsFree,
    HsFree2,
}

impl InequalityName {
    pub const ALL: [InequalityName; 8] = [
        InequalityName::Final,
        InequalityName::FinalMatrix,
        InequalityName::HsMain,
        InequalityName::Hs1,
        InequalityName::Hs2,
        InequalityName::OrderAlpha,
        InequalityName::HsFree,
        InequalityName::HsFree2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InequalityName::Final => "final",
            InequalityName::FinalMatrix => "finalmatrix",
            InequalityName::HsMain => "hsmain",
            InequalityName::Hs1 => "hs1",
            InequalityName::Hs2 => "hs2",
            InequalityName::OrderAlpha => "orderalpha",
            InequalityName::HsFree => "hsfree",
            InequalityName::HsFree2 => "hsfree2",
        }
    }

    pub fn needs_gamma(self) -> bool {
        !matches!(self, InequalityName::Final | InequalityName::FinalMatrix | InequalityName::HsMain)
    }

    /// Inequalities stated only for `a = -1` (`A = -I`).
    pub fn needs_free_offdiagonal(self) -> bool {
        matches!(self, InequalityName::OrderAlpha | InequalityName::HsFree | InequalityName::HsFree2)
    }

    /// Whether the inequality is defined for operators of block dimension `m`.
    pub fn applies_to_block_dim(self, m: usize) -> bool {
        match self {
            InequalityName::Final | InequalityName::HsMain | InequalityName::Hs1 | InequalityName::Hs2 => m == 1,
            _ => true,
        }
    }
}

impl fmt::Display for InequalityName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InequalityName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::DomainError(format!("unknown inequality `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub gamma: Option<f64>,
    pub lhs: f64,
    pub name: InequalityName,
    pub passed: bool,
    pub rhs: f64,
    pub rhs_breakdown: RhsBreakdown,
    /// `rhs - lhs`.
    pub slack: f64,
    pub spectrum: SpectrumResult,
}

impl InequalityReport {
    /// `slack / rhs`, or `slack` itself when `rhs` vanishes.
    pub fn relative_slack(&self) -> f64 {
        if self.rhs > 0.0 {
            self.slack / self.rhs
        } else {
            self.slack
        }
    }
}

/// Smallest slack accepted as a pass: solver noise of `10 tol` per
/// eigenvalue or `1e-8 max(1, rhs)`, whichever is larger.
pub fn slack_floor(rhs: f64, tol: f64, eigenvalue_count: usize) -> f64 {
    -(RELATIVE_SLACK_FLOOR * rhs.max(1.0)).max(10.0 * tol * eigenvalue_count as f64)
}

/// Checks one inequality with eigenvalues at the default tolerance.
pub fn check(op: &Operator, name: InequalityName, gamma: Option<f64>) -> Result<InequalityReport> {
    check_with(op, name, gamma, &SolverOptions::with_tol(DEFAULT_TOL))
}

pub fn check_with(op: &Operator, name: InequalityName, gamma: Option<f64>, opts: &SolverOptions) -> Result<InequalityReport> {
    validate(op, name, gamma)?;
    let spec = spectrum(op, opts)?;
    check_with_spectrum(op, name, gamma, spec, opts.tol)
}

fn validate(op: &Operator, name: InequalityName, gamma: Option<f64>) -> Result<()> {
    if !name.applies_to_block_dim(op.block_dim()) || matches!((name, op), (InequalityName::Final, Operator::Block(_))) {
        return Err(Error::DomainError(format!("`{name}` is stated for scalar operators")));
    }
    if name.needs_free_offdiagonal() && !op.has_free_offdiagonal() {
        return Err(Error::DomainError(format!("`{name}` requires a free off-diagonal")));
    }
    if name.needs_gamma() {
        let g = gamma.ok_or_else(|| Error::DomainError(format!("`{name}` needs gamma")))?;
        let ok = if name == InequalityName::OrderAlpha { g > 0.5 } else { g >= 0.5 };
        if !ok || !g.is_finite() {
            return Err(Error::DomainError(format!("gamma = {g} out of range for `{name}`")));
        }
    }
    Ok(())
}

/// Checks one inequality against a spectrum computed beforehand.
pub fn check_with_spectrum(
    op: &Operator,
    name: InequalityName,
    gamma: Option<f64>,
    spec: SpectrumResult,
    tol: f64,
) -> Result<InequalityReport> {
    validate(op, name, gamma)?;
    let gamma = if name.needs_gamma() { gamma } else { None };
    let g = gamma.unwrap_or(0.0);
    let points = &spec.points;
    let weighted = |f: &dyn Fn(&crate::eigen::SpectralPoint) -> Result<f64>| -> Result<f64> {
        points.iter().try_fold(0.0, |acc, p| Ok(acc + p.multiplicity as f64 * f(p)?))
    };
    let lhs = match name {
        InequalityName::Final | InequalityName::FinalMatrix => weighted(&|p| Ok(k_functional(p.k)))?,
        InequalityName::HsMain => weighted(&|p| Ok(p.k.abs() - 1.0 / p.k.abs()))?,
        InequalityName::Hs1 | InequalityName::HsFree => weighted(&|p| Ok(p.distance_to_band().powf(g)))?,
        InequalityName::Hs2 | InequalityName::HsFree2 => weighted(&|p| Ok(p.distance_to_band().powf(g + 0.5)))?,
        InequalityName::OrderAlpha => weighted(&|p| g_gamma(g, p.lambda.abs(), DEFAULT_QUAD_TOL))?,
    };
    let rhs_breakdown = match (name, op) {
        (InequalityName::Final, Operator::Scalar(s)) => rhs_scalar(s, RhsKind::Final, None, false)?,
        (InequalityName::HsMain, Operator::Scalar(s)) => rhs_scalar(s, RhsKind::HsMain, None, false)?,
        (InequalityName::Hs1, Operator::Scalar(s)) => rhs_scalar(s, RhsKind::Hs1, gamma, false)?,
        (InequalityName::Hs2, Operator::Scalar(s)) => rhs_scalar(s, RhsKind::Hs2, gamma, s.has_free_offdiagonal())?,
        (InequalityName::FinalMatrix, Operator::Scalar(s)) => rhs_block(&s.to_block()),
        (InequalityName::FinalMatrix, Operator::Block(b)) => rhs_block(b),
        (InequalityName::OrderAlpha | InequalityName::HsFree | InequalityName::HsFree2, _) => {
            let pot = match op {
                Operator::Scalar(s) => rhs_block_power(&s.to_block(), g + 0.5),
                Operator::Block(b) => rhs_block_power(b, g + 0.5),
            };
            let c = match name {
                InequalityName::OrderAlpha => beta(g - 0.5, 2.0),
                InequalityName::HsFree => d_gamma(g),
                _ => 1.0,
            };
            RhsBreakdown::from_terms(c * pot.potential_term, 0.0)
        }
        _ => unreachable!("validated above"),
    };
    let rhs = rhs_breakdown.total;
    let slack = rhs - lhs;
    let passed = slack >= slack_floor(rhs, tol, spec.eigenvalue_count());
    Ok(InequalityReport {
        gamma,
        lhs,
        name,
        passed,
        rhs,
        rhs_breakdown,
        slack,
        spectrum: spec,
    })
}
