use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_with_spectrum, validate, InequalityName};
use crate::eigen::{spectrum, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::operator::{BlockJacobiOperator, JacobiOperator, Operator};

/// Largest accepted off-diagonal jitter.
pub const MAX_JITTER: f64 = 0.9;

/// Random operators on `[-w, w]` with `a = -1 + U(-j, j)` and
/// `b = scale U(-1, 1)` (blocks: `A = -I + E` with entries of `E` bounded by
/// `j / m`, `B` a scaled random Hermitian matrix).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomOperatorSpec {
    pub block_dim: usize,
    pub offdiag_jitter: f64,
    pub potential_scale: f64,
    pub seed: u64,
    pub window_half_width: usize,
}

impl RandomOperatorSpec {
    pub fn scalar(seed: u64, window_half_width: usize, potential_scale: f64, offdiag_jitter: f64) -> Self {
        Self {
            block_dim: 1,
            offdiag_jitter,
            potential_scale,
            seed,
            window_half_width,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..MAX_JITTER).contains(&self.offdiag_jitter) {
            return Err(Error::DomainError(format!("jitter {} outside [0, 0.9)", self.offdiag_jitter)));
        }
        if self.block_dim == 0 {
            return Err(Error::BlockShape("block dimension must be at least 1".into()));
        }
        if !(self.potential_scale >= 0.0) || !self.potential_scale.is_finite() {
            return Err(Error::DomainError(format!("bad potential scale {}", self.potential_scale)));
        }
        Ok(())
    }
}

/// The operator of trial `trial`; each trial draws from its own ChaCha
/// stream so results do not depend on evaluation order.
pub fn random_operator(spec: &RandomOperatorSpec, trial: u64) -> Result<Operator> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(trial);
    let len = 2 * spec.window_half_width + 1;
    let start = -(spec.window_half_width as i64);
    let j = spec.offdiag_jitter;
    let sym = |rng: &mut ChaCha8Rng| 2.0 * rng.random::<f64>() - 1.0;
    if spec.block_dim == 1 {
        let a = (0..len).map(|_| -1.0 + j * sym(&mut rng)).collect();
        let b = (0..len).map(|_| spec.potential_scale * sym(&mut rng)).collect();
        return Ok(JacobiOperator::new(start, a, b)?.into());
    }
    let m = spec.block_dim;
    let bound = j / m as f64 / std::f64::consts::SQRT_2;
    let mut a = Vec::with_capacity(len);
    let mut b = Vec::with_capacity(len);
    for _ in 0..len {
        let e = CMat::from_fn(m, |_, _| C64::new(bound * sym(&mut rng), bound * sym(&mut rng)));
        a.push(e.add_diag(-1.0));
        let x = CMat::from_fn(m, |_, _| C64::new(sym(&mut rng), sym(&mut rng)));
        b.push(x.hermitize().scale(spec.potential_scale));
    }
    Ok(BlockJacobiOperator::new(start, m, a, b)?.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzFailure {
    pub error: Option<String>,
    pub lhs: f64,
    pub name: InequalityName,
    pub rhs: f64,
    pub slack: f64,
    pub trial: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NameSummary {
    pub failures: usize,
    pub max_ratio: f64,
    pub min_relative_slack: f64,
    pub min_slack: f64,
    pub name: InequalityName,
    /// Trials with positive right-hand side and relative slack below `1e-8`.
    pub near_equality: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzSummary {
    pub failures: Vec<FuzzFailure>,
    pub gamma: Option<f64>,
    pub names: Vec<NameSummary>,
    pub spec: RandomOperatorSpec,
    pub trials: u64,
}

impl FuzzSummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Whether every failure is a solver error rather than a violated
    /// inequality.
    pub fn only_solver_errors(&self) -> bool {
        self.failures.iter().all(|f| f.error.is_some())
    }
}

type TrialOutcome = std::result::Result<Vec<super::InequalityReport>, String>;

/// Runs `check` for every name on `trials` random operators.
pub fn fuzz(
    spec: &RandomOperatorSpec,
    names: &[InequalityName],
    gamma: Option<f64>,
    trials: u64,
    opts: &SolverOptions,
) -> Result<FuzzSummary> {
    spec.validate()?;
    if trials == 0 {
        return Err(Error::DomainError("at least one trial is needed".into()));
    }
    let probe = random_operator(spec, 0)?;
    for &name in names {
        if spec.offdiag_jitter != 0.0 && name.needs_free_offdiagonal() {
            return Err(Error::DomainError(format!("`{name}` requires zero jitter")));
        }
        validate(&probe, name, gamma)?;
    }
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|trial| -> TrialOutcome {
            let op = random_operator(spec, trial).map_err(|e| e.to_string())?;
            let spec = spectrum(&op, opts).map_err(|e| e.to_string())?;
            names
                .iter()
                .map(|&n| check_with_spectrum(&op, n, gamma, spec.clone(), opts.tol).map_err(|e| e.to_string()))
                .collect()
        })
        .collect();

    let mut summaries: Vec<NameSummary> = names
        .iter()
        .map(|&name| NameSummary {
            failures: 0,
            max_ratio: 0.0,
            min_relative_slack: f64::INFINITY,
            min_slack: f64::INFINITY,
            name,
            near_equality: 0,
        })
        .collect();
    let mut failures = Vec::new();
    for (trial, outcome) in outcomes.into_iter().enumerate() {
        let trial = trial as u64;
        match outcome {
            Err(error) => {
                for s in &mut summaries {
                    s.failures += 1;
                    failures.push(FuzzFailure {
                        error: Some(error.clone()),
                        lhs: f64::NAN,
                        name: s.name,
                        rhs: f64::NAN,
                        slack: f64::NAN,
                        trial,
                    });
                }
            }
            Ok(reports) => {
                for (s, r) in summaries.iter_mut().zip(reports) {
                    s.min_slack = s.min_slack.min(r.slack);
                    s.min_relative_slack = s.min_relative_slack.min(r.relative_slack());
                    if r.rhs > 0.0 {
                        s.max_ratio = s.max_ratio.max(r.lhs / r.rhs);
                        if r.relative_slack() < super::RELATIVE_SLACK_FLOOR {
                            s.near_equality += 1;
                        }
                    }
                    if !r.passed {
                        s.failures += 1;
                        failures.push(FuzzFailure {
                            error: None,
                            lhs: r.lhs,
                            name: r.name,
                            rhs: r.rhs,
                            slack: r.slack,
                            trial,
                        });
                    }
                }
            }
        }
    }
    Ok(FuzzSummary {
        failures,
        gamma,
        names: summaries,
        spec: *spec,
        trials,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub eta: f64,
    pub lhs: f64,
    pub ratio: f64,
    pub rhs: f64,
}

/// `lhs / rhs` for the potential `eta b` at each coupling `eta`.
pub fn coupling_scan(
    base: &JacobiOperator,
    name: InequalityName,
    gamma: Option<f64>,
    etas: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<ScalingRow>> {
    etas.par_iter()
        .map(|&eta| {
            let b = base.b_window().iter().map(|x| eta * x).collect();
            let op: Operator = JacobiOperator::new(base.window_start(), base.a_window().to_vec(), b)?.into();
            let r = super::check_with(&op, name, gamma, opts)?;
            Ok(ScalingRow {
                eta,
                lhs: r.lhs,
                ratio: r.lhs / r.rhs,
                rhs: r.rhs,
            })
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len()) as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
