//! Discrete spectrum outside `[-2, 2]`, plus the positive ground state used
//! by the commutation step.
//!
//! Eigenvalues come from bisection on exact inertia counts of the infinite
//! operator (`count`). Truncation doubling runs alongside as an independent
//! route: it must stabilize, and its eigenvalues must agree with the exact
//! ones up to the states whose decay length exceeds the padding.

pub mod band;
pub mod block;
pub mod count;
pub mod dense;
mod ground;
pub mod tridiagonal;

use serde::{Deserialize, Serialize};

pub use ground::{ground_state, GroundState, Side};

use crate::error::{Error, Result};
use crate::operator::{BlockJacobiOperator, JacobiOperator, Operator};

/// Eigenvalues within this distance of the band edges are discarded.
pub const BAND_MARGIN: f64 = 1e-9;
/// Default absolute stabilization tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Largest padding tried before giving up.
pub const MAX_PADDING: usize = 1 << 16;
/// Block truncations above this matrix dimension use inertia counting with
/// the free padding eliminated in closed form instead of band reduction.
pub const BAND_REDUCTION_LIMIT: usize = 1024;

/// An eigenvalue `lambda = -k - 1/k` with `|k| > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub k: f64,
    pub lambda: f64,
    pub multiplicity: usize,
}

impl SpectralPoint {
    pub fn from_lambda(lambda: f64, multiplicity: usize) -> Result<Self> {
        let x = lambda.abs();
        if !(x > 2.0) || !x.is_finite() {
            return Err(Error::DomainError(format!("eigenvalue {lambda} is not outside [-2, 2]")));
        }
        let root = ((x - 2.0) * (x + 2.0)).sqrt();
        let mag = 0.5 * (x + root);
        let k = if lambda < 0.0 { mag } else { -mag };
        Ok(Self {
            k,
            lambda,
            multiplicity,
        })
    }

    pub fn from_k(k: f64, multiplicity: usize) -> Result<Self> {
        if !(k.abs() > 1.0) || !k.is_finite() {
            return Err(Error::DomainError(format!("|k| must exceed 1, got {k}")));
        }
        Ok(Self {
            k,
            lambda: -k - 1.0 / k,
            multiplicity,
        })
    }

    /// `|lambda| - 2`, computed without cancellation from `k`.
    pub fn distance_to_band(&self) -> f64 {
        let d = self.k.abs() - 1.0;
        d * d / self.k.abs()
    }

    /// `log |k|`.
    pub fn log_k(&self) -> f64 {
        (self.k.abs() - 1.0).ln_1p()
    }

    pub fn is_below_band(&self) -> bool {
        self.lambda < -2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Points ordered by decreasing `|lambda|`.
    pub points: Vec<SpectralPoint>,
    /// Eigenvalues found within the band margin at the final truncation.
    pub near_band_count: usize,
    pub stabilization_gap: f64,
    pub gap_history: Vec<f64>,
    /// Padding on each side of the window at the accepted level.
    pub truncation_used: usize,
    /// Largest distance between a truncated eigenvalue and its exact match.
    pub truncation_deviation: f64,
    /// Exact eigenvalues the accepted truncation does not resolve (weakly
    /// bound states with decay length beyond the padding).
    pub unresolved_by_truncation: usize,
}

impl SpectrumResult {
    /// Eigenvalues repeated by multiplicity, ascending.
    pub fn expanded(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .points
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.lambda, p.multiplicity))
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn bottom(&self) -> Option<SpectralPoint> {
        self.points
            .iter()
            .filter(|p| p.lambda < -2.0)
            .min_by(|a, b| a.lambda.total_cmp(&b.lambda))
            .copied()
    }

    pub fn top(&self) -> Option<SpectralPoint> {
        self.points
            .iter()
            .filter(|p| p.lambda > 2.0)
            .max_by(|a, b| a.lambda.total_cmp(&b.lambda))
            .copied()
    }

    pub fn eigenvalue_count(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity).sum()
    }
}

/// Controls for the truncation-doubling loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_padding: usize,
    pub band_reduction_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_padding: MAX_PADDING,
            band_reduction_limit: BAND_REDUCTION_LIMIT,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

struct Level {
    values: Vec<f64>,
    near_band: usize,
}

fn level_gap(prev: &[f64], cur: &[f64]) -> f64 {
    if prev.len() != cur.len() {
        return f64::INFINITY;
    }
    prev.iter()
        .zip(cur)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn stabilize(
    window_len: usize,
    opts: &SolverOptions,
    mut level: impl FnMut(usize) -> Level,
) -> Result<(Level, usize, f64, Vec<f64>)> {
    if !(opts.tol > 0.0) {
        return Err(Error::DomainError(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let mut pad = (window_len + 16).min(opts.max_padding / 2).max(16);
    if pad > opts.max_padding {
        return Err(Error::NoConvergence {
            truncation: pad,
            gap: f64::INFINITY,
        });
    }
    let mut prev = level(pad);
    let mut history = Vec::new();
    loop {
        let next = pad * 2;
        if next > opts.max_padding {
            return Err(Error::NoConvergence {
                truncation: pad,
                gap: history.last().copied().unwrap_or(f64::INFINITY),
            });
        }
        let cur = level(next);
        let gap = level_gap(&prev.values, &cur.values);
        history.push(gap);
        if gap < opts.tol {
            return Ok((cur, next, gap, history));
        }
        prev = cur;
        pad = next;
    }
}

fn scalar_level(op: &JacobiOperator, pad: usize) -> Level {
    let (_, d, e) = op.truncated_tridiagonal(pad);
    tridiagonal_level(&d, &e)
}

fn tridiagonal_level(d: &[f64], e: &[f64]) -> Level {
    let (glo, ghi) = tridiagonal::gershgorin(d, e);
    let mut values = tridiagonal::tridiagonal_eigenvalues(d, e, glo - 1.0, -2.0 - BAND_MARGIN);
    values.extend(tridiagonal::tridiagonal_eigenvalues(d, e, 2.0 + BAND_MARGIN, ghi + 1.0));
    let near_band = tridiagonal::sturm_count(d, e, -2.0) - tridiagonal::sturm_count(d, e, -2.0 - BAND_MARGIN)
        + tridiagonal::sturm_count(d, e, 2.0 + BAND_MARGIN)
        - tridiagonal::sturm_count(d, e, 2.0);
    Level { values, near_band }
}

fn block_level(op: &BlockJacobiOperator, pad: usize, limit: usize) -> Level {
    let dim = (op.len() + 2 * pad) * op.block_dim();
    if dim <= limit {
        let (_, band) = op.truncated_band(pad);
        let (d, e) = band.reduce_to_tridiagonal();
        tridiagonal_level(&d, &e)
    } else {
        let t = block::PaddedTruncation::from_operator(op, pad);
        let mut values = t.eigenvalues_in(f64::NEG_INFINITY, -2.0 - BAND_MARGIN);
        values.extend(t.eigenvalues_in(2.0 + BAND_MARGIN, f64::INFINITY));
        let near_band = t.count_below(-2.0) - t.count_below(-2.0 - BAND_MARGIN)
            + t.count_below(2.0 + BAND_MARGIN)
            - t.count_below(2.0);
        Level { values, near_band }
    }
}

/// Matches truncated eigenvalues to exact ones from the outside in on each
/// side of the band; returns the largest deviation and the number unmatched.
fn compare_routes(exact: &[f64], truncated: &[f64]) -> (f64, usize) {
    let split = |v: &[f64]| {
        let mut below: Vec<f64> = v.iter().copied().filter(|x| *x < 0.0).collect();
        let mut above: Vec<f64> = v.iter().copied().filter(|x| *x > 0.0).collect();
        below.sort_by(f64::total_cmp);
        above.sort_by(|a, b| b.total_cmp(a));
        (below, above)
    };
    let (eb, ea) = split(exact);
    let (tb, ta) = split(truncated);
    let mut dev = 0.0f64;
    let mut unmatched = 0;
    for (e, t) in [(eb, tb), (ea, ta)] {
        for (i, x) in e.iter().enumerate() {
            match t.get(i) {
                Some(y) => dev = dev.max((x - y).abs()),
                None => unmatched += 1,
            }
        }
        if t.len() > e.len() {
            dev = f64::INFINITY;
        }
    }
    (dev, unmatched)
}

fn into_result(
    exact: Vec<f64>,
    level: Level,
    pad: usize,
    gap: f64,
    history: Vec<f64>,
    cluster_tol: Option<f64>,
) -> Result<SpectrumResult> {
    let (truncation_deviation, unresolved_by_truncation) = compare_routes(&exact, &level.values);
    let mut sorted = exact;
    sorted.sort_by(f64::total_cmp);
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for v in sorted {
        match (groups.last_mut(), cluster_tol) {
            (Some(g), Some(t)) if (v - g[g.len() - 1]).abs() <= t && (v < 0.0) == (g[0] < 0.0) => g.push(v),
            _ => groups.push(vec![v]),
        }
    }
    let mut points = groups
        .into_iter()
        .map(|g| SpectralPoint::from_lambda(g.iter().sum::<f64>() / g.len() as f64, g.len()))
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| b.lambda.abs().total_cmp(&a.lambda.abs()));
    Ok(SpectrumResult {
        points,
        near_band_count: level.near_band,
        stabilization_gap: gap,
        gap_history: history,
        truncation_used: pad,
        truncation_deviation,
        unresolved_by_truncation,
    })
}

/// Eigenvalues of a scalar operator outside `[-2 - margin, 2 + margin]`.
pub fn eigenvalues_outside_band(op: &JacobiOperator, tol: f64) -> Result<SpectrumResult> {
    eigenvalues_outside_band_with(op, &SolverOptions::with_tol(tol))
}

pub fn eigenvalues_outside_band_with(op: &JacobiOperator, opts: &SolverOptions) -> Result<SpectrumResult> {
    let (level, pad, gap, history) = stabilize(op.len(), opts, |pad| scalar_level(op, pad))?;
    let x = -2.0 - BAND_MARGIN;
    let mut exact = count::scalar_eigenvalues_below(op, x);
    exact.extend(count::scalar_eigenvalues_below(&op.sign_flip_conjugate(), x).iter().map(|v| -v));
    into_result(exact, level, pad, gap, history, None)
}

/// Eigenvalues of a block operator with multiplicities (clustered within
/// `10 tol`).
pub fn block_eigen(op: &BlockJacobiOperator, tol: f64) -> Result<SpectrumResult> {
    block_eigen_with(op, &SolverOptions::with_tol(tol))
}

pub fn block_eigen_with(op: &BlockJacobiOperator, opts: &SolverOptions) -> Result<SpectrumResult> {
    let limit = opts.band_reduction_limit;
    let (level, pad, gap, history) = stabilize(op.len(), opts, |pad| block_level(op, pad, limit))?;
    let x = -2.0 - BAND_MARGIN;
    let mut exact = count::block_eigenvalues_below(op, x);
    exact.extend(count::block_eigenvalues_below(&op.sign_flip_conjugate(), x).iter().map(|v| -v));
    into_result(exact, level, pad, gap, history, Some(10.0 * opts.tol))
}

/// Spectrum of either kind of operator.
pub fn spectrum(op: &Operator, opts: &SolverOptions) -> Result<SpectrumResult> {
    match op {
        Operator::Scalar(s) => eigenvalues_outside_band_with(s, opts),
        Operator::Block(b) => block_eigen_with(b, opts),
    }
}

/// Padding after which an eigenvector decaying like `|k|^-n` has dropped
/// below double precision.
pub(crate) fn decay_padding(k: f64) -> usize {
    (37.0 / (k.abs() - 1.0).ln_1p()).ceil() as usize + 16
}

/// Ascending eigenvalues of the scalar truncation at padding `pad` lying in
/// `(lo, hi)`.
pub(crate) fn scalar_truncation_eigenvalues(op: &JacobiOperator, pad: usize, lo: f64, hi: f64) -> Vec<f64> {
    let (_, d, e) = op.truncated_tridiagonal(pad);
    tridiagonal::tridiagonal_eigenvalues(&d, &e, lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CMat, C64};
    use crate::operator::{make_reflectionless, ReflectionlessSpec};

    #[test]
    fn spectral_point_relation() {
        for lambda in [-2.0 - 1e-8, -2.5, -40.0, 2.0 + 1e-6, 3.3, 1e6] {
            let p = SpectralPoint::from_lambda(lambda, 1).unwrap();
            assert!(p.k.abs() > 1.0);
            assert!((lambda + p.k + 1.0 / p.k).abs() <= 1e-12 * lambda.abs().max(1.0));
            assert_eq!(p.k > 0.0, lambda < 0.0);
        }
        assert!(SpectralPoint::from_lambda(1.5, 1).is_err());
        assert!(SpectralPoint::from_k(0.5, 1).is_err());
    }

    #[test]
    fn free_operator_has_no_eigenvalues() {
        let r = eigenvalues_outside_band(&JacobiOperator::free(), DEFAULT_TOL).unwrap();
        assert!(r.points.is_empty());
    }

    #[test]
    fn delta_potential_eigenvalue() {
        for beta in [0.1, 1.0, 3.0, 10.0] {
            let op = JacobiOperator::new(0, vec![-1.0], vec![-beta]).unwrap();
            let r = eigenvalues_outside_band(&op, DEFAULT_TOL).unwrap();
            assert_eq!(r.points.len(), 1);
            let exact = -(beta * beta + 4.0f64).sqrt();
            assert!((r.points[0].lambda - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn reflectionless_single_eigenvalue() {
        for omega in [0.25, 1.0, 2.0] {
            let op = make_reflectionless(&ReflectionlessSpec::new(omega)).unwrap();
            let r = eigenvalues_outside_band(&op, 1e-12).unwrap();
            assert_eq!(r.points.len(), 1, "omega {omega}");
            assert!((r.points[0].lambda + 2.0 * omega.cosh()).abs() < 1e-12);
            assert!((r.points[0].k - omega.exp()).abs() < 1e-11);
        }
    }

    #[test]
    fn absurd_cap_gives_no_convergence() {
        let op = JacobiOperator::new(0, vec![-1.0], vec![-1.0]).unwrap();
        let opts = SolverOptions {
            max_padding: 4,
            ..SolverOptions::default()
        };
        assert!(matches!(eigenvalues_outside_band_with(&op, &opts), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn block_routes_agree() {
        let m = 2;
        let b0 = CMat::from_fn(m, |i, j| if i == j { C64::new(-1.5 + i as f64, 0.0) } else { C64::new(0.4, if i < j { 0.3 } else { -0.3 }) });
        let a0 = CMat::from_fn(m, |i, j| if i == j { C64::new(-1.0, 0.0) } else { C64::new(0.2, 0.1) });
        let op = BlockJacobiOperator::new(0, m, vec![a0.clone(), a0], vec![b0.clone(), b0.scale(-1.2)]).unwrap();
        let band = block_eigen(&op, 1e-11).unwrap();
        let inertia = block_eigen_with(
            &op,
            &SolverOptions {
                tol: 1e-11,
                band_reduction_limit: 0,
                ..SolverOptions::default()
            },
        )
        .unwrap();
        assert_eq!(band.expanded().len(), inertia.expanded().len());
        for (x, y) in band.expanded().iter().zip(inertia.expanded()) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!(!band.points.is_empty());
    }

    #[test]
    fn block_multiplicity_from_identical_channels() {
        let m = 3;
        let op = BlockJacobiOperator::new(
            0,
            m,
            vec![CMat::scalar(m, -1.0); 2],
            vec![CMat::scalar(m, -1.3), CMat::scalar(m, 0.4)],
        )
        .unwrap();
        let r = block_eigen(&op, 1e-10).unwrap();
        let scalar = eigenvalues_outside_band(&JacobiOperator::new(0, vec![-1.0; 2], vec![-1.3, 0.4]).unwrap(), 1e-10).unwrap();
        assert_eq!(r.points.len(), scalar.points.len());
        for (p, q) in r.points.iter().zip(&scalar.points) {
            assert_eq!(p.multiplicity, 3);
            assert!((p.lambda - q.lambda).abs() < 1e-10);
        }
    }
}
