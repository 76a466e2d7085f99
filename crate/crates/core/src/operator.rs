//! Scalar and block Jacobi operators that are free outside a finite window.
//!
//! A scalar operator acts as
//! `(W u)(n) = a(n-1) u(n-1) + a(n) u(n+1) + b(n) u(n)` with `a(n) < 0`,
//! `a(n) = -1` and `b(n) = 0` outside `[window_start, window_start + len)`.
//! The block analogue uses `A(n-1)^*` on the left neighbour.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

/// Largest condition number accepted for a block off-diagonal coefficient.
pub const MAX_OFFDIAG_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct JacobiOperator {
    window_start: i64,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl JacobiOperator {
    pub fn new(window_start: i64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch { a: a.len(), b: b.len() });
        }
        for (i, &x) in a.iter().enumerate() {
            if !(x < 0.0) || !x.is_finite() {
                return Err(Error::NonNegativeOffDiagonal {
                    index: window_start + i as i64,
                    value: x,
                });
            }
        }
        if let Some(i) = b.iter().position(|x| !x.is_finite()) {
            return Err(Error::DomainError(format!(
                "b({}) is not finite",
                window_start + i as i64
            )));
        }
        Ok(Self { window_start, a, b })
    }

    /// The free operator `a = -1`, `b = 0`.
    pub fn free() -> Self {
        Self {
            window_start: 0,
            a: Vec::new(),
            b: Vec::new(),
        }
    }

    pub fn window_start(&self) -> i64 {
        self.window_start
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// One past the last window site.
    pub fn window_end(&self) -> i64 {
        self.window_start + self.a.len() as i64
    }

    pub fn a_window(&self) -> &[f64] {
        &self.a
    }

    pub fn b_window(&self) -> &[f64] {
        &self.b
    }

    pub fn a(&self, n: i64) -> f64 {
        self.index(n).map_or(-1.0, |i| self.a[i])
    }

    pub fn b(&self, n: i64) -> f64 {
        self.index(n).map_or(0.0, |i| self.b[i])
    }

    fn index(&self, n: i64) -> Option<usize> {
        let i = n - self.window_start;
        (i >= 0 && (i as usize) < self.a.len()).then_some(i as usize)
    }

    /// `(a, -b)`: the spectrum is negated.
    pub fn sign_flip_conjugate(&self) -> Self {
        Self {
            window_start: self.window_start,
            a: self.a.clone(),
            b: self.b.iter().map(|x| -x).collect(),
        }
    }

    /// Keeps coefficients with `|n| < cutoff`, free elsewhere.
    pub fn truncate(&self, cutoff: i64) -> Self {
        let lo = self.window_start.max(-cutoff + 1);
        let hi = self.window_end().min(cutoff);
        if lo >= hi {
            return Self::free();
        }
        let range = (lo - self.window_start) as usize..(hi - self.window_start) as usize;
        Self {
            window_start: lo,
            a: self.a[range.clone()].to_vec(),
            b: self.b[range].to_vec(),
        }
    }

    /// Drops free sites at both ends of the window.
    pub fn trimmed(&self) -> Self {
        let free = |i: usize| self.a[i] == -1.0 && self.b[i] == 0.0;
        let n = self.a.len();
        let lo = (0..n).find(|&i| !free(i));
        match lo {
            None => Self::free(),
            Some(lo) => {
                let hi = (0..n).rev().find(|&i| !free(i)).unwrap() + 1;
                Self {
                    window_start: self.window_start + lo as i64,
                    a: self.a[lo..hi].to_vec(),
                    b: self.b[lo..hi].to_vec(),
                }
            }
        }
    }

    /// `true` when every off-diagonal coefficient equals `-1`.
    pub fn has_free_offdiagonal(&self) -> bool {
        self.a.iter().all(|&x| x == -1.0)
    }

    pub fn sum_b_sq(&self) -> f64 {
        self.b.iter().map(|x| x * x).sum()
    }

    /// `sum (a^2 - 1)`.
    pub fn sum_a_sq_minus_one(&self) -> f64 {
        self.a.iter().map(|x| (x - 1.0) * (x + 1.0)).sum()
    }

    /// `sum log a^2`.
    pub fn sum_log_a_sq(&self) -> f64 {
        self.a.iter().map(|x| 2.0 * x.abs().ln()).sum()
    }

    /// `sum b^2 + 2 sum (a^2 - 1 - log a^2)`.
    pub fn final_functional(&self) -> f64 {
        self.sum_b_sq()
            + 2.0
                * self
                    .a
                    .iter()
                    .map(|&x| {
                        let t = (x - 1.0) * (x + 1.0);
                        t - t.ln_1p()
                    })
                    .sum::<f64>()
    }

    /// Size proxy used to scale identity residuals.
    pub fn size_scale(&self) -> f64 {
        self.sum_b_sq() + self.a.iter().map(|x| ((x - 1.0) * (x + 1.0)).abs()).sum::<f64>()
    }

    /// Tridiagonal matrix of the operator on sites
    /// `[window_start - pad, window_end + pad)`: `(first_site, diag, off)`.
    pub fn truncated_tridiagonal(&self, pad: usize) -> (i64, Vec<f64>, Vec<f64>) {
        let first = self.window_start - pad as i64;
        let last = self.window_end() + pad as i64;
        let diag = (first..last).map(|n| self.b(n)).collect();
        let off = (first..last - 1).map(|n| self.a(n)).collect();
        (first, diag, off)
    }

    pub fn to_block(&self) -> BlockJacobiOperator {
        BlockJacobiOperator {
            window_start: self.window_start,
            block_dim: 1,
            a: self.a.iter().map(|&x| CMat::scalar(1, x)).collect(),
            b: self.b.iter().map(|&x| CMat::scalar(1, x)).collect(),
        }
    }
}

/// Reflectionless operator with a single eigenvalue `-2 cosh(omega)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionlessSpec {
    pub omega: f64,
    /// Materialize `|n| <= half_width`; chosen automatically when absent.
    pub half_width: Option<usize>,
}

impl ReflectionlessSpec {
    pub fn new(omega: f64) -> Self {
        Self {
            omega,
            half_width: None,
        }
    }

    /// `b(n) = -sinh^2(w) / (cosh(wn) cosh(w(n+1)))`.
    pub fn b(&self, n: i64) -> f64 {
        let w = self.omega;
        let sh = w.sinh();
        -(sh * sh) / ((w * n as f64).cosh() * (w * (n + 1) as f64).cosh())
    }

    /// `a(n) = -sqrt(1 + sinh^2(w) / cosh^2(w(n+1)))`.
    pub fn a(&self, n: i64) -> f64 {
        let w = self.omega;
        let r = w.sinh() / (w * (n + 1) as f64).cosh();
        -r.hypot(1.0)
    }

    /// `sum_{|n| > half_width} (|b(n)| + |a(n) + 1|)`.
    pub fn tail_bound(&self, half_width: usize) -> f64 {
        let mut total = 0.0;
        let h = half_width as i64;
        for j in 1.. {
            let mut term = 0.0;
            for n in [h + j, -h - j] {
                let w = self.omega;
                let r = w.sinh() / (w * (n + 1) as f64).cosh();
                term += self.b(n).abs() + r * r / (1.0 + r.hypot(1.0));
            }
            total += term;
            if term <= total * 1e-18 || term == 0.0 || j > 1_000_000 {
                break;
            }
        }
        total
    }

    /// Smallest half width whose tail bound falls below `1e-17`.
    pub fn auto_half_width(&self) -> usize {
        let mut h = 1usize;
        while self.tail_bound(h) > 1e-17 && h < 1 << 20 {
            h += 1;
        }
        h
    }

    pub fn eigenvalue(&self) -> f64 {
        -2.0 * self.omega.cosh()
    }

    pub fn k(&self) -> f64 {
        self.omega.exp()
    }
}

/// Materializes the reflectionless operator on `|n| <= half_width`.
pub fn make_reflectionless(spec: &ReflectionlessSpec) -> Result<JacobiOperator> {
    if !(spec.omega > 0.0) || !spec.omega.is_finite() {
        return Err(Error::DomainError(format!("omega must be positive, got {}", spec.omega)));
    }
    let h = spec.half_width.unwrap_or_else(|| spec.auto_half_width()) as i64;
    let a = (-h..=h).map(|n| spec.a(n)).collect();
    let b = (-h..=h).map(|n| spec.b(n)).collect();
    JacobiOperator::new(-h, a, b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockJacobiOperator {
    window_start: i64,
    block_dim: usize,
    a: Vec<CMat>,
    b: Vec<CMat>,
}

impl BlockJacobiOperator {
    pub fn new(window_start: i64, block_dim: usize, a: Vec<CMat>, b: Vec<CMat>) -> Result<Self> {
        if block_dim == 0 {
            return Err(Error::BlockShape("block dimension must be positive".into()));
        }
        if a.len() != b.len() {
            return Err(Error::LengthMismatch { a: a.len(), b: b.len() });
        }
        for (i, (am, bm)) in a.iter().zip(&b).enumerate() {
            let index = window_start + i as i64;
            if am.dim() != block_dim || bm.dim() != block_dim {
                return Err(Error::BlockShape(format!(
                    "coefficient at site {index} is not {block_dim}x{block_dim}"
                )));
            }
            if !am.is_finite() || !bm.is_finite() {
                return Err(Error::DomainError(format!("non-finite coefficient at site {index}")));
            }
            let dev = bm.hermitian_deviation();
            if dev > 1e-12 * bm.max_abs().max(1.0) {
                return Err(Error::NotHermitian { index, deviation: dev });
            }
            let condition = am.condition();
            if !(condition <= MAX_OFFDIAG_CONDITION) {
                return Err(Error::SingularOffDiagonal { index, condition });
            }
        }
        let b = b.into_iter().map(|m| m.hermitize()).collect();
        Ok(Self {
            window_start,
            block_dim,
            a,
            b,
        })
    }

    pub fn free(block_dim: usize) -> Self {
        Self {
            window_start: 0,
            block_dim,
            a: Vec::new(),
            b: Vec::new(),
        }
    }

    pub fn window_start(&self) -> i64 {
        self.window_start
    }

    pub fn window_end(&self) -> i64 {
        self.window_start + self.a.len() as i64
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn a_window(&self) -> &[CMat] {
        &self.a
    }

    pub fn b_window(&self) -> &[CMat] {
        &self.b
    }

    fn index(&self, n: i64) -> Option<usize> {
        let i = n - self.window_start;
        (i >= 0 && (i as usize) < self.a.len()).then_some(i as usize)
    }

    pub fn a(&self, n: i64) -> CMat {
        self.index(n)
            .map_or_else(|| CMat::scalar(self.block_dim, -1.0), |i| self.a[i].clone())
    }

    pub fn b(&self, n: i64) -> CMat {
        self.index(n)
            .map_or_else(|| CMat::zeros(self.block_dim), |i| self.b[i].clone())
    }

    pub fn sign_flip_conjugate(&self) -> Self {
        Self {
            window_start: self.window_start,
            block_dim: self.block_dim,
            a: self.a.clone(),
            b: self.b.iter().map(|m| m.scale(-1.0)).collect(),
        }
    }

    pub fn truncate(&self, cutoff: i64) -> Self {
        let lo = self.window_start.max(-cutoff + 1);
        let hi = self.window_end().min(cutoff);
        if lo >= hi {
            return Self::free(self.block_dim);
        }
        let range = (lo - self.window_start) as usize..(hi - self.window_start) as usize;
        Self {
            window_start: lo,
            block_dim: self.block_dim,
            a: self.a[range.clone()].to_vec(),
            b: self.b[range].to_vec(),
        }
    }

    /// `true` when every `A(n)` equals `-I` exactly.
    pub fn has_free_offdiagonal(&self) -> bool {
        let minus_id = CMat::scalar(self.block_dim, -1.0);
        self.a.iter().all(|m| *m == minus_id)
    }

    pub fn sum_tr_b_sq(&self) -> f64 {
        self.b.iter().map(|m| m.frobenius_sq()).sum()
    }

    /// `sum tr(A A^* - I)`.
    pub fn sum_tr_aa_minus_id(&self) -> f64 {
        self.a
            .iter()
            .map(|m| m.frobenius_sq() - self.block_dim as f64)
            .sum()
    }

    /// `sum log det(A A^*)`.
    pub fn sum_log_det_aa(&self) -> f64 {
        self.a.iter().map(|m| 2.0 * m.log_abs_det()).sum()
    }

    /// `sum tr B^2 + 2 sum [tr(A A^* - I) - log det(A A^*)]`.
    pub fn final_functional(&self) -> f64 {
        self.sum_tr_b_sq() + 2.0 * (self.sum_tr_aa_minus_id() - self.sum_log_det_aa())
    }

    pub fn size_scale(&self) -> f64 {
        self.sum_tr_b_sq()
            + self
                .a
                .iter()
                .map(|m| (m.frobenius_sq() - self.block_dim as f64).abs())
                .sum::<f64>()
    }

    /// Hermitian band matrix on sites `[window_start - pad, window_end + pad)`
    /// with bandwidth `2m - 1`; returns the first site and the band.
    pub fn truncated_band(&self, pad: usize) -> (i64, crate::eigen::band::HermitianBand) {
        let m = self.block_dim;
        let first = self.window_start - pad as i64;
        let sites = self.a.len() + 2 * pad;
        let mut band = crate::eigen::band::HermitianBand::zeros(sites * m, (2 * m).saturating_sub(1));
        for s in 0..sites {
            let n = first + s as i64;
            let bm = self.b(n);
            for i in 0..m {
                for j in 0..=i {
                    band.set(s * m + i, s * m + j, bm[(i, j)]);
                }
            }
            if s + 1 < sites {
                // Row block n + 1, column block n holds A(n)^*.
                let am = self.a(n);
                for i in 0..m {
                    for j in 0..m {
                        band.set((s + 1) * m + i, s * m + j, am[(j, i)].conj());
                    }
                }
            }
        }
        (first, band)
    }
}

/// Either kind of operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "OperatorJson", try_from = "OperatorJson")]
pub enum Operator {
    Scalar(JacobiOperator),
    Block(BlockJacobiOperator),
}

impl Operator {
    pub fn block_dim(&self) -> usize {
        match self {
            Operator::Scalar(_) => 1,
            Operator::Block(op) => op.block_dim(),
        }
    }

    pub fn sign_flip_conjugate(&self) -> Self {
        match self {
            Operator::Scalar(op) => Operator::Scalar(op.sign_flip_conjugate()),
            Operator::Block(op) => Operator::Block(op.sign_flip_conjugate()),
        }
    }

    pub fn has_free_offdiagonal(&self) -> bool {
        match self {
            Operator::Scalar(op) => op.has_free_offdiagonal(),
            Operator::Block(op) => op.has_free_offdiagonal(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&OperatorJson::from(self)).expect("operator serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: OperatorJson =
            serde_json::from_str(text).map_err(|e| Error::DomainError(format!("invalid operator JSON: {e}")))?;
        wire.try_into()
    }
}

impl From<JacobiOperator> for Operator {
    fn from(op: JacobiOperator) -> Self {
        Operator::Scalar(op)
    }
}

impl From<BlockJacobiOperator> for Operator {
    fn from(op: BlockJacobiOperator) -> Self {
        Operator::Block(op)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct ComplexJson {
    re: f64,
    im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Coefficients {
    Real(Vec<f64>),
    Blocks(Vec<Vec<ComplexJson>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorJson {
    a: Coefficients,
    b: Coefficients,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    block_dim: Option<usize>,
    kind: String,
    window_start: i64,
}

impl From<&Operator> for OperatorJson {
    fn from(op: &Operator) -> Self {
        let blocks = |ms: &[CMat]| {
            Coefficients::Blocks(
                ms.iter()
                    .map(|m| m.entries().iter().map(|z| ComplexJson { re: z.re, im: z.im }).collect())
                    .collect(),
            )
        };
        match op {
            Operator::Scalar(s) => OperatorJson {
                a: Coefficients::Real(s.a.clone()),
                b: Coefficients::Real(s.b.clone()),
                block_dim: None,
                kind: "scalar".into(),
                window_start: s.window_start,
            },
            Operator::Block(bl) => OperatorJson {
                a: blocks(&bl.a),
                b: blocks(&bl.b),
                block_dim: Some(bl.block_dim),
                kind: "block".into(),
                window_start: bl.window_start,
            },
        }
    }
}

impl From<Operator> for OperatorJson {
    fn from(op: Operator) -> Self {
        (&op).into()
    }
}

impl TryFrom<OperatorJson> for Operator {
    type Error = Error;

    fn try_from(w: OperatorJson) -> Result<Self> {
        let real = |c: Coefficients| match c {
            Coefficients::Real(v) => Ok(v),
            Coefficients::Blocks(v) if v.is_empty() => Ok(Vec::new()),
            Coefficients::Blocks(_) => Err(Error::BlockShape("scalar operator given block coefficients".into())),
        };
        match w.kind.as_str() {
            "scalar" => Ok(Operator::Scalar(JacobiOperator::new(w.window_start, real(w.a)?, real(w.b)?)?)),
            "block" => {
                let m = w
                    .block_dim
                    .ok_or_else(|| Error::BlockShape("block operator needs block_dim".into()))?;
                let mats = |c: Coefficients| -> Result<Vec<CMat>> {
                    let rows = match c {
                        Coefficients::Blocks(v) => v,
                        Coefficients::Real(v) if v.is_empty() => Vec::new(),
                        Coefficients::Real(_) => {
                            return Err(Error::BlockShape("block entries must be complex objects".into()))
                        }
                    };
                    rows.into_iter()
                        .map(|entries| {
                            if entries.len() != m * m {
                                return Err(Error::BlockShape(format!(
                                    "expected {} entries per block, found {}",
                                    m * m,
                                    entries.len()
                                )));
                            }
                            Ok(CMat::from_row_major(entries.iter().map(|z| C64::new(z.re, z.im)).collect())
                                .expect("square by construction"))
                        })
                        .collect()
                };
                Ok(Operator::Block(BlockJacobiOperator::new(w.window_start, m, mats(w.a)?, mats(w.b)?)?))
            }
            other => Err(Error::DomainError(format!("unknown operator kind `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonnegative_offdiagonal() {
        let err = JacobiOperator::new(3, vec![-1.0, 0.0], vec![0.0, 0.0]).unwrap_err();
        assert_eq!(err, Error::NonNegativeOffDiagonal { index: 4, value: 0.0 });
        assert!(matches!(
            JacobiOperator::new(0, vec![-1.0], vec![]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn free_values_outside_window() {
        let op = JacobiOperator::new(-2, vec![-2.0, -0.5], vec![1.0, 3.0]).unwrap();
        assert_eq!(op.a(-3), -1.0);
        assert_eq!(op.a(-1), -0.5);
        assert_eq!(op.b(0), 0.0);
        assert_eq!(op.b(-2), 1.0);
    }

    #[test]
    fn reflectionless_stable_forms_match_direct_formula() {
        for omega in [0.1, 0.5, 1.0, 3.0] {
            let spec = ReflectionlessSpec::new(omega);
            for n in -12i64..=12 {
                let c = |j: i64| (omega * j as f64).cosh();
                let b_direct = c(n) / c(n + 1) - c(n - 1) / c(n);
                let a_direct = -(c(n) * c(n + 2)).sqrt() / c(n + 1);
                assert!((spec.b(n) - b_direct).abs() < 1e-13 * c(1).powi(2));
                assert!((spec.a(n) - a_direct).abs() < 1e-13 * c(1).powi(2));
            }
        }
    }

    #[test]
    fn reflectionless_log_sum() {
        let spec = ReflectionlessSpec::new(0.75);
        let op = make_reflectionless(&spec).unwrap();
        assert!((op.sum_log_a_sq() - 1.5).abs() < 1e-14);
        assert!(spec.tail_bound(op.len() / 2) < 1e-17);
    }

    #[test]
    fn truncation_keeps_inner_coefficients() {
        let op = make_reflectionless(&ReflectionlessSpec { omega: 1.0, half_width: Some(10) }).unwrap();
        let t = op.truncate(5);
        assert_eq!(t.window_start(), -4);
        assert_eq!(t.window_end(), 5);
        assert_eq!(t.a(4), op.a(4));
        assert_eq!(t.a(5), -1.0);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let op = Operator::Scalar(
            JacobiOperator::new(-3, vec![-1.1, -0.1 - 1e-17, -7.3e-300], vec![0.1, 1.0 / 3.0, -2.5]).unwrap(),
        );
        assert_eq!(Operator::from_json(&op.to_json()).unwrap(), op);
        let m = CMat::from_fn(2, |i, j| C64::new((i + 2 * j) as f64 / 7.0, if i == j { 0.0 } else { 0.3 }));
        let herm = (&m + &m.adjoint()).scale(0.5);
        let a = CMat::from_fn(2, |i, j| C64::new(if i == j { -1.0 } else { 0.1 / 3.0 }, 0.2));
        let block = Operator::Block(BlockJacobiOperator::new(4, 2, vec![a], vec![herm]).unwrap());
        assert_eq!(Operator::from_json(&block.to_json()).unwrap(), block);
    }

    #[test]
    fn json_rejects_bad_input() {
        assert!(Operator::from_json(r#"{"kind":"scalar","window_start":0,"a":[0.5],"b":[0.0]}"#).is_err());
        assert!(Operator::from_json(r#"{"kind":"weird","window_start":0,"a":[],"b":[]}"#).is_err());
        assert!(Operator::from_json(
            r#"{"kind":"block","window_start":0,"block_dim":2,"a":[[{"re":-1,"im":0}]],"b":[[{"re":0,"im":0}]]}"#
        )
        .is_err());
    }

    #[test]
    fn block_validation() {
        let nonherm = CMat::from_fn(2, |i, j| C64::new(0.0, if i < j { 1.0 } else { 0.0 }));
        let minus = CMat::scalar(2, -1.0);
        assert!(matches!(
            BlockJacobiOperator::new(0, 2, vec![minus.clone()], vec![nonherm]),
            Err(Error::NotHermitian { .. })
        ));
        let singular = CMat::from_fn(2, |_, _| C64::new(-1.0, 0.0));
        assert!(matches!(
            BlockJacobiOperator::new(0, 2, vec![singular], vec![CMat::zeros(2)]),
            Err(Error::SingularOffDiagonal { .. })
        ));
    }

    #[test]
    fn sign_flip_twice_is_identity() {
        let op = JacobiOperator::new(1, vec![-0.3, -2.0], vec![0.4, -1.0]).unwrap();
        assert_eq!(op.sign_flip_conjugate().sign_flip_conjugate(), op);
    }
}
