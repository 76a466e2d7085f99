//! Small dense complex matrices used for block coefficients.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::eigen::dense;

pub type C64 = Complex64;

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, 1.0)
    }

    pub fn scalar(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(s, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from row-major entries; `None` if the length is not a square.
    pub fn from_row_major(entries: Vec<C64>) -> Option<Self> {
        let n = (entries.len() as f64).sqrt().round() as usize;
        (n * n == entries.len()).then_some(Self { n, data: entries })
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Matrix whose columns are `cols`, each of length `cols.len()`.
    pub fn from_columns(cols: &[Vec<C64>]) -> Self {
        let n = cols.len();
        CMat::from_fn(n, |i, j| cols[j][i])
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add_diag(&self, s: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m[(i, i)] += s;
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry of `self - self^*`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for i in 0..self.n {
            for j in 0..=i {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Replaces the matrix by its Hermitian part.
    pub fn hermitize(&self) -> Self {
        Self::from_fn(self.n, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    fn lu(&self) -> Option<(CMat, Vec<usize>, bool)> {
        let n = self.n;
        let mut lu = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| lu[(x, k)].norm().total_cmp(&lu[(y, k)].norm()))
                .unwrap_or(k);
            if lu[(p, k)].norm() == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(p * n + j, k * n + j);
                }
                perm.swap(p, k);
                odd = !odd;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let v = lu[(k, j)];
                    lu[(i, j)] -= f * v;
                }
            }
        }
        Some((lu, perm, odd))
    }

    pub fn inverse(&self) -> Option<CMat> {
        let n = self.n;
        let (lu, perm, _) = self.lu()?;
        let mut inv = CMat::zeros(n);
        for col in 0..n {
            let mut x: Vec<C64> = (0..n)
                .map(|i| if perm[i] == col { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
                .collect();
            for i in 0..n {
                for j in 0..i {
                    let v = lu[(i, j)] * x[j];
                    x[i] -= v;
                }
            }
            for i in (0..n).rev() {
                for j in i + 1..n {
                    let v = lu[(i, j)] * x[j];
                    x[i] -= v;
                }
                x[i] /= lu[(i, i)];
            }
            for i in 0..n {
                inv[(i, col)] = x[i];
            }
        }
        inv.is_finite().then_some(inv)
    }

    /// `log |det self|`, or `-inf` for a singular matrix.
    pub fn log_abs_det(&self) -> f64 {
        match self.lu() {
            Some((lu, _, _)) => (0..self.n).map(|i| lu[(i, i)].norm().ln()).sum(),
            None => f64::NEG_INFINITY,
        }
    }

    /// One-norm condition number estimate `||M||_1 ||M^-1||_1`.
    pub fn condition(&self) -> f64 {
        let norm1 = |m: &CMat| {
            (0..m.n)
                .map(|j| (0..m.n).map(|i| m[(i, j)].norm()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        match self.inverse() {
            Some(inv) => norm1(self) * norm1(&inv),
            None => f64::INFINITY,
        }
    }

    /// Eigen-decomposition of the Hermitian part: ascending eigenvalues and
    /// unitary eigenvector matrix (columns).
    pub fn hermitian_eigen(&self) -> (Vec<f64>, CMat) {
        dense::hermitian_eigen(&self.hermitize())
    }

    /// `U f(diag) U^*` for a Hermitian matrix.
    pub fn hermitian_map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let (vals, vecs) = self.hermitian_eigen();
        Self::reassemble(&vecs, &vals.iter().map(|&v| f(v)).collect::<Vec<_>>())
    }

    /// `U diag(vals) U^*`.
    pub fn reassemble(vecs: &CMat, vals: &[f64]) -> CMat {
        let n = vecs.n;
        CMat::from_fn(n, |i, j| {
            (0..n)
                .map(|k| vecs[(i, k)] * vals[k] * vecs[(j, k)].conj())
                .sum()
        })
    }
}

/// Congruence factorization `D = T diag(w) T^*` of a Hermitian pivot, with
/// `T` unit lower triangular (`LDL^*`) or unitary (eigenvectors). By Sylvester
/// the signs of `w` give the inertia of `D`.
#[derive(Debug, Clone)]
pub struct Pivot {
    t: CMat,
    w: Vec<f64>,
    unitary: bool,
}

impl Pivot {
    /// `LDL^*` without pivoting; `None` when a pivot falls below `floor` times
    /// the largest entry.
    pub fn ldl(d: &CMat, floor: f64) -> Option<Self> {
        let n = d.n;
        let tiny = floor * d.max_abs();
        let mut l = CMat::identity(n);
        let mut w = vec![0.0; n];
        for j in 0..n {
            let mut dj = d[(j, j)].re;
            for k in 0..j {
                dj -= l[(j, k)].norm_sqr() * w[k];
            }
            if !(dj.abs() > tiny) {
                return None;
            }
            w[j] = dj;
            for i in j + 1..n {
                let mut v = d[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)].conj() * w[k];
                }
                l[(i, j)] = v / dj;
            }
        }
        Some(Self { t: l, w, unitary: false })
    }

    pub fn eigen(d: &CMat) -> Self {
        let (w, t) = d.hermitian_eigen();
        Self { t, w, unitary: true }
    }

    /// `LDL^*` when it is well conditioned, else the eigen-decomposition.
    pub fn new(d: &CMat, floor: f64) -> Self {
        Self::ldl(d, floor).unwrap_or_else(|| Self::eigen(d))
    }

    pub fn is_eigen(&self) -> bool {
        self.unitary
    }

    /// Eigenvalues for the eigen form, `LDL^*` pivots otherwise.
    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn negative_count(&self) -> usize {
        self.w.iter().filter(|&&v| v < 0.0).count()
    }

    /// `a^* D^{-1} a`, exactly Hermitian.
    pub fn quadratic(&self, a: &CMat) -> CMat {
        let n = a.n;
        let y = if self.unitary {
            &self.t.adjoint() * a
        } else {
            let mut y = a.clone();
            for i in 1..n {
                for k in 0..i {
                    let lik = self.t[(i, k)];
                    for j in 0..n {
                        let v = lik * y[(k, j)];
                        y[(i, j)] -= v;
                    }
                }
            }
            y
        };
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v: C64 = (0..n).map(|k| y[(k, i)].conj() * y[(k, j)] / self.w[k]).sum();
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
            out[(i, i)] = C64::new(out[(i, i)].re, 0.0);
        }
        out
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        CMat {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        CMat {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}
