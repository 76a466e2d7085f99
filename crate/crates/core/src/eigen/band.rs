//! Reduction of a Hermitian band matrix to real symmetric tridiagonal form by
//! unitary plane rotations with bulge chasing. Cost is `O(n^2 b)`.

use crate::linalg::C64;

/// Lower band storage: entry `(i, j)` with `0 <= i - j <= bandwidth + 1`.
/// One extra diagonal holds the bulge created while chasing.
#[derive(Debug, Clone)]
pub struct HermitianBand {
    n: usize,
    bandwidth: usize,
    data: Vec<C64>,
}

impl HermitianBand {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self {
            n,
            bandwidth,
            data: vec![C64::new(0.0, 0.0); n * (bandwidth + 2)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        i * (self.bandwidth + 2) + (i - j)
    }

    /// Entry `(i, j)` for `i >= j`; zero outside the stored band.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        if i < j || i - j > self.bandwidth + 1 {
            C64::new(0.0, 0.0)
        } else {
            self.data[self.slot(i, j)]
        }
    }

    /// Sets the lower entry `(i, j)`, `i >= j`, within the bandwidth.
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        assert!(i >= j && i - j <= self.bandwidth, "entry outside band");
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    fn at(&mut self, i: usize, j: usize) -> &mut C64 {
        let s = self.slot(i, j);
        &mut self.data[s]
    }

    /// Applies the rotation `G = [[c, s], [-conj(s), c]]` on rows and columns
    /// `p, p + 1` as the similarity `G H G^*`, with current bandwidth `bw`.
    fn rotate(&mut self, p: usize, c: f64, s: C64, bw: usize) {
        let q = p + 1;
        let sc = s.conj();
        let w = self.bandwidth + 2;
        let data = &mut self.data;
        // Row p holds (p, col) at p w + p - col; row q at q w + q - col.
        for col in q.saturating_sub(bw + 1)..p {
            let ip = p * w + (p - col);
            let iq = q * w + (q - col);
            let (xp, xq) = (data[ip], data[iq]);
            data[ip] = xp * c + s * xq;
            data[iq] = -sc * xp + xq * c;
        }
        let (ipp, iqp, iqq) = (p * w, q * w + 1, q * w);
        let hpp = data[ipp];
        let hqp = data[iqp];
        let hqq = data[iqq];
        let hpq = hqp.conj();
        // M' = G M G^*
        let r00 = hpp * c + s * hqp;
        let r01 = hpq * c + s * hqq;
        let r10 = -sc * hpp + hqp * c;
        let r11 = -sc * hpq + hqq * c;
        let new_pp = r00 * c + r01 * sc;
        let new_qp = r10 * c + r11 * sc;
        let new_qq = -r10 * s + r11 * c;
        data[ipp] = C64::new(new_pp.re, 0.0);
        data[iqp] = new_qp;
        data[iqq] = C64::new(new_qq.re, 0.0);
        let last = (p + bw + 1).min(self.n - 1);
        for r in q + 1..=last {
            let ip = r * w + (r - p);
            let iq = ip - 1;
            let (xp, xq) = (data[ip], data[iq]);
            data[ip] = xp * c + xq * sc;
            data[iq] = -xp * s + xq * c;
        }
    }

    /// Rotation on `(p, p + 1)` that annihilates `(p + 1, col)` against `(p, col)`.
    fn annihilate(&mut self, p: usize, col: usize, bw: usize) -> bool {
        let f = self.get(p, col);
        let g = self.get(p + 1, col);
        if g.norm() == 0.0 {
            return false;
        }
        let (c, s) = if f.norm() == 0.0 {
            (0.0, C64::new(1.0, 0.0))
        } else {
            let r = f.norm().hypot(g.norm());
            (f.norm() / r, (f / f.norm()) * g.conj() / r)
        };
        self.rotate(p, c, s, bw);
        *self.at(p + 1, col) = C64::new(0.0, 0.0);
        true
    }

    /// Real symmetric tridiagonal `(diag, off)` unitarily similar to `self`.
    pub fn reduce_to_tridiagonal(mut self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        for bw in (2..=self.bandwidth).rev() {
            for j in 0..n {
                if j + bw >= n {
                    break;
                }
                let mut row = j + bw;
                let mut col = j;
                while row < n {
                    if !self.annihilate(row - 1, col, bw) {
                        break;
                    }
                    col = row - 1;
                    row += bw;
                }
            }
        }
        let diag = (0..n).map(|i| self.get(i, i).re).collect();
        let off = (0..n.saturating_sub(1)).map(|i| self.get(i + 1, i).norm()).collect();
        (diag, off)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::dense::hermitian_eigen;
    use crate::eigen::tridiagonal::tridiagonal_eigenvalues;
    use crate::linalg::CMat;

    fn random_band(n: usize, b: usize, seed: u64) -> (HermitianBand, CMat) {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut band = HermitianBand::zeros(n, b);
        let mut dense = CMat::zeros(n);
        for i in 0..n {
            for j in i.saturating_sub(b)..=i {
                let v = if i == j { C64::new(next(), 0.0) } else { C64::new(next(), next()) };
                band.set(i, j, v);
                dense[(i, j)] = v;
                dense[(j, i)] = v.conj();
            }
        }
        (band, dense)
    }

    #[test]
    fn matches_dense_eigenvalues() {
        for (n, b, seed) in [(1, 3, 1), (2, 1, 2), (7, 3, 3), (40, 3, 4), (41, 5, 5), (25, 1, 6), (9, 8, 7)] {
            let (band, dense) = random_band(n, b, seed);
            let (d, e) = band.reduce_to_tridiagonal();
            let vals = tridiagonal_eigenvalues(&d, &e, -1e3, 1e3);
            let (reference, _) = hermitian_eigen(&dense);
            assert_eq!(vals.len(), n);
            for (x, y) in vals.iter().zip(&reference) {
                assert!((x - y).abs() < 1e-12, "n={n} b={b}: {x} vs {y}");
            }
        }
    }
}
