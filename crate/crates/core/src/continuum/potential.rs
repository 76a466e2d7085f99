use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::beta;
use crate::functional::quadrature::gauss_legendre;

/// Potentials on the line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Potential {
    /// `-s (s + 1) sech^2 x`.
    PoschlTeller { s: f64 },
    /// `-depth` on `|x| < width / 2`, `-depth / 2` at the two edges.
    SquareWell { depth: f64, width: f64 },
    /// `-depth exp(-x^2 / (2 sigma^2))`.
    Gaussian { depth: f64, sigma: f64 },
    /// Samples on a uniform grid over `[-half_width, half_width]`,
    /// interpolated by cubic Hermite (Catmull-Rom) segments, zero outside.
    Tabulated { half_width: f64, samples: Vec<f64> },
}

impl Potential {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::DomainError(format!("potential: {what}")));
        match self {
            Potential::PoschlTeller { s } if !(*s > 0.0 && s.is_finite()) => bad("s must be positive"),
            Potential::SquareWell { depth, width }
                if !(*width > 0.0 && width.is_finite() && depth.is_finite()) =>
            {
                bad("width must be positive and depth finite")
            }
            Potential::Gaussian { depth, sigma } if !(*sigma > 0.0 && sigma.is_finite() && depth.is_finite()) => {
                bad("sigma must be positive and depth finite")
            }
            Potential::Tabulated { half_width, samples }
                if !(*half_width > 0.0) || samples.len() < 2 || samples.iter().any(|v| !v.is_finite()) =>
            {
                bad("tabulated potential needs a positive half-width and at least two finite samples")
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Potential::PoschlTeller { s } => {
                let sech = 1.0 / x.cosh();
                -s * (s + 1.0) * sech * sech
            }
            Potential::SquareWell { depth, width } => {
                let edge = 0.5 * width;
                match x.abs().partial_cmp(&edge) {
                    Some(std::cmp::Ordering::Less) => -depth,
                    Some(std::cmp::Ordering::Equal) => -0.5 * depth,
                    _ => 0.0,
                }
            }
            Potential::Gaussian { depth, sigma } => -depth * (-0.5 * (x / sigma).powi(2)).exp(),
            Potential::Tabulated { half_width, samples } => tabulated_value(*half_width, samples, x),
        }
    }

    /// Half-width beyond which `|V| < 1e-12`.
    pub fn default_domain(&self) -> f64 {
        match self {
            Potential::PoschlTeller { s } => 0.5 * (4.0 * s * (s + 1.0) * 1e12).ln(),
            Potential::SquareWell { width, .. } => 0.5 * width,
            Potential::Gaussian { depth, sigma } => sigma * (2.0 * (depth.abs() * 1e12).max(1.0).ln()).sqrt(),
            Potential::Tabulated { half_width, .. } => *half_width,
        }
    }

    /// `int V_-^p dx`, in closed form for the named families.
    pub fn negative_part_integral(&self, p: f64) -> f64 {
        match self {
            Potential::PoschlTeller { s } => (s * (s + 1.0)).powf(p) * beta(p, 0.5),
            Potential::SquareWell { depth, width } => depth.max(0.0).powf(p) * width,
            Potential::Gaussian { depth, sigma } => {
                depth.max(0.0).powf(p) * sigma * (2.0 * std::f64::consts::PI / p).sqrt()
            }
            Potential::Tabulated { half_width, samples } => {
                let segments = samples.len() - 1;
                let h = 2.0 * half_width / segments as f64;
                let rule = gauss_legendre(16);
                (0..segments)
                    .map(|i| {
                        let x0 = -half_width + i as f64 * h;
                        rule.nodes
                            .iter()
                            .zip(&rule.weights)
                            .map(|(t, w)| {
                                let v = self.value(x0 + 0.5 * h * (1.0 + t));
                                w * (-v).max(0.0).powf(p)
                            })
                            .sum::<f64>()
                            * 0.5
                            * h
                    })
                    .sum()
            }
        }
    }

    /// Continuum eigenvalues when known in closed form.
    pub fn exact_eigenvalues(&self) -> Option<Vec<f64>> {
        match self {
            Potential::PoschlTeller { s } => {
                let mut out = Vec::new();
                let mut j = 0.0;
                while s - j > 0.0 {
                    out.push(-(s - j) * (s - j));
                    j += 1.0;
                }
                Some(out)
            }
            _ => None,
        }
    }
}

fn tabulated_value(half_width: f64, samples: &[f64], x: f64) -> f64 {
    if x.abs() > half_width {
        return 0.0;
    }
    let segments = samples.len() - 1;
    let h = 2.0 * half_width / segments as f64;
    let u = (x + half_width) / h;
    let i = (u.floor() as usize).min(segments - 1);
    let t = u - i as f64;
    let at = |j: isize| -> f64 {
        if j < 0 || j as usize > segments {
            0.0
        } else {
            samples[j as usize]
        }
    };
    let i = i as isize;
    let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
    let m1 = 0.5 * (p2 - p0);
    let m2 = 0.5 * (p3 - p1);
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * p1 + (t3 - 2.0 * t2 + t) * m1 + (-2.0 * t3 + 3.0 * t2) * p2 + (t3 - t2) * m2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_integrals() {
        let pt = Potential::PoschlTeller { s: 1.0 };
        assert!((pt.negative_part_integral(2.0) - 16.0 / 3.0).abs() < 1e-12);
        assert!((pt.negative_part_integral(1.0) - 4.0).abs() < 1e-12);
        assert_eq!(pt.exact_eigenvalues().unwrap(), vec![-1.0]);
        let sq = Potential::SquareWell { depth: 32.0, width: 1.0 / 16.0 };
        assert_eq!(sq.negative_part_integral(1.0), 2.0);
        assert_eq!(sq.value(1.0 / 32.0), -16.0);
    }

    #[test]
    fn tabulated_matches_sampled_family() {
        let g = Potential::Gaussian { depth: 2.0, sigma: 0.7 };
        let x_max = g.default_domain();
        let n = 801;
        let samples = (0..n).map(|i| g.value(-x_max + 2.0 * x_max * i as f64 / (n - 1) as f64)).collect();
        let t = Potential::Tabulated {
            half_width: x_max,
            samples,
        };
        for x in [-1.3, -0.2, 0.0, 0.45, 2.0] {
            assert!((t.value(x) - g.value(x)).abs() < 1e-6, "{x}");
        }
        for p in [1.0, 1.5, 2.0] {
            let rel = t.negative_part_integral(p) / g.negative_part_integral(p) - 1.0;
            assert!(rel.abs() < 1e-6, "{p}: {rel}");
        }
    }
}
