//! Lieb-Thirring functionals: `G_gamma`, the `k`-side functional, the
//! semiclassical constants and the right-hand sides of the inequalities.

pub mod quadrature;
mod rhs;
pub mod special;

pub use rhs::{rhs_block, rhs_block_power, rhs_scalar, RhsBreakdown, RhsKind};
pub use special::{beta, gamma};

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Default relative accuracy for `G_gamma` quadrature.
pub const DEFAULT_QUAD_TOL: f64 = 1e-12;

/// Below this value of `log|k|` the closed forms switch to their series.
const SERIES_SWITCH: f64 = 0.5;
/// The `gamma = 7/2` form cancels more severely and switches later.
const SERIES_SWITCH_72: f64 = 1.0;

/// `G_gamma(lambda) = int_2^lambda sqrt(E^2 - 4) (lambda - E)^(gamma - 3/2) dE`
/// for `lambda >= 2`, `gamma > 1/2`.
pub fn g_gamma(gamma: f64, lambda: f64, tol: f64) -> Result<f64> {
    if !(gamma > 0.5) || !gamma.is_finite() {
        return Err(Error::DomainError(format!("G_gamma needs gamma > 1/2, got {gamma}")));
    }
    if !(lambda >= 2.0) || !lambda.is_finite() {
        return Err(Error::DomainError(format!("G_gamma needs lambda >= 2, got {lambda}")));
    }
    let h = lambda - 2.0;
    if h == 0.0 {
        return Ok(0.0);
    }
    let integral = quadrature::integrate_jacobi_weighted(gamma - 1.5, |t| t.mul_add(h, 4.0).sqrt(), tol);
    Ok(h.powf(gamma) * integral)
}

fn series(s: f64, first_power: i32, coeffs: &[f64]) -> f64 {
    let s2 = s * s;
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * s2 + c;
    }
    acc * s.powi(first_power)
}

const SERIES_32: [f64; 12] = [
    4.0 / 3.0,
    4.0 / 15.0,
    8.0 / 315.0,
    4.0 / 2835.0,
    8.0 / 155925.0,
    8.0 / 6081075.0,
    16.0 / 638512875.0,
    4.0 / 10854718875.0,
    8.0 / 1856156927625.0,
    8.0 / 194896477400625.0,
    16.0 / 49308808782358125.0,
    8.0 / 3698160658676859375.0,
];

const SERIES_52: [f64; 11] = [
    8.0 / 15.0,
    44.0 / 315.0,
    17.0 / 945.0,
    461.0 / 311850.0,
    8303.0 / 97297200.0,
    24911.0 / 6810804000.0,
    168151.0 / 1389404016000.0,
    1513361.0 / 475176173472000.0,
    7913.0 / 115947127296000.0,
    98065811.0 / 80787552309015552000.0,
    2206480753.0 / 121181328463523328000000.0,
];

const SERIES_72: [f64; 20] = [
    32.0 / 105.0,
    32.0 / 315.0,
    32.0 / 1925.0,
    512.0 / 289575.0,
    9664.0 / 70945875.0,
    3232.0 / 402026625.0,
    232928.0 / 618718975875.0,
    103552.0 / 7218388051875.0,
    55232.0 / 121750145141625.0,
    2982592.0 / 246544043911790625.0,
    39768128.0 / 144228265688397515625.0,
    5891584.0 / 1084382886472025765625.0,
    3817748096.0 / 40843281418968850462265625.0,
    636291424.0 / 449276095608657355084921875.0,
    1696777184.0 / 89106425629050375425176171875.0,
    61083979136.0 / 267051957610263975149252987109375.0,
    54296870464.0 / 21987277843245067287288495938671875.0,
    3290719424.0 / 136587635086825417996792171740234375.0,
    1563749870528.0 / 7326314888314159135595537866237039453125.0,
    32591872.0 / 18896127375171341931334527815314453125.0,
];

/// `log |k|` computed from `|k| - 1` to keep precision near the band edge.
fn log_abs_k(k: f64) -> Result<f64> {
    let m = k.abs();
    if !(m > 1.0) || !m.is_finite() {
        return Err(Error::DomainError(format!("|k| must exceed 1, got {k}")));
    }
    Ok((m - 1.0).ln_1p())
}

/// Closed form of `G_gamma(|k| + 1/|k|)` for `gamma` in `{3/2, 5/2, 7/2}`.
pub fn g_gamma_closed(gamma: f64, k: f64) -> Result<f64> {
    let s = log_abs_k(k)?;
    let small = s < SERIES_SWITCH;
    if gamma == 1.5 {
        Ok(if small {
            series(s, 3, &SERIES_32)
        } else {
            (2.0 * s).sinh() - 2.0 * s
        })
    } else if gamma == 2.5 {
        Ok(if small {
            series(s, 5, &SERIES_52)
        } else {
            3.0 * s.sinh() + (3.0 * s).sinh() / 3.0 - 4.0 * s * s.cosh()
        })
    } else if gamma == 3.5 {
        Ok(if s < SERIES_SWITCH_72 {
            series(s, 7, &SERIES_72)
        } else {
            (4.0 * s).sinh() / 6.0 + 14.0 / 3.0 * (2.0 * s).sinh() - 4.0 * s * (2.0 * s).cosh() - 6.0 * s
        })
    } else {
        Err(Error::UnsupportedGamma(gamma))
    }
}

/// Closed forms of `G_gamma(lambda)` written in `lambda` (for `gamma` in
/// `{3/2, 5/2}`); an independent evaluation path for cross-checks.
pub fn g_gamma_lambda_form(gamma: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 2.0) {
        return Err(Error::DomainError(format!("lambda must exceed 2, got {lambda}")));
    }
    let root = ((lambda - 2.0) * (lambda + 2.0)).sqrt();
    let log_term = (lambda + root).ln();
    let ln2 = 2f64.ln();
    if gamma == 1.5 {
        Ok(2.0 * ln2 + 0.5 * lambda * root - 2.0 * log_term)
    } else if gamma == 2.5 {
        Ok(2.0 * lambda * ln2 + 0.5 * lambda * lambda * root - 2.0 * lambda * log_term - root.powi(3) / 3.0)
    } else {
        Err(Error::UnsupportedGamma(gamma))
    }
}

const SERIES_K: [f64; 12] = [
    8.0 / 3.0,
    8.0 / 15.0,
    16.0 / 315.0,
    8.0 / 2835.0,
    16.0 / 155925.0,
    16.0 / 6081075.0,
    32.0 / 638512875.0,
    8.0 / 10854718875.0,
    16.0 / 1856156927625.0,
    16.0 / 194896477400625.0,
    32.0 / 49308808782358125.0,
    16.0 / 3698160658676859375.0,
];

/// `k^2 - 1/k^2 - 4 log|k|`; zero at `|k| = 1`.
pub fn k_functional(k: f64) -> f64 {
    let m = k.abs();
    if m <= 1.0 {
        return 0.0;
    }
    let s = (m - 1.0).ln_1p();
    if s < SERIES_SWITCH {
        series(s, 3, &SERIES_K)
    } else {
        2.0 * (2.0 * s).sinh() - 4.0 * s
    }
}

/// `L^cl_{gamma,1} = Gamma(gamma + 1) / (sqrt(4 pi) Gamma(gamma + 3/2))`.
pub fn l_classical(gamma: f64) -> f64 {
    special::gamma(gamma + 1.0) / ((4.0 * PI).sqrt() * special::gamma(gamma + 1.5))
}

/// `c_gamma = 3^(gamma - 1/2) (1/2) Gamma(gamma+1) Gamma(2) / (Gamma(gamma+3/2) Gamma(3/2))`.
pub fn c_gamma(gamma: f64) -> f64 {
    3f64.powf(gamma - 0.5) * 0.5 * special::gamma(gamma + 1.0) * special::gamma(2.0)
        / (special::gamma(gamma + 1.5) * special::gamma(1.5))
}

/// `d_gamma = 3^(1/2 - gamma) c_gamma`.
pub fn d_gamma(gamma: f64) -> f64 {
    3f64.powf(0.5 - gamma) * c_gamma(gamma)
}

/// `(R1, R2)`: `G_1(lambda)/B(1/2, 2)` divided by `(lambda - 2)/d_1` and by
/// `(lambda - 2)^(3/2)`.
pub fn comparison_ratios(lambda: f64, tol: f64) -> Result<(f64, f64)> {
    if !(lambda > 2.0) {
        return Err(Error::DomainError(format!("lambda must exceed 2, got {lambda}")));
    }
    let scaled = g_gamma(1.0, lambda, tol)? / beta(0.5, 2.0);
    let h = lambda - 2.0;
    Ok((scaled / (h / d_gamma(1.0)), scaled / h.powf(1.5)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((d_gamma(1.0) - 4.0 / (3.0 * PI)).abs() < 1e-15);
        assert!((2.0 * l_classical(1.5) - 0.375).abs() < 1e-15);
        for g in [0.6, 1.0, 1.5, 2.3, 4.0] {
            assert!((d_gamma(g) / (2.0 * l_classical(g)) - 1.0).abs() < 1e-13);
            let via_beta = 0.5 * beta(g - 0.5, 2.0) / beta(g - 0.5, 1.5);
            assert!((d_gamma(g) / via_beta - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn reference_values() {
        let e = std::f64::consts::E;
        let g = g_gamma(1.5, 2.0 * 1f64.cosh(), 1e-13).unwrap();
        assert!((g - 1.626_860_407_847_018_8).abs() < 1e-12);
        assert!((g_gamma_closed(1.5, e).unwrap() - 1.626_860_407_847_018_8).abs() < 1e-14);
        assert!((k_functional(e) - 3.253_720_815_694_037_5).abs() < 1e-14);
        assert_eq!(k_functional(1.0), 0.0);
        assert_eq!(g_gamma(1.0, 2.0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn closed_forms_agree() {
        for lambda in [2.0 + 1e-7, 2.001, 2.3, 2.5, 3.7, 11.0, 50.0] {
            let p = crate::eigen::SpectralPoint::from_lambda(-lambda, 1).unwrap();
            for gamma in [1.5, 2.5, 3.5] {
                let q = g_gamma(gamma, lambda, 1e-13).unwrap();
                let c = g_gamma_closed(gamma, p.k).unwrap();
                assert!((q / c - 1.0).abs() < 1e-10, "gamma {gamma} lambda {lambda}: {q} vs {c}");
            }
            for gamma in [1.5, 2.5] {
                if lambda > 2.01 {
                    let l = g_gamma_lambda_form(gamma, lambda).unwrap();
                    let c = g_gamma_closed(gamma, p.k).unwrap();
                    assert!((l / c - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn series_and_direct_forms_meet() {
        let s = SERIES_SWITCH;
        let k = s.exp() * (1.0 + 4.0 * f64::EPSILON);
        let direct = [
            (2.0 * s).sinh() - 2.0 * s,
            3.0 * s.sinh() + (3.0 * s).sinh() / 3.0 - 4.0 * s * s.cosh(),
        ];
        let series_vals = [series(s, 3, &SERIES_32), series(s, 5, &SERIES_52)];
        for (d, v) in direct.iter().zip(series_vals) {
            assert!((d / v - 1.0).abs() < 1e-14);
        }
        let s = SERIES_SWITCH_72;
        let d = (4.0 * s).sinh() / 6.0 + 14.0 / 3.0 * (2.0 * s).sinh() - 4.0 * s * (2.0 * s).cosh() - 6.0 * s;
        assert!((d / series(s, 7, &SERIES_72) - 1.0).abs() < 1e-14);
        let s = SERIES_SWITCH;
        assert!((2.0 * (2.0 * s).sinh() - 4.0 * s - k_functional(k)).abs() < 1e-14);
    }

    #[test]
    fn k_functional_near_band() {
        // 2 sinh(2s) - 4s at s = log(1 + 1e-6), evaluated with 40 significant digits.
        let k = 1.0 + 1e-6;
        let reference = 2.666_662_666_013_734_9e-18;
        assert!((k_functional(k) / reference - 1.0).abs() < 1e-10);
        let delta = k - 1.0;
        assert!((k_functional(k) / (8.0 / 3.0 * delta.powi(3)) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(g_gamma(0.5, 3.0, 1e-10).is_err());
        assert!(g_gamma(1.0, 1.9, 1e-10).is_err());
        assert_eq!(g_gamma_closed(2.0, 3.0), Err(Error::UnsupportedGamma(2.0)));
    }
}
