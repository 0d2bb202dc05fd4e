//! Closed-form prices and boundary deltas. These are the ground truth the
//! finite-difference solver and the Monte Carlo engine are checked against.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{param, Result};

/// Standard normal distribution function, from the complementary error
/// function so that the lower tail keeps full relative precision.
#[inline]
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

#[inline]
pub fn norm_pdf(z: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

fn d_plus(x: f64, t: f64, sigma: f64, strike: f64) -> f64 {
    let sd = sigma * t.sqrt();
    ((x / strike).ln() + 0.5 * sd * sd) / sd
}

/// Driftless Black-Scholes call, `x Phi(d1) - K Phi(d2)`. At `t <= 0` the payoff.
pub fn bs_call_price(x: f64, t: f64, sigma: f64, strike: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if t <= 0.0 {
        return (x - strike).max(0.0);
    }
    let d1 = d_plus(x, t, sigma, strike);
    let d2 = d1 - sigma * t.sqrt();
    x * norm_cdf(d1) - strike * norm_cdf(d2)
}

/// `Phi(d1)`; zero at `x = 0`.
pub fn bs_call_delta(x: f64, t: f64, sigma: f64, strike: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if t <= 0.0 {
        return if x > strike { 1.0 } else { 0.0 };
    }
    norm_cdf(d_plus(x, t, sigma, strike))
}

/// Boundary delta `u_x(0, t) = exp(-2K / (sigma^2 t))` of a call in the
/// square-root CEV model (`beta = 1`).
pub fn cev_beta1_boundary_delta(t: f64, sigma: f64, strike: f64) -> Result<f64> {
    if !(t > 0.0) {
        return param(format!("time must be positive, got {t}"));
    }
    if !(sigma > 0.0 && strike > 0.0) {
        return param("sigma and strike must be positive");
    }
    Ok((-2.0 * strike / (sigma * sigma * t)).exp())
}

/// Value of a power claim `x^gamma` when `a(x, t) = x^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerValue {
    pub value: f64,
    pub boundary_delta_exists: bool,
}

pub fn power_option_price(x: f64, t: f64, gamma: f64) -> PowerValue {
    let value = if x <= 0.0 { 0.0 } else { x.powf(gamma) * ((gamma * gamma - gamma) * t).exp() };
    PowerValue { value, boundary_delta_exists: gamma >= 1.0 }
}

/// A boundary derivative that may fail to exist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryDelta {
    Finite(f64),
    Divergent,
}

/// `u_x(0, t)` for the power claim: 0 for `gamma > 1`, 1 for `gamma = 1`,
/// divergent below.
pub fn power_option_boundary_delta(gamma: f64) -> BoundaryDelta {
    if gamma > 1.0 {
        BoundaryDelta::Finite(0.0)
    } else if gamma == 1.0 {
        BoundaryDelta::Finite(1.0)
    } else {
        BoundaryDelta::Divergent
    }
}

fn margrabe_d(x1: f64, x2: f64, t: f64, sigma1: f64, sigma2: f64) -> (f64, f64) {
    let sd = ((sigma1 * sigma1 + sigma2 * sigma2) * t).sqrt();
    let d1 = ((x2 / x1).ln() + 0.5 * sd * sd) / sd;
    (d1, d1 - sd)
}

/// Exchange option `(x2 - x1)^+` on two independent driftless GBMs.
pub fn margrabe_price(x1: f64, x2: f64, t: f64, sigma1: f64, sigma2: f64) -> f64 {
    if x2 <= 0.0 {
        return 0.0;
    }
    if x1 <= 0.0 {
        return x2;
    }
    if t <= 0.0 {
        return (x2 - x1).max(0.0);
    }
    let (d1, d2) = margrabe_d(x1, x2, t, sigma1, sigma2);
    x2 * norm_cdf(d1) - x1 * norm_cdf(d2)
}

/// `(du/dx1, du/dx2)` of the exchange option; `(-1, 1)` on the face
/// `x1 = 0` and `(0, 0)` on `x2 = 0`.
pub fn margrabe_deltas(x1: f64, x2: f64, t: f64, sigma1: f64, sigma2: f64) -> (f64, f64) {
    if x2 <= 0.0 {
        return (0.0, 0.0);
    }
    if x1 <= 0.0 {
        return (-1.0, 1.0);
    }
    let (d1, d2) = margrabe_d(x1, x2, t, sigma1, sigma2);
    (-norm_cdf(d2), norm_cdf(d1))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Composite Gauss-Legendre integral of the Gaussian density: the
    // defining integral, independent of erfc.
    fn phi_by_quadrature(z: f64) -> f64 {
        let (nodes, weights) = crate::boundary::gauss_legendre(20);
        // Mass below -40 is < 1e-300.
        let (a, cells) = (-40.0, 400);
        let w = (z - a) / cells as f64;
        let mut sum = 0.0;
        for c in 0..cells {
            let mid = a + (c as f64 + 0.5) * w;
            sum += nodes.iter().zip(&weights).map(|(x, wt)| wt * norm_pdf(mid + 0.5 * w * x)).sum::<f64>();
        }
        0.5 * w * sum
    }

    #[test]
    fn norm_cdf_matches_quadrature() {
        for i in 0..=160 {
            let z = -8.0 + 0.1 * i as f64;
            let q = phi_by_quadrature(z);
            assert!((norm_cdf(z) - q).abs() <= 1e-14, "z={z}: {} vs {q}", norm_cdf(z));
        }
    }

    #[test]
    fn norm_cdf_reference_values() {
        assert_eq!(norm_cdf(0.0), 0.5);
        assert!(norm_cdf(-8.0) < 1e-15);
        assert!((norm_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((norm_cdf(-3.7) - 1.077_997_334_773_883_4e-4).abs() < 1e-18);
        assert!((norm_cdf(-12.0) / 1.776_482_112_077_679e-33 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norm_cdf_symmetry_and_monotonicity() {
        let mut prev = 0.0;
        for i in 0..4000 {
            let z = -20.0 + 0.01 * i as f64;
            let p = norm_cdf(z);
            assert!((norm_cdf(-z) - (1.0 - p)).abs() <= 1e-15);
            assert!(p >= prev);
            prev = p;
        }
    }

    #[test]
    fn bs_call_reference() {
        assert_eq!(bs_call_price(0.0, 1.0, 0.2, 1.0), 0.0);
        let v = bs_call_price(1.0, 1.0, 0.2, 1.0);
        assert!((v - 0.079_655_674_554_057_96).abs() < 1e-14, "{v}");
        assert!((v - (2.0 * norm_cdf(0.1) - 1.0)).abs() < 1e-15);
        assert!((bs_call_price(10.0, 1.0, 0.2, 1.0) - 9.0).abs() < 1e-6);
        assert_eq!(bs_call_price(1.5, 0.0, 0.2, 1.0), 0.5);
    }

    #[test]
    fn bs_call_small_time_limit() {
        for &x in &[0.5, 0.9, 1.1, 2.0] {
            let v = bs_call_price(x, 1e-10, 0.2, 1.0);
            assert!((v - (x - 1.0f64).max(0.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn bs_delta_values() {
        assert_eq!(bs_call_delta(0.0, 1.0, 0.2, 1.0), 0.0);
        let t: f64 = 2.0;
        assert!((bs_call_delta(1.0, t, 0.3, 1.0) - norm_cdf(0.3 * t.sqrt() / 2.0)).abs() < 1e-15);
        assert!((bs_call_delta(1e6, 1.0, 0.2, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bs_call_convex_and_increasing_in_time() {
        let h = 0.02;
        let xs: Vec<f64> = (1..=200).map(|k| k as f64 * h).collect();
        for w in xs.windows(3) {
            let d2 = bs_call_price(w[0], 1.0, 0.3, 1.0) - 2.0 * bs_call_price(w[1], 1.0, 0.3, 1.0)
                + bs_call_price(w[2], 1.0, 0.3, 1.0);
            assert!(d2 >= -1e-10);
        }
        for &x in &xs {
            let mut prev = 0.0;
            for k in 1..20 {
                let v = bs_call_price(x, 0.1 * k as f64, 0.3, 1.0);
                assert!(v >= prev - 1e-15);
                prev = v;
            }
        }
    }

    #[test]
    fn cev_boundary_delta_values() {
        let v = cev_beta1_boundary_delta(1.0, 2.0, 1.0).unwrap();
        assert!((v - 0.606_530_659_712_633_4).abs() < 1e-15);
        assert!(cev_beta1_boundary_delta(1e-6, 2.0, 1.0).unwrap() < 1e-100);
        assert!(cev_beta1_boundary_delta(1e12, 2.0, 1.0).unwrap() > 1.0 - 1e-11);
        assert!(cev_beta1_boundary_delta(0.0, 2.0, 1.0).is_err());
        assert!(cev_beta1_boundary_delta(-1.0, 2.0, 1.0).is_err());
        let mut prev = 0.0;
        for k in 1..100 {
            let d = cev_beta1_boundary_delta(0.05 * k as f64, 2.0, 1.0).unwrap();
            assert!(d > prev && d < 1.0);
            prev = d;
        }
    }

    #[test]
    fn power_option_values() {
        for &t in &[0.0, 0.3, 2.0] {
            assert_eq!(power_option_price(1.7, t, 1.0).value, 1.7);
        }
        assert!((power_option_price(1.0, 0.5, 2.0).value - std::f64::consts::E).abs() < 1e-15);
        assert!(!power_option_price(1.0, 0.5, 0.5).boundary_delta_exists);
        assert!(power_option_price(1.0, 0.5, 1.0).boundary_delta_exists);
        assert_eq!(power_option_boundary_delta(0.5), BoundaryDelta::Divergent);
        assert_eq!(power_option_boundary_delta(2.0), BoundaryDelta::Finite(0.0));
        assert_eq!(power_option_boundary_delta(1.0), BoundaryDelta::Finite(1.0));
    }

    #[test]
    fn power_option_solves_its_equation() {
        // Exact derivatives of the closed form.
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let (x, t, g) = (0.05 + 3.0 * next(), 2.0 * next(), 0.2 + 3.0 * next());
            let u = power_option_price(x, t, g).value;
            let u_t = (g * g - g) * u;
            let u_xx = g * (g - 1.0) * u / (x * x);
            assert!((u_t - x * x * u_xx).abs() <= 1e-9 * u.max(1.0));
        }
    }

    #[test]
    fn margrabe_values() {
        assert_eq!(margrabe_price(0.0, 3.0, 1.0, 0.2, 0.2), 3.0);
        assert_eq!(margrabe_price(2.0, 0.0, 1.0, 0.2, 0.2), 0.0);
        let v = margrabe_price(1.0, 1.0, 1.0, 0.2, 0.2);
        assert!((v - 0.112_462_916_018_284_9).abs() < 1e-14, "{v}");
        assert_eq!(margrabe_deltas(0.0, 1.0, 1.0, 0.2, 0.2).0, -1.0);
        assert_eq!(margrabe_deltas(1.0, 0.0, 1.0, 0.2, 0.2).1, 0.0);
    }

    #[test]
    fn margrabe_deltas_match_finite_differences() {
        let h = 1e-6;
        for &(a, b) in &[(1.0, 1.0), (0.5, 1.3), (2.0, 1.1)] {
            let (d1, d2) = margrabe_deltas(a, b, 0.7, 0.3, 0.25);
            let f1 = (margrabe_price(a + h, b, 0.7, 0.3, 0.25) - margrabe_price(a - h, b, 0.7, 0.3, 0.25)) / (2.0 * h);
            let f2 = (margrabe_price(a, b + h, 0.7, 0.3, 0.25) - margrabe_price(a, b - h, 0.7, 0.3, 0.25)) / (2.0 * h);
            assert!((d1 - f1).abs() < 1e-7 && (d2 - f2).abs() < 1e-7);
        }
    }
}
