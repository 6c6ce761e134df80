//! Normal-distribution and error-function helpers.
//!
//! `erf`/`erfc` come from `libm` (a port of the FreeBSD msun routines, below
//! one ulp). Everything else is built on top of them.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF, accurate in both tails.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// `ln Φ(x)`, finite for all finite `x`.
pub fn ln_norm_cdf(x: f64) -> f64 {
    if x > -35.0 {
        norm_cdf(x).ln()
    } else {
        // Asymptotic Mills-ratio expansion; erfc underflows further out.
        let x2 = x * x;
        let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
        -0.5 * x2 - (-x).ln() - 0.5 * (2.0 * PI).ln() + series.ln()
    }
}

/// Inverse standard normal CDF.
///
/// Acklam's rational approximation followed by one Halley step against
/// [`norm_cdf`], which brings the result to near machine precision.
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00, 3.754408661907416e+00];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Halley refinement. Work with the smaller tail to avoid cancellation.
    let e = if x < 0.0 { norm_cdf(x) - p } else { (1.0 - p) - norm_cdf(-x) };
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 35.0 {
        x + (-x).exp()
    } else if x < -35.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic function `1 / (1 + e^{-x})`, evaluated without overflow.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(p / (1 - p))`.
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cdf_reference_values() {
        assert_eq!(norm_cdf(0.0), 0.5);
        // Phi(1.959963984540054) = 0.975
        assert_relative_eq!(norm_cdf(1.959963984540054), 0.975, max_relative = 1e-14);
        // Phi(-5) = 2.866515718791939e-7
        assert_relative_eq!(norm_cdf(-5.0), 2.866515718791939e-7, max_relative = 1e-13);
        assert_relative_eq!(norm_cdf(-20.0), 2.7536241186062337e-89, max_relative = 1e-12);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-12, 1e-6, 0.01, 0.02425, 0.3, 0.5, 0.8, 0.975, 0.999999] {
            let x = norm_quantile(p);
            assert_relative_eq!(norm_cdf(x), p, max_relative = 1e-12);
        }
        assert_relative_eq!(norm_quantile(0.975), 1.959963984540054, epsilon = 1e-13);
        assert_relative_eq!(norm_quantile(0.95), 1.6448536269514722, epsilon = 1e-13);
    }

    #[test]
    fn ln_cdf_is_continuous_at_switch() {
        let below = ln_norm_cdf(-35.0 - 1e-9);
        let above = ln_norm_cdf(-35.0 + 1e-9);
        assert_relative_eq!(below, above, max_relative = 1e-9);
        assert!(ln_norm_cdf(-100.0).is_finite());
    }

    #[test]
    fn logistic_tails() {
        assert_eq!(logistic(0.0), 0.5);
        assert!(logistic(-800.0) >= 0.0);
        assert_eq!(logistic(800.0), 1.0);
        assert_relative_eq!(softplus(-40.0), (-40.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(logit(0.9), 9f64.ln(), max_relative = 1e-15);
    }
}
