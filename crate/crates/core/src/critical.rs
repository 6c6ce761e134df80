//! Simultaneous coverage probabilities as functions of the critical value
//! `w` and cone angle `φ`, and their inversion.
//!
//! With `z ~ N₂(0, I)` and `ψ` measured from the bisector of the cone:
//!
//! * two-sided: `(φ/π)·χ²₂(w²) + (2/π)∫₀^{(π−φ)/2} χ²₂(w²/cos²ψ) dψ`
//! * one-sided: `(φ/2π)·χ²₂(w²) + (π−φ)/2π + ½·χ²₁(w²)`

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Quadrature};
use crate::roots::brent;
use crate::special::{erf, norm_quantile};

/// Absolute tolerance requested from the quadrature.
const QUAD_TOL: f64 = 1e-13;
/// Reported quadrature error must stay below this.
pub const MAX_QUAD_ERROR: f64 = 1e-12;
/// `|coverage(w) − level|` at the returned root.
pub const COVERAGE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    TwoSided,
    OneSided,
}

/// Which arrangement of the coverage probability to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Integrate the supremum of the projection over the cone.
    Supremum,
    /// Decompose the acceptance region into pieces of known probability.
    Region,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageQuery {
    pub phi: f64,
    /// Target simultaneous coverage `1 − α`.
    pub level: f64,
    pub side: Side,
    pub method: Method,
}

impl CoverageQuery {
    /// Uses the default arrangement for the side: the supremum integral for
    /// two-sided bands, the closed-form region decomposition for one-sided.
    pub fn new(phi: f64, level: f64, side: Side) -> Self {
        let method = match side {
            Side::TwoSided => Method::Supremum,
            Side::OneSided => Method::Region,
        };
        Self { phi, level, side, method }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValue {
    pub w: f64,
    pub phi: f64,
    pub level: f64,
    pub side: Side,
    pub achieved_coverage: f64,
    pub method: Method,
    pub quadrature_error_bound: f64,
    pub iterations: usize,
    /// `φ` was above π and was clamped to π.
    pub phi_clamped: bool,
}

/// CDF of a χ² variable with one or two degrees of freedom.
pub fn chi2_cdf(df: u32, x: f64) -> Result<f64> {
    match df {
        1 => Ok(chi2_1_cdf(x)),
        2 => Ok(chi2_2_cdf(x)),
        _ => Err(Error::InvalidInput(format!("chi-squared df must be 1 or 2, got {df}"))),
    }
}

pub fn chi2_1_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        erf((0.5 * x).sqrt())
    }
}

pub fn chi2_2_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-0.5 * x).exp_m1()
    }
}

/// Scheffé (whole-line) two-sided critical value `√(χ²₂ quantile)`.
pub fn scheffe_critical(level: f64) -> f64 {
    (-2.0 * (1.0 - level).ln()).sqrt()
}

fn clamp_phi(phi: f64) -> (f64, bool) {
    if phi > PI {
        (PI, true)
    } else {
        (phi.max(0.0), false)
    }
}

/// `χ²₂(w²/cos²ψ)`, with `cos ψ = 0` mapping to 1.
fn strip_cdf(w2: f64, psi: f64) -> f64 {
    let c = psi.cos();
    if c <= 0.0 {
        1.0
    } else {
        chi2_2_cdf(w2 / (c * c))
    }
}

/// Two-sided coverage with the supremum arrangement.
pub fn coverage_two_sided(w: f64, phi: f64) -> f64 {
    coverage_two_sided_with(w, phi, Method::Supremum).value
}

pub fn coverage_two_sided_with(w: f64, phi: f64, method: Method) -> Quadrature {
    let (phi, _) = clamp_phi(phi);
    let w2 = w * w;
    let upper = 0.5 * (PI - phi);
    match method {
        Method::Supremum => {
            let q = integrate(|psi| strip_cdf(w2, psi), 0.0, upper, QUAD_TOL);
            Quadrature {
                value: (phi / PI * chi2_2_cdf(w2) + 2.0 / PI * q.value).clamp(0.0, 1.0),
                abs_error: 2.0 / PI * q.abs_error,
                evaluations: q.evaluations,
            }
        }
        Method::Region => {
            // Disc of radius w plus four wedges between the disc and the
            // supporting lines.
            let inner = (-0.5 * w2).exp();
            let q = integrate(
                |psi| {
                    let c = psi.cos();
                    let outer = if c <= 0.0 { 0.0 } else { (-0.5 * w2 / (c * c)).exp() };
                    inner - outer
                },
                0.0,
                upper,
                QUAD_TOL,
            );
            Quadrature {
                value: (chi2_2_cdf(w2) + 2.0 / PI * q.value).clamp(0.0, 1.0),
                abs_error: 2.0 / PI * q.abs_error,
                evaluations: q.evaluations,
            }
        }
    }
}

/// One-sided coverage in closed form (no quadrature).
pub fn coverage_one_sided_closed(w: f64, phi: f64) -> f64 {
    let (phi, _) = clamp_phi(phi);
    let w2 = w * w;
    (phi / (2.0 * PI) * chi2_2_cdf(w2) + (PI - phi) / (2.0 * PI) + 0.5 * chi2_1_cdf(w2)).clamp(0.0, 1.0)
}

/// One-sided coverage via the supremum integral.
pub fn coverage_one_sided_quadrature(w: f64, phi: f64) -> Quadrature {
    let (phi, _) = clamp_phi(phi);
    let w2 = w * w;
    let q = integrate(|theta| strip_cdf(w2, theta), 0.0, FRAC_PI_2, QUAD_TOL);
    Quadrature {
        value: (phi / (2.0 * PI) * chi2_2_cdf(w2) + (PI - phi) / (2.0 * PI) + q.value / PI).clamp(0.0, 1.0),
        abs_error: q.abs_error / PI,
        evaluations: q.evaluations,
    }
}

/// Coverage for any side/method combination.
pub fn coverage(side: Side, method: Method, w: f64, phi: f64) -> Quadrature {
    match (side, method) {
        (Side::TwoSided, m) => coverage_two_sided_with(w, phi, m),
        (Side::OneSided, Method::Region) => {
            Quadrature { value: coverage_one_sided_closed(w, phi), abs_error: 0.0, evaluations: 0 }
        }
        (Side::OneSided, Method::Supremum) => coverage_one_sided_quadrature(w, phi),
    }
}

/// Pointwise (single-x) normal critical value for the side.
pub fn pointwise_critical(level: f64, side: Side) -> f64 {
    match side {
        Side::TwoSided => norm_quantile(0.5 * (1.0 + level)),
        Side::OneSided => norm_quantile(level),
    }
}

/// Solves `coverage(w) = level` for `w`.
pub fn solve_critical(query: &CoverageQuery) -> Result<CriticalValue> {
    let level = query.level;
    if !(level > 0.5 && level < 0.9999) {
        return Err(Error::InvalidInput(format!("level {level} must lie in (0.5, 0.9999)")));
    }
    if !(query.phi > 0.0) {
        return Err(Error::InvalidInput(format!("cone angle {} must be positive", query.phi)));
    }
    let (phi, phi_clamped) = clamp_phi(query.phi);

    let lo = pointwise_critical(level, query.side);
    let hi = scheffe_critical(level) + 0.5;
    let mut max_err: f64 = 0.0;
    let root = brent(
        |w| {
            let c = coverage(query.side, query.method, w, phi);
            max_err = max_err.max(c.abs_error);
            c.value - level
        },
        lo,
        hi,
        1e-14,
        1e-15,
        200,
    )
    .map_err(|e| Error::Solver(format!("{e} (phi = {phi}, level = {level})")))?;

    let achieved = coverage(query.side, query.method, root.x, phi);
    if (achieved.value - level).abs() > COVERAGE_TOL {
        return Err(Error::Solver(format!(
            "achieved coverage {} misses level {level} at w = {}",
            achieved.value, root.x
        )));
    }
    Ok(CriticalValue {
        w: root.x,
        phi,
        level,
        side: query.side,
        achieved_coverage: achieved.value,
        method: query.method,
        quadrature_error_bound: max_err.max(achieved.abs_error),
        iterations: root.iterations,
        phi_clamped,
    })
}

/// `P(|Z| < w)` for a standard normal `Z`.
pub fn normal_two_sided(w: f64) -> f64 {
    erf(w * FRAC_1_SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn chi2_examples() {
        assert_eq!(chi2_cdf(2, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(chi2_cdf(2, -2.0 * 0.05f64.ln()).unwrap(), 0.95, epsilon = 1e-15);
        assert_abs_diff_eq!(chi2_cdf(2, 5.99146).unwrap(), 0.95, epsilon = 1e-6);
        assert_abs_diff_eq!(chi2_cdf(1, 3.8415).unwrap(), 0.95, epsilon = 1e-4);
        assert_abs_diff_eq!(chi2_cdf(1, 1.959963984540054f64.powi(2)).unwrap(), 0.95, epsilon = 1e-14);
        assert!(chi2_cdf(3, 1.0).is_err());
    }

    #[test]
    fn two_sided_at_pi_is_chi2() {
        for w in [0.5, 1.0, 2.447, 3.5] {
            assert_eq!(coverage_two_sided(w, PI), chi2_2_cdf(w * w));
            assert_eq!(coverage_two_sided_with(w, PI, Method::Region).value, chi2_2_cdf(w * w));
        }
    }

    #[test]
    fn two_sided_at_zero_is_normal_strip() {
        let w = 1.95996;
        assert_abs_diff_eq!(coverage_two_sided(w, 1e-12), normal_two_sided(w), epsilon = 1e-10);
        assert_abs_diff_eq!(coverage_two_sided(w, 1e-12), 0.95, epsilon = 1e-4);
    }

    #[test]
    fn one_sided_limits() {
        assert_abs_diff_eq!(coverage_one_sided_closed(40.0, 0.8), 1.0, epsilon = 1e-15);
        // φ → 0 gives Φ(w).
        assert_abs_diff_eq!(coverage_one_sided_closed(1.6448536269514722, 0.0), 0.95, epsilon = 1e-14);
        let w = 1.3;
        assert_abs_diff_eq!(
            coverage_one_sided_closed(w, PI),
            0.5 * chi2_2_cdf(w * w) + 0.5 * chi2_1_cdf(w * w),
            epsilon = 1e-15
        );
    }

    #[test]
    fn phi_above_pi_is_clamped() {
        let cv = solve_critical(&CoverageQuery::new(4.0, 0.95, Side::TwoSided)).unwrap();
        assert!(cv.phi_clamped);
        assert_eq!(cv.phi, PI);
        assert_abs_diff_eq!(cv.w, scheffe_critical(0.95), epsilon = 1e-9);
    }

    #[test]
    fn solver_rejects_bad_inputs() {
        for (phi, level) in [(1.0, 0.5), (1.0, 0.99995), (0.0, 0.95), (-1.0, 0.95), (f64::NAN, 0.95)] {
            let err = solve_critical(&CoverageQuery::new(phi, level, Side::TwoSided)).unwrap_err();
            assert!(matches!(err, Error::InvalidInput(_)), "{phi} {level}: {err:?}");
        }
    }

    #[test]
    fn solver_reports_diagnostics() {
        let cv = solve_critical(&CoverageQuery::new(0.809, 0.95, Side::TwoSided)).unwrap();
        assert!((cv.achieved_coverage - 0.95).abs() <= COVERAGE_TOL);
        assert!(cv.quadrature_error_bound <= MAX_QUAD_ERROR);
        assert!(cv.iterations > 0);
        assert_eq!(cv.method, Method::Supremum);
        let cv = solve_critical(&CoverageQuery::new(0.809, 0.95, Side::OneSided)).unwrap();
        assert_eq!(cv.method, Method::Region);
        assert_eq!(cv.quadrature_error_bound, 0.0);
    }

    #[test]
    fn methods_agree_on_solution() {
        for side in [Side::TwoSided, Side::OneSided] {
            let a = solve_critical(&CoverageQuery::new(1.2, 0.9, side).with_method(Method::Supremum)).unwrap();
            let b = solve_critical(&CoverageQuery::new(1.2, 0.9, side).with_method(Method::Region)).unwrap();
            assert_abs_diff_eq!(a.w, b.w, epsilon = 1e-9);
        }
    }
}
