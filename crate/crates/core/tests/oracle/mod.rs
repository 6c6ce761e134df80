//! Reference implementations shared by the integration tests. Nothing here
//! calls into the library's numerical code.

#![allow(dead_code)]

use glmbands::{Coefficients, Dataset, Link};

pub fn phi_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// `(β, narrow, wide, "unrestricted")` reference endpoints for the
/// simulation designs.
pub type EndpointRow = ((f64, f64), [(f64, f64); 3]);

// The wide upper endpoint for β = (2, 5) is printed as −.039; the endpoint
// formula gives +.039 under either sign convention.
pub const TABULATED_ENDPOINTS: [EndpointRow; 5] = [
    ((-2.0, 0.3), [(3.842, 9.491), (-0.657, 13.991), (-70.086, 83.420)]),
    ((0.0, 1.5), [(-0.565, 0.565), (-1.465, 1.465), (-15.351, 15.351)]),
    ((2.0, 5.0), [(-0.569, -0.231), (-0.839, -0.039), (-5.005, 4.205)]),
    ((-0.2, -0.3), [(-3.491, 2.158), (-7.991, 6.657), (-77.420, 76.086)]),
    ((-2.0, -4.0), [(-0.712, -0.288), (-1.049, 0.049), (-6.256, 5.256)]),
];

/// `(x, successes, trials)` with real-valued successes.
pub fn grouped(data: &Dataset) -> Vec<(f64, f64, f64)> {
    data.observations().iter().map(|o| (o.x, o.successes as f64, o.trials as f64)).collect()
}

/// Binomial log-likelihood without the combinatorial constant.
pub fn oracle_log_lik(link: Link, beta: Coefficients, rows: &[(f64, f64, f64)]) -> f64 {
    rows.iter()
        .map(|&(x, y, n)| {
            let eta = beta.beta0 + beta.beta1 * x;
            let (lp, lq) = match link {
                Link::Logit => (-(1.0 + (-eta).exp()).ln(), -(1.0 + eta.exp()).ln()),
                Link::Probit => (phi_cdf(eta).ln(), phi_cdf(-eta).ln()),
            };
            y * lp + (n - y) * lq
        })
        .sum()
}

/// Central-difference Hessian with step `1e-5·(1 + |β_j|)`.
pub fn numerical_hessian<F: Fn(Coefficients) -> f64>(f: F, beta: Coefficients) -> [[f64; 2]; 2] {
    let b = beta.as_array();
    let h = [1e-5 * (1.0 + b[0].abs()), 1e-5 * (1.0 + b[1].abs())];
    let at = |d0: f64, d1: f64| f(Coefficients::new(b[0] + d0, b[1] + d1));
    let f0 = at(0.0, 0.0);
    let d00 = (at(h[0], 0.0) - 2.0 * f0 + at(-h[0], 0.0)) / (h[0] * h[0]);
    let d11 = (at(0.0, h[1]) - 2.0 * f0 + at(0.0, -h[1])) / (h[1] * h[1]);
    let d01 = (at(h[0], h[1]) - at(h[0], -h[1]) - at(-h[0], h[1]) + at(-h[0], -h[1])) / (4.0 * h[0] * h[1]);
    [[d00, d01], [d01, d11]]
}

/// Logistic or probit cdf written out directly.
pub fn inverse_link(link: Link, eta: f64) -> f64 {
    match link {
        Link::Logit => 1.0 / (1.0 + (-eta).exp()),
        Link::Probit => phi_cdf(eta),
    }
}

/// Coverage by direct polar integration of the bivariate standard normal
/// over the acceptance region of a cone with edge directions at angles 0
/// and `phi`.
///
/// With `ρ(θ)` the distance to the region boundary along angle `θ`, the
/// coverage is `(1/2π)∫(1 − e^{−ρ²/2})dθ`. The boundary is the circle of
/// radius `w` inside the cone's sector (and, two-sided, its reflection) and a
/// supporting line through an edge direction elsewhere.
pub fn coverage_polar(w: f64, phi: f64, two_sided: bool, steps: usize) -> f64 {
    use std::f64::consts::PI;
    let rho = |theta: f64| {
        let t = theta.rem_euclid(2.0 * PI);
        if t <= phi || (two_sided && (PI..=PI + phi).contains(&t)) {
            return w;
        }
        let m = if two_sided { t.cos().abs().max((t - phi).cos().abs()) } else { t.cos().max((t - phi).cos()) };
        if m <= 0.0 {
            f64::INFINITY
        } else {
            w / m
        }
    };
    let n = steps + steps % 2;
    let h = 2.0 * PI / n as f64;
    let g = |theta: f64| 1.0 - (-0.5 * rho(theta).powi(2)).exp();
    let mut s = g(0.0) + g(2.0 * PI);
    for k in 1..n {
        let c = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += c * g(k as f64 * h);
    }
    s * h / 3.0 / (2.0 * PI)
}
