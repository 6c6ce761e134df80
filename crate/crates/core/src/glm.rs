//! Maximum-likelihood fitting of two-parameter binomial regression models
//! with a logit or probit link, plus their expected Fisher information.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::special::{ln_norm_cdf, logistic, logit, norm_cdf, norm_quantile, softplus};

/// Response probabilities are kept at least this far from 0 and 1.
const PROB_GUARD: f64 = f64::EPSILON / 2.0;

/// Coefficient norm beyond which iterates are treated as diverging.
const DIVERGENCE_NORM: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Logit,
    Probit,
}

impl Link {
    /// Inverse link `F(η)`, without any guard.
    pub fn cdf(self, eta: f64) -> f64 {
        match self {
            Link::Logit => logistic(eta),
            Link::Probit => norm_cdf(eta),
        }
    }

    /// Link function `F⁻¹(p)`.
    pub fn quantile(self, p: f64) -> f64 {
        match self {
            Link::Logit => logit(p),
            Link::Probit => norm_quantile(p),
        }
    }

    /// `ln F(η)`. Both links satisfy `1 − F(η) = F(−η)`.
    pub fn ln_cdf(self, eta: f64) -> f64 {
        match self {
            Link::Logit => -softplus(-eta),
            Link::Probit => ln_norm_cdf(eta),
        }
    }

    /// `d ln F(η) / dη`.
    fn dln_cdf(self, eta: f64) -> f64 {
        match self {
            Link::Logit => logistic(-eta),
            Link::Probit => (ln_std_normal_pdf(eta) - ln_norm_cdf(eta)).exp(),
        }
    }

    /// Fisher weight `F'(η)² / (F(η)(1 − F(η)))`.
    pub fn weight(self, eta: f64) -> f64 {
        match self {
            Link::Logit => logistic(eta) * logistic(-eta),
            Link::Probit => (2.0 * ln_std_normal_pdf(eta) - ln_norm_cdf(eta) - ln_norm_cdf(-eta)).exp(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Link::Logit => "logit",
            Link::Probit => "probit",
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Link {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logit" | "logistic" => Ok(Link::Logit),
            "probit" => Ok(Link::Probit),
            other => Err(Error::InvalidInput(format!("unknown link '{other}'"))),
        }
    }
}

fn ln_std_normal_pdf(x: f64) -> f64 {
    -0.5 * x * x - 0.5 * (2.0 * PI).ln()
}

/// `(β₀, β₁)`: intercept and slope of the linear predictor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub beta0: f64,
    pub beta1: f64,
}

impl Coefficients {
    pub const fn new(beta0: f64, beta1: f64) -> Self {
        Self { beta0, beta1 }
    }

    /// `c′β` with `c = (1, x)`.
    pub fn linear_predictor(&self, x: f64) -> f64 {
        self.beta0 + self.beta1 * x
    }

    pub fn norm(&self) -> f64 {
        self.beta0.hypot(self.beta1)
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.beta0, self.beta1]
    }
}

/// Symmetric 2×2 matrix; used for the information matrix and its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InfoMatrix(pub [[f64; 2]; 2]);

impl InfoMatrix {
    pub const IDENTITY: InfoMatrix = InfoMatrix([[1.0, 0.0], [0.0, 1.0]]);

    /// Builds a symmetric matrix from its three distinct entries.
    pub const fn symmetric(a: f64, b: f64, d: f64) -> Self {
        InfoMatrix([[a, b], [b, d]])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let half_tr = 0.5 * self.trace();
        let gap = (0.5 * (self.0[0][0] - self.0[1][1])).hypot(self.0[0][1]);
        (half_tr - gap, half_tr + gap)
    }

    pub fn is_symmetric(&self) -> bool {
        self.0[0][1] == self.0[1][0]
    }

    pub fn inverse(&self) -> Result<InfoMatrix> {
        let det = self.det();
        let (lo, hi) = self.eigenvalues();
        if !det.is_finite() || det <= 0.0 || lo <= hi * 1e-15 {
            return Err(Error::DegenerateInformation(format!("eigenvalues {lo:e}, {hi:e}")));
        }
        let m = &self.0;
        Ok(InfoMatrix([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]))
    }

    pub fn matmul(&self, other: &InfoMatrix) -> [[f64; 2]; 2] {
        let (a, b) = (&self.0, &other.0);
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [self.0[0][0] * v[0] + self.0[0][1] * v[1], self.0[1][0] * v[0] + self.0[1][1] * v[1]]
    }

    /// `v′ M v`.
    pub fn quadratic_form(&self, v: [f64; 2]) -> f64 {
        let mv = self.mul_vec(v);
        v[0] * mv[0] + v[1] * mv[1]
    }

    pub fn scaled(&self, s: f64) -> InfoMatrix {
        InfoMatrix([[s * self.0[0][0], s * self.0[0][1]], [s * self.0[1][0], s * self.0[1][1]]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Convergence threshold on the max-abs score.
    pub tol: f64,
    pub max_iter: usize,
    /// Return a flagged fit instead of an error when the data are separated.
    pub allow_separation: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 100, allow_separation: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub link: Link,
    pub beta_hat: Coefficients,
    /// Expected Fisher information at `beta_hat`.
    pub info: InfoMatrix,
    /// Asymptotic covariance of `beta_hat`.
    pub info_inv: InfoMatrix,
    /// Binomial log-likelihood including the combinatorial constant.
    pub log_lik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub separation_flag: bool,
    pub max_abs_score: f64,
    /// Rows whose fitted probability is within 1e-12 of 0 or 1. They carry
    /// almost no information but are kept in the fit.
    pub saturated_rows: Vec<usize>,
}

/// `F(β₀ + β₁x)`, kept strictly inside (0, 1).
pub fn response_prob(link: Link, beta: Coefficients, x: f64) -> f64 {
    link.cdf(beta.linear_predictor(x)).clamp(PROB_GUARD, 1.0 - PROB_GUARD)
}

fn ln_choose(n: u64, k: u64) -> f64 {
    let (n, k) = (n as f64, k as f64);
    libm::lgamma(n + 1.0) - libm::lgamma(k + 1.0) - libm::lgamma(n - k + 1.0)
}

pub fn log_likelihood(link: Link, beta: Coefficients, data: &Dataset) -> f64 {
    data.observations()
        .iter()
        .map(|o| {
            let eta = beta.linear_predictor(o.x);
            let mut ll = ln_choose(o.trials, o.successes);
            if o.successes > 0 {
                ll += o.successes as f64 * link.ln_cdf(eta);
            }
            if o.failures() > 0 {
                ll += o.failures() as f64 * link.ln_cdf(-eta);
            }
            ll
        })
        .sum()
}

/// Gradient of the log-likelihood with respect to `(β₀, β₁)`.
pub fn score(link: Link, beta: Coefficients, data: &Dataset) -> [f64; 2] {
    data.observations().iter().fold([0.0, 0.0], |acc, o| {
        let eta = beta.linear_predictor(o.x);
        let mut g = 0.0;
        if o.successes > 0 {
            g += o.successes as f64 * link.dln_cdf(eta);
        }
        if o.failures() > 0 {
            g -= o.failures() as f64 * link.dln_cdf(-eta);
        }
        [acc[0] + g, acc[1] + g * o.x]
    })
}

/// `F = Σ nᵢ wᵢ cᵢ cᵢ′` with the link's Fisher weight `wᵢ`.
pub fn fisher_information(link: Link, beta: Coefficients, data: &Dataset) -> Result<InfoMatrix> {
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for o in data.observations() {
        let w = o.trials as f64 * link.weight(beta.linear_predictor(o.x));
        s0 += w;
        s1 += w * o.x;
        s2 += w * o.x * o.x;
    }
    let info = InfoMatrix::symmetric(s0, s1, s2);
    let (lo, hi) = info.eigenvalues();
    if !(lo > 0.0) || !lo.is_finite() || lo <= hi * 1e-15 {
        return Err(Error::DegenerateInformation(format!(
            "information eigenvalues {lo:e}, {hi:e} at beta = ({}, {})",
            beta.beta0, beta.beta1
        )));
    }
    Ok(info)
}

/// Whether the responses can be split by a threshold on `x` (complete or
/// quasi-complete separation), in which case no finite MLE exists.
pub fn is_separated(data: &Dataset) -> bool {
    let obs = data.observations();
    let succ = obs.iter().filter(|o| o.successes > 0).map(|o| o.x);
    let fail = obs.iter().filter(|o| o.failures() > 0).map(|o| o.x);
    let (succ_lo, succ_hi) = succ.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
    let (fail_lo, fail_hi) = fail.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
    if succ_lo.is_infinite() || fail_lo.is_infinite() {
        return true;
    }
    fail_hi <= succ_lo || succ_hi <= fail_lo
}

fn max_abs(v: [f64; 2]) -> f64 {
    v[0].abs().max(v[1].abs())
}

/// Maximum-likelihood fit by damped Fisher scoring (Newton–Raphson for the
/// logit link) with step halving whenever the likelihood would decrease.
pub fn fit(link: Link, data: &Dataset, config: &FitConfig) -> Result<ModelFit> {
    let separated = is_separated(data);
    if separated && !config.allow_separation {
        return Err(Error::Separation("a threshold on x splits successes from failures".into()));
    }

    let mean = data.total_successes() as f64 / data.total_trials() as f64;
    let start = link.quantile(mean.clamp(1e-6, 1.0 - 1e-6));
    let mut beta = Coefficients::new(start, 0.0);
    let mut ll = log_likelihood(link, beta, data);
    let mut converged = false;
    let mut diverged = false;
    let mut iterations = 0;

    while iterations < config.max_iter {
        let g = score(link, beta, data);
        if max_abs(g) < config.tol {
            converged = true;
            break;
        }
        iterations += 1;
        let info = match fisher_information(link, beta, data) {
            Ok(info) => info,
            Err(_) if separated => {
                diverged = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let step = info.inverse()?.mul_vec(g);
        let mut scale = 1.0;
        let mut candidate;
        let mut cand_ll;
        loop {
            candidate = Coefficients::new(beta.beta0 + scale * step[0], beta.beta1 + scale * step[1]);
            cand_ll = log_likelihood(link, candidate, data);
            if cand_ll >= ll - 1e-12 * ll.abs().max(1.0) || scale < 1e-10 {
                break;
            }
            scale *= 0.5;
        }
        let moved = max_abs([candidate.beta0 - beta.beta0, candidate.beta1 - beta.beta1]);
        beta = candidate;
        ll = cand_ll;
        if !beta.beta0.is_finite() || !beta.beta1.is_finite() {
            return Err(Error::NonConvergence { iterations, last: beta });
        }
        if beta.norm() > DIVERGENCE_NORM {
            diverged = true;
            break;
        }
        if moved < 1e-12 {
            converged = max_abs(score(link, beta, data)) < config.tol.max(1e-6);
            break;
        }
    }

    let fitted: Vec<f64> = data.observations().iter().map(|o| link.cdf(beta.linear_predictor(o.x))).collect();
    let saturated_rows: Vec<usize> =
        fitted.iter().enumerate().filter(|(_, &p)| !(1e-12..=1.0 - 1e-12).contains(&p)).map(|(i, _)| i).collect();
    let separation_flag = separated || diverged || one_sided_saturation(data, &fitted);

    if separation_flag && !config.allow_separation {
        return Err(Error::Separation(format!("coefficients diverged to ({}, {})", beta.beta0, beta.beta1)));
    }
    if !converged && !separation_flag {
        return Err(Error::NonConvergence { iterations, last: beta });
    }

    let info = fisher_information(link, beta, data)?;
    let info_inv = info.inverse()?;
    Ok(ModelFit {
        link,
        beta_hat: beta,
        info,
        info_inv,
        log_lik: ll,
        iterations,
        converged,
        separation_flag,
        max_abs_score: max_abs(score(link, beta, data)),
        saturated_rows,
    })
}

/// Every observation below some split point is fitted at 0 (or 1) and every
/// one above at the other extreme.
fn one_sided_saturation(data: &Dataset, fitted: &[f64]) -> bool {
    let mut idx: Vec<usize> = (0..fitted.len()).collect();
    idx.sort_by(|&a, &b| data.observations()[a].x.total_cmp(&data.observations()[b].x));
    let low = |p: f64| p < 1e-12;
    let high = |p: f64| p > 1.0 - 1e-12;
    (1..idx.len()).any(|k| {
        let (left, right) = idx.split_at(k);
        (left.iter().all(|&i| low(fitted[i])) && right.iter().all(|&i| high(fitted[i])))
            || (left.iter().all(|&i| high(fitted[i])) && right.iter().all(|&i| low(fitted[i])))
    })
}
