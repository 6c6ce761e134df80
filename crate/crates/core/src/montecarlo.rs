//! Monte Carlo estimate of the simultaneous coverage error of the bands in
//! small samples.
//!
//! Each replication draws Bernoulli responses on a fixed design, refits the
//! model, recomputes the cone angle and critical value from the refit, and
//! checks whether the true linear predictor stays inside the band over a
//! dense grid of the interval.

use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::{linspace, standard_error};
use crate::critical::{solve_critical, CoverageQuery, Side};
use crate::data::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::geometry::fit_cone_angle;
use crate::glm::{fit, Coefficients, FitConfig, Link, ModelFit};

/// Points in the containment check grid.
pub const CHECK_GRID: usize = 1001;

/// True coefficient vectors of the reference study: slowly increasing,
/// moderately increasing, fast increasing, slowly decreasing, fast decreasing.
pub const STUDY_BETAS: [Coefficients; 5] = [
    Coefficients::new(-2.0, 0.3),
    Coefficients::new(0.0, 1.5),
    Coefficients::new(2.0, 5.0),
    Coefficients::new(-0.2, -0.3),
    Coefficients::new(-2.0, -4.0),
];
pub const STUDY_SAMPLE_SIZES: [usize; 4] = [25, 50, 100, 150];
pub const STUDY_ALPHAS: [f64; 3] = [0.01, 0.05, 0.10];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    /// Endpoints where the true probability is 0.3 and 0.7.
    Narrow,
    /// Endpoints where the true probability is 0.1 and 0.9.
    Wide,
    /// Endpoints where the true probability is 1e-10 and 1 − 1e-10.
    Unrestricted,
    Explicit {
        a: f64,
        b: f64,
    },
}

impl IntervalKind {
    /// Probability levels defining the endpoints, when the kind has them.
    pub fn probabilities(&self) -> Option<(f64, f64)> {
        match self {
            IntervalKind::Narrow => Some((0.3, 0.7)),
            IntervalKind::Wide => Some((0.1, 0.9)),
            IntervalKind::Unrestricted => Some((1e-10, 1.0 - 1e-10)),
            IntervalKind::Explicit { .. } => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            IntervalKind::Narrow => "narrow".into(),
            IntervalKind::Wide => "wide".into(),
            IntervalKind::Unrestricted => "unrestricted".into(),
            IntervalKind::Explicit { a, b } => format!("{a}:{b}"),
        }
    }
}

impl FromStr for IntervalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "narrow" => Ok(IntervalKind::Narrow),
            "wide" => Ok(IntervalKind::Wide),
            "unrestricted" => Ok(IntervalKind::Unrestricted),
            other => {
                let (a, b) = other.split_once(':').ok_or_else(|| {
                    Error::InvalidInput(format!("interval kind '{other}' is not narrow, wide, unrestricted or a:b"))
                })?;
                let p =
                    |t: &str| t.trim().parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad endpoint '{t}'")));
                let (a, b) = (p(a)?, p(b)?);
                if !(a < b) {
                    return Err(Error::InvalidInput(format!("explicit interval needs a < b, got {a}:{b}")));
                }
                Ok(IntervalKind::Explicit { a, b })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Design {
    /// Equally spaced over the interval, endpoints included.
    Equal,
    /// `x = (b − a)·z⁶ + a` for `z` equally spaced on [0, 1].
    EndpointConcentrated,
    /// `x = ((b − a)/2)·z⁵ + (a + b)/2` for `z` equally spaced on [−1, 1].
    CenterConcentrated,
}

impl Design {
    pub fn label(&self) -> &'static str {
        match self {
            Design::Equal => "equal",
            Design::EndpointConcentrated => "endpoint",
            Design::CenterConcentrated => "center",
        }
    }
}

impl FromStr for Design {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "equal" => Ok(Design::Equal),
            "endpoint" | "endpoint_concentrated" | "endpoint-concentrated" => Ok(Design::EndpointConcentrated),
            "center" | "centre" | "center_concentrated" | "center-concentrated" => Ok(Design::CenterConcentrated),
            other => Err(Error::InvalidInput(format!("unknown design '{other}'"))),
        }
    }
}

/// How the true response probability is formed from `beta_true`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// `p(x) = F(β₀ + β₁x)`, the fitted model's own parameterisation.
    #[default]
    Model,
    /// `p(x) = 1 / (1 + exp(β₀ + β₁x))`, i.e. `F(−(β₀ + β₁x))`.
    SignFlipped,
}

impl Generator {
    /// Linear predictor of the data-generating model.
    pub fn true_eta(self, beta: Coefficients, x: f64) -> f64 {
        match self {
            Generator::Model => beta.linear_predictor(x),
            Generator::SignFlipped => -beta.linear_predictor(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub beta_true: Coefficients,
    pub link: Link,
    pub interval_kind: IntervalKind,
    pub design: Design,
    pub n: usize,
    pub replications: usize,
    pub alpha: f64,
    pub side: Side,
    pub seed: u64,
    #[serde(default)]
    pub generator: Generator,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::InvalidInput(format!("sample size n = {} must be at least 4", self.n)));
        }
        if self.replications < 1 {
            return Err(Error::InvalidInput("replications must be at least 1".into()));
        }
        if !(self.alpha > 1e-4 && self.alpha < 0.5) {
            return Err(Error::InvalidInput(format!("alpha {} must lie in (0.0001, 0.5)", self.alpha)));
        }
        if !(self.beta_true.beta0.is_finite() && self.beta_true.beta1.is_finite()) {
            return Err(Error::InvalidInput("beta_true must be finite".into()));
        }
        Ok(())
    }

    pub fn endpoints(&self) -> Result<(f64, f64)> {
        match (self.interval_kind, self.interval_kind.probabilities()) {
            (IntervalKind::Explicit { a, b }, _) => Ok((a, b)),
            (_, Some((lo, hi))) => interval_endpoints_for(self.link, self.beta_true, lo, hi),
            (_, None) => unreachable!("non-explicit kinds define probabilities"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub beta_true: Coefficients,
    pub link: Link,
    pub interval: String,
    pub a: f64,
    pub b: f64,
    pub design: Design,
    pub n: usize,
    pub alpha: f64,
    pub side: Side,
    pub generator: Generator,
    pub replications: usize,
    pub seed: u64,
    /// Fraction of usable replications whose band missed the true curve.
    pub estimated_error: f64,
    /// `√(ê(1 − ê)/N)` with `N` the usable replications.
    pub std_error: f64,
    pub replications_used: usize,
    pub fit_failures: usize,
    /// Replications where the grid containment and the max-statistic
    /// criterion disagreed. Always expected to be zero.
    pub criterion_mismatches: usize,
}

impl CoverageReport {
    pub const CSV_HEADER: &'static str =
        "beta0,beta1,link,n,interval,a,b,design,alpha,side,estimated_error,std_error,replications_used,fit_failures,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.beta_true.beta0,
            self.beta_true.beta1,
            self.link,
            self.n,
            self.interval,
            self.a,
            self.b,
            self.design.label(),
            self.alpha,
            match self.side {
                Side::TwoSided => "two",
                Side::OneSided => "one",
            },
            self.estimated_error,
            self.std_error,
            self.replications_used,
            self.fit_failures,
            self.seed
        )
    }
}

impl fmt::Display for CoverageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "beta=({}, {}) n={} interval={} ({:.3}, {:.3}) design={} alpha={} error={:.4} (se {:.4}, used {}, failed {})",
            self.beta_true.beta0,
            self.beta_true.beta1,
            self.n,
            self.interval,
            self.a,
            self.b,
            self.design.label(),
            self.alpha,
            self.estimated_error,
            self.std_error,
            self.replications_used,
            self.fit_failures
        )
    }
}

/// `x = (logit(p) − β₀)/β₁` at `p_lo` and `p_hi`, ordered so `a < b`.
pub fn interval_endpoints(beta: Coefficients, p_lo: f64, p_hi: f64) -> Result<(f64, f64)> {
    interval_endpoints_for(Link::Logit, beta, p_lo, p_hi)
}

/// As [`interval_endpoints`] with the given link's quantile function.
pub fn interval_endpoints_for(link: Link, beta: Coefficients, p_lo: f64, p_hi: f64) -> Result<(f64, f64)> {
    if !(0.0 < p_lo && p_lo < p_hi && p_hi < 1.0) {
        return Err(Error::InvalidInput(format!("need 0 < p_lo < p_hi < 1, got {p_lo}, {p_hi}")));
    }
    if beta.beta1 == 0.0 {
        return Err(Error::InvalidInput("endpoints are undefined when beta1 = 0".into()));
    }
    let x = |p: f64| (link.quantile(p) - beta.beta0) / beta.beta1;
    let (a, b) = (x(p_lo), x(p_hi));
    Ok(if a <= b { (a, b) } else { (b, a) })
}

pub fn generate_design(a: f64, b: f64, n: usize, design: Design) -> Result<Vec<f64>> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidInput(format!("design interval ({a}, {b}) must be finite with a < b")));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!("design needs at least 2 points, got {n}")));
    }
    Ok(match design {
        Design::Equal => linspace(a, b, n),
        Design::EndpointConcentrated => {
            linspace(0.0, 1.0, n).into_iter().map(|z| ((b - a) * z.powi(6) + a).clamp(a, b)).collect()
        }
        Design::CenterConcentrated => {
            let mid = 0.5 * (a + b);
            linspace(-1.0, 1.0, n).into_iter().map(|z| (0.5 * (b - a) * z.powi(5) + mid).clamp(a, b)).collect()
        }
    })
}

/// Result of one simulated data set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Replication {
    FitFailed,
    Fitted {
        /// True curve lies inside the band at every grid point.
        contained: bool,
        /// `max` over the grid of the studentised deviation (absolute value
        /// for two-sided bands) is below `w`.
        stat_below_w: bool,
        max_stat: f64,
        w: f64,
        phi: f64,
    },
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Independent stream for replication `index` of `seed`.
pub fn replication_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn draw_dataset(config: &SimConfig, xs: &[f64], rng: &mut ChaCha8Rng) -> Result<Dataset> {
    let obs = xs
        .iter()
        .map(|&x| {
            let p = config.link.cdf(config.generator.true_eta(config.beta_true, x));
            let y = uniform(rng) < p;
            Observation::new(x, y as u64, 1)
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(obs)
}

fn band_check(config: &SimConfig, fitted: &ModelFit, a: f64, b: f64) -> Result<Replication> {
    let cone = fit_cone_angle(fitted, a, b)?;
    let cv = solve_critical(&CoverageQuery::new(cone.phi, 1.0 - config.alpha, config.side))?;
    let w = cv.w;
    let mut contained = true;
    let mut max_stat = f64::NEG_INFINITY;
    for x in linspace(a, b, CHECK_GRID) {
        let truth = config.generator.true_eta(config.beta_true, x);
        let center = fitted.beta_hat.linear_predictor(x);
        let se = standard_error(fitted, x)?;
        let (lower, upper) = (center - w * se, center + w * se);
        let inside = match config.side {
            Side::TwoSided => lower < truth && truth < upper,
            Side::OneSided => truth < upper,
        };
        contained &= inside;
        let t = (truth - center) / se;
        let stat = match config.side {
            Side::TwoSided => t.abs(),
            Side::OneSided => t,
        };
        max_stat = max_stat.max(stat);
    }
    Ok(Replication::Fitted { contained, stat_below_w: max_stat < w, max_stat, w, phi: cone.phi })
}

/// Runs replication `index` of the simulation on design points `xs` over `(a, b)`.
pub fn run_replication(config: &SimConfig, xs: &[f64], a: f64, b: f64, index: u64) -> Replication {
    let mut rng = replication_rng(config.seed, index);
    let outcome = draw_dataset(config, xs, &mut rng)
        .and_then(|data| fit(config.link, &data, &FitConfig::default()))
        .and_then(|fitted| band_check(config, &fitted, a, b));
    outcome.unwrap_or(Replication::FitFailed)
}

pub fn simulate_coverage(config: &SimConfig) -> Result<CoverageReport> {
    let report = simulate_cell(config)?;
    if report.replications_used == 0 {
        return Err(Error::SimulationDegenerate { replications: config.replications });
    }
    Ok(report)
}

/// As [`simulate_coverage`], but a configuration in which every fit fails
/// yields a report with NaN error instead of an error. Used by the sweeps.
pub fn simulate_cell(config: &SimConfig) -> Result<CoverageReport> {
    config.validate()?;
    let (a, b) = config.endpoints()?;
    let xs = generate_design(a, b, config.n, config.design)?;

    let outcomes: Vec<Replication> =
        (0..config.replications as u64).into_par_iter().map(|i| run_replication(config, &xs, a, b, i)).collect();

    let (mut used, mut missed, mut mismatches) = (0usize, 0usize, 0usize);
    for o in &outcomes {
        if let Replication::Fitted { contained, stat_below_w, .. } = *o {
            used += 1;
            missed += usize::from(!contained);
            mismatches += usize::from(contained != stat_below_w);
        }
    }
    let e = if used == 0 { f64::NAN } else { missed as f64 / used as f64 };
    Ok(CoverageReport {
        beta_true: config.beta_true,
        link: config.link,
        interval: config.interval_kind.label(),
        a,
        b,
        design: config.design,
        n: config.n,
        alpha: config.alpha,
        side: config.side,
        generator: config.generator,
        replications: config.replications,
        seed: config.seed,
        estimated_error: e,
        std_error: (e * (1.0 - e) / used as f64).sqrt(),
        replications_used: used,
        fit_failures: config.replications - used,
        criterion_mismatches: mismatches,
    })
}

/// Every cell of the equal-spacing study: each true `β`, sample size,
/// interval kind and `α`, two-sided.
pub fn alpha_sweep(link: Link, replications: usize, seed: u64) -> Vec<SimConfig> {
    let mut out = Vec::new();
    for beta in STUDY_BETAS {
        for n in STUDY_SAMPLE_SIZES {
            for kind in [IntervalKind::Narrow, IntervalKind::Wide, IntervalKind::Unrestricted] {
                for alpha in STUDY_ALPHAS {
                    out.push(SimConfig {
                        beta_true: beta,
                        link,
                        interval_kind: kind,
                        design: Design::Equal,
                        n,
                        replications,
                        alpha,
                        side: Side::TwoSided,
                        seed,
                        generator: Generator::Model,
                    });
                }
            }
        }
    }
    out
}

/// Every cell of the concentrated-design study at `α = 0.05`.
pub fn design_sweep(link: Link, replications: usize, seed: u64) -> Vec<SimConfig> {
    let mut out = Vec::new();
    for beta in STUDY_BETAS {
        for n in STUDY_SAMPLE_SIZES {
            for kind in [IntervalKind::Narrow, IntervalKind::Wide, IntervalKind::Unrestricted] {
                for design in [Design::EndpointConcentrated, Design::CenterConcentrated] {
                    out.push(SimConfig {
                        beta_true: beta,
                        link,
                        interval_kind: kind,
                        design,
                        n,
                        replications,
                        alpha: 0.05,
                        side: Side::TwoSided,
                        seed,
                        generator: Generator::Model,
                    });
                }
            }
        }
    }
    out
}
