//! Hyperbolic bands `c′β̂ ± w·√(c′F⁻¹c)` on the linear predictor, mapped to
//! the response scale through the (increasing) inverse link.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::critical::{solve_critical, CoverageQuery, CriticalValue, Side};
use crate::error::{Error, Result};
use crate::geometry::{fit_cone_angle, unrestricted_angle, ConeAngle};
use crate::glm::{Link, ModelFit};

pub const DEFAULT_GRID: usize = 201;

/// Probability limits are kept strictly inside (0, 1).
const P_GUARD: f64 = f64::MIN_POSITIVE;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interval {
    Bounded { a: f64, b: f64 },
    Unrestricted,
}

impl Interval {
    pub fn bounded(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::InvalidInput(format!("interval ({a}, {b}) must be finite with a < b")));
        }
        Ok(Interval::Bounded { a, b })
    }
}

impl FromStr for Interval {
    type Err = Error;

    /// `a:b` or `unrestricted`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("unrestricted") {
            return Ok(Interval::Unrestricted);
        }
        let (a, b) =
            s.split_once(':').ok_or_else(|| Error::InvalidInput(format!("interval '{s}' is not of the form a:b")))?;
        let parse = |t: &str| {
            t.trim().parse::<f64>().map_err(|_| Error::InvalidInput(format!("cannot parse interval endpoint '{t}'")))
        };
        Interval::bounded(parse(a)?, parse(b)?)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::Bounded { a, b } => write!(f, "({a}, {b})"),
            Interval::Unrestricted => f.write_str("(-inf, inf)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandSide {
    TwoSided,
    Upper,
    Lower,
}

impl BandSide {
    pub fn critical_side(self) -> Side {
        match self {
            BandSide::TwoSided => Side::TwoSided,
            BandSide::Upper | BandSide::Lower => Side::OneSided,
        }
    }
}

impl FromStr for BandSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "two" | "two-sided" | "two_sided" | "both" => Ok(BandSide::TwoSided),
            "upper" | "one" | "one-sided" | "one_sided" => Ok(BandSide::Upper),
            "lower" => Ok(BandSide::Lower),
            other => Err(Error::InvalidInput(format!("unknown side '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    pub interval: Interval,
    pub side: BandSide,
    /// Simultaneous confidence level `1 − α`.
    pub level: f64,
    pub link: Link,
    /// Grid range used when the interval is unrestricted.
    pub plot_range: Option<(f64, f64)>,
}

impl BandSpec {
    pub fn new(interval: Interval, side: BandSide, level: f64, link: Link) -> Self {
        Self { interval, side, level, link, plot_range: None }
    }

    pub fn with_plot_range(mut self, lo: f64, hi: f64) -> Self {
        self.plot_range = Some((lo, hi));
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.level > 0.5 && self.level < 0.9999) {
            return Err(Error::InvalidInput(format!("level {} must lie in (0.5, 0.9999)", self.level)));
        }
        if let Interval::Bounded { a, b } = self.interval {
            Interval::bounded(a, b)?;
        }
        Ok(())
    }

    fn grid_range(&self) -> Result<(f64, f64)> {
        match (self.interval, self.plot_range) {
            (Interval::Bounded { a, b }, _) => Ok((a, b)),
            (Interval::Unrestricted, Some((lo, hi))) if lo.is_finite() && hi.is_finite() && lo < hi => Ok((lo, hi)),
            (Interval::Unrestricted, _) => {
                Err(Error::InvalidInput("an unrestricted band needs a finite plot range for its grid".into()))
            }
        }
    }
}

/// A band evaluated on a grid. Limits that do not apply to the side are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandCurve {
    pub link: Link,
    pub side: BandSide,
    pub level: f64,
    pub interval: Interval,
    pub w: f64,
    pub phi: f64,
    pub cone: ConeAngle,
    pub critical: CriticalValue,
    pub x: Vec<f64>,
    pub center_linear: Vec<f64>,
    pub se: Vec<f64>,
    pub half_width: Vec<f64>,
    pub fitted_p: Vec<f64>,
    pub lower_p: Option<Vec<f64>>,
    pub upper_p: Option<Vec<f64>>,
}

impl BandCurve {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Columns `x,center_linear,se,lower_p,upper_p`; absent limits are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,center_linear,se,lower_p,upper_p\n");
        let cell = |v: &Option<Vec<f64>>, i: usize| v.as_ref().map(|v| v[i].to_string()).unwrap_or_default();
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.x[i],
                self.center_linear[i],
                self.se[i],
                cell(&self.lower_p, i),
                cell(&self.upper_p, i)
            ));
        }
        out
    }
}

/// `√(c′F⁻¹c)` at `c = (1, x)`.
pub fn standard_error(fit: &ModelFit, x: f64) -> Result<f64> {
    let q = fit.info_inv.quadratic_form([1.0, x]);
    if q < -1e-14 || q.is_nan() {
        return Err(Error::DegenerateGeometry(format!("negative variance {q:e} at x = {x}")));
    }
    Ok(q.max(0.0).sqrt())
}

fn prob(link: Link, eta: f64) -> f64 {
    link.cdf(eta).clamp(P_GUARD, 1.0 - f64::EPSILON / 2.0)
}

/// Equally spaced grid over `[lo, hi]` including both endpoints.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            let mut v: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
            v[n - 1] = hi;
            v
        }
    }
}

/// Cone angle for a band's interval (π when unrestricted).
pub fn band_cone(fit: &ModelFit, interval: Interval) -> Result<ConeAngle> {
    match interval {
        Interval::Bounded { a, b } => fit_cone_angle(fit, a, b),
        Interval::Unrestricted => Ok(unrestricted_angle()),
    }
}

/// Solves the critical value for a fitted model and band spec.
pub fn band_critical(fit: &ModelFit, spec: &BandSpec) -> Result<(ConeAngle, CriticalValue)> {
    spec.validate()?;
    let cone = band_cone(fit, spec.interval)?;
    let cv = solve_critical(&CoverageQuery::new(cone.phi, spec.level, spec.side.critical_side()))?;
    Ok((cone, cv))
}

pub fn build_band(fit: &ModelFit, spec: &BandSpec, grid_size: usize) -> Result<BandCurve> {
    spec.validate()?;
    if fit.link != spec.link {
        return Err(Error::InvalidInput(format!(
            "band requested for the {} link but the model was fitted with {}",
            spec.link, fit.link
        )));
    }
    if !fit.converged {
        return Err(Error::InvalidInput("cannot build a band from an unconverged fit".into()));
    }
    if grid_size < 2 {
        return Err(Error::InvalidInput(format!("grid size must be at least 2, got {grid_size}")));
    }
    let (lo, hi) = spec.grid_range()?;
    let (cone, critical) = band_critical(fit, spec)?;
    let w = critical.w;

    let x = linspace(lo, hi, grid_size);
    let center_linear: Vec<f64> = x.iter().map(|&x| fit.beta_hat.linear_predictor(x)).collect();
    let se = x.iter().map(|&x| standard_error(fit, x)).collect::<Result<Vec<_>>>()?;
    let half_width: Vec<f64> = se.iter().map(|s| w * s).collect();
    let fitted_p = center_linear.iter().map(|&eta| prob(spec.link, eta)).collect();
    let limit = |sign: f64| -> Vec<f64> {
        center_linear.iter().zip(&half_width).map(|(&c, &h)| prob(spec.link, c + sign * h)).collect()
    };
    let (lower_p, upper_p) = match spec.side {
        BandSide::TwoSided => (Some(limit(-1.0)), Some(limit(1.0))),
        BandSide::Upper => (None, Some(limit(1.0))),
        BandSide::Lower => (Some(limit(-1.0)), None),
    };

    Ok(BandCurve {
        link: spec.link,
        side: spec.side,
        level: spec.level,
        interval: spec.interval,
        w,
        phi: cone.phi,
        cone,
        critical,
        x,
        center_linear,
        se,
        half_width,
        fitted_p,
        lower_p,
        upper_p,
    })
}
