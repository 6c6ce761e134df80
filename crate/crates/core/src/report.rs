//! Reproduction of the mutagenicity example: fit, geometry and critical
//! values next to the published reference values.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bands::{band_critical, BandSide, BandSpec, Interval};
use crate::data::bundled_lavelle_dataset;
use crate::error::Result;
use crate::geometry::fit_cone_angle;
use crate::glm::{fit, FitConfig, Link, ModelFit};

pub const REF_BETA: (f64, f64) = (-0.789, 0.854);
pub const REF_INFO_INV: [[f64; 2]; 2] = [[0.017, -0.005], [-0.005, 0.005]];
pub const REF_U_A: [f64; 2] = [0.163, -0.109];
pub const REF_U_B: [f64; 2] = [0.106, 0.0234];
pub const REF_PHI: f64 = 0.809;
pub const REF_GEOMETRY_INTERVAL: (f64, f64) = (-1.3, 0.8);

/// Two-sided 95% critical values: interval, reference value, and the value
/// from the rectangular-embedding procedure for comparison.
pub const REF_TWO_SIDED: [(Interval, f64, f64); 4] = [
    (Interval::Unrestricted, 2.447, 2.447),
    (Interval::Bounded { a: -1.3, b: 2.0 }, 2.344, 2.445),
    (Interval::Bounded { a: -1.3, b: 0.8 }, 2.206, 2.274),
    (Interval::Bounded { a: -1.3, b: -0.2 }, 2.067, 2.170),
];

/// One-sided (upper) 95% critical values.
pub const REF_ONE_SIDED: [(Interval, f64); 3] = [
    (Interval::Bounded { a: -1.3, b: 2.0 }, 2.049),
    (Interval::Bounded { a: -1.3, b: 0.8 }, 1.899),
    (Interval::Bounded { a: -1.3, b: -0.2 }, 1.754),
];

pub const TOL_BETA: f64 = 1e-3;
pub const TOL_INFO_INV: f64 = 5e-4;
pub const TOL_GEOMETRY: f64 = 5e-3;
pub const TOL_CRITICAL: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub computed: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, computed: f64, reference: f64, tolerance: f64) -> Self {
        Self { name: name.into(), computed, reference, tolerance, pass: (computed - reference).abs() <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleReport {
    pub fit: ModelFit,
    pub phi: f64,
    pub u_a: [f64; 2],
    pub u_b: [f64; 2],
    pub checks: Vec<Check>,
    /// `(interval, computed w, embedding-procedure w)`.
    pub embedding_comparison: Vec<(String, f64, f64)>,
}

impl ExampleReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<34} {:>12} {:>10} {:>9}  status", "quantity", "computed", "reference", "tol");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<34} {:>12.6} {:>10} {:>9}  {}",
                c.name,
                c.computed,
                c.reference,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<20} {:>10} {:>12}", "interval", "w", "embedding");
        for (iv, w, emb) in &self.embedding_comparison {
            let _ = writeln!(s, "{iv:<20} {w:>10.4} {emb:>12.3}");
        }
        s
    }
}

/// Runs the full example on the bundled data.
pub fn lavelle_example() -> Result<ExampleReport> {
    let data = bundled_lavelle_dataset();
    let fit = fit(Link::Logit, &data, &FitConfig::default())?;
    let mut checks = vec![
        Check::new("beta0", fit.beta_hat.beta0, REF_BETA.0, TOL_BETA),
        Check::new("beta1", fit.beta_hat.beta1, REF_BETA.1, TOL_BETA),
    ];
    for (i, j) in [(0, 0), (0, 1), (1, 1)] {
        checks.push(Check::new(format!("F^-1[{i}][{j}]"), fit.info_inv.get(i, j), REF_INFO_INV[i][j], TOL_INFO_INV));
    }

    let (a, b) = REF_GEOMETRY_INTERVAL;
    let cone = fit_cone_angle(&fit, a, b)?;
    let u_a = cone.u_a.expect("bounded interval");
    let u_b = cone.u_b.expect("bounded interval");
    for k in 0..2 {
        checks.push(Check::new(format!("u_a[{k}]"), u_a[k], REF_U_A[k], TOL_GEOMETRY));
    }
    for k in 0..2 {
        checks.push(Check::new(format!("u_b[{k}]"), u_b[k], REF_U_B[k], TOL_GEOMETRY));
    }
    checks.push(Check::new("phi (-1.3, 0.8)", cone.phi, REF_PHI, TOL_GEOMETRY));

    let mut embedding_comparison = Vec::new();
    for (interval, reference, embedding) in REF_TWO_SIDED {
        let spec = BandSpec::new(interval, BandSide::TwoSided, 0.95, Link::Logit);
        let (_, cv) = band_critical(&fit, &spec)?;
        checks.push(Check::new(format!("two-sided w {interval}"), cv.w, reference, TOL_CRITICAL));
        embedding_comparison.push((interval.to_string(), cv.w, embedding));
    }
    for (interval, reference) in REF_ONE_SIDED {
        let spec = BandSpec::new(interval, BandSide::Upper, 0.95, Link::Logit);
        let (_, cv) = band_critical(&fit, &spec)?;
        checks.push(Check::new(format!("one-sided w {interval}"), cv.w, reference, TOL_CRITICAL));
    }

    Ok(ExampleReport { fit, phi: cone.phi, u_a, u_b, checks, embedding_comparison })
}
