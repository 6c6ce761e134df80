//! Exact asymptotic simultaneous confidence bands for logistic and probit
//! regression when the predictor is restricted to an interval.
//!
//! The pipeline is: fit the model ([`glm::fit`]), reduce the information
//! geometry over `(a, b)` to a single cone angle ([`geometry::cone_angle`]),
//! solve the coverage equation for the critical value
//! ([`critical::solve_critical`]) and evaluate the band ([`bands::build_band`]).
//! [`montecarlo`] checks small-sample coverage by simulation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bands;
pub mod cli;
pub mod critical;
pub mod data;
pub mod error;
pub mod geometry;
pub mod glm;
pub mod montecarlo;
pub mod quadrature;
pub mod report;
pub mod roots;
pub mod special;

pub use bands::{build_band, standard_error, BandCurve, BandSide, BandSpec, Interval};
pub use critical::{solve_critical, CoverageQuery, CriticalValue, Side};
pub use data::{bundled_lavelle_dataset, parse_dataset, Dataset, Observation, Schema};
pub use error::{Error, ErrorKind, Result};
pub use geometry::{cone_angle, sqrt_psd_2x2, unrestricted_angle, ConeAngle, SqrtMatrix};
pub use glm::{fisher_information, fit, response_prob, Coefficients, FitConfig, InfoMatrix, Link, ModelFit};
pub use montecarlo::{simulate_coverage, CoverageReport, SimConfig};
