//! Reduces the information geometry over a predictor interval to the single
//! angle the coverage probabilities depend on.
//!
//! With `F⁻¹ = B²` and `z = B⁻¹(β − β̂)`, the band over `(a, b)` covers iff
//! `z` lies in a region bounded by lines orthogonal to `u = B(1, x)′`. After a
//! rotation only the angle between `u_a` and `u_b` matters.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glm::{InfoMatrix, ModelFit};

/// Largest admissible condition number of `F⁻¹`.
pub const MAX_CONDITION: f64 = 1e12;

/// Symmetric positive semi-definite square root `B` of a 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SqrtMatrix(pub InfoMatrix);

impl SqrtMatrix {
    pub fn matrix(&self) -> &InfoMatrix {
        &self.0
    }

    /// `B·B`.
    pub fn square(&self) -> InfoMatrix {
        InfoMatrix(self.0.matmul(&self.0))
    }

    /// `B (1, x)′`.
    pub fn direction(&self, x: f64) -> [f64; 2] {
        self.0.mul_vec([1.0, x])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeAngle {
    /// Angle in radians between `u_a` and `u_b`.
    pub phi: f64,
    /// `B (1, a)′`; absent for the unrestricted case.
    pub u_a: Option<[f64; 2]>,
    /// `B (1, b)′`; absent for the unrestricted case.
    pub u_b: Option<[f64; 2]>,
}

/// Unique symmetric PSD square root via `B = (M + √det·I) / √(tr + 2√det)`.
pub fn sqrt_psd_2x2(m: &InfoMatrix) -> Result<SqrtMatrix> {
    if !m.is_symmetric() {
        return Err(Error::DegenerateGeometry("matrix is not symmetric".into()));
    }
    let (lo, _) = m.eigenvalues();
    if !lo.is_finite() {
        return Err(Error::DegenerateGeometry("matrix has non-finite entries".into()));
    }
    if lo < -1e-12 {
        return Err(Error::NotPsd { min_eigenvalue: lo });
    }
    let s = m.det().max(0.0).sqrt();
    let t = (m.trace() + 2.0 * s).sqrt();
    if t == 0.0 {
        return Ok(SqrtMatrix(InfoMatrix::symmetric(0.0, 0.0, 0.0)));
    }
    let b = InfoMatrix::symmetric((m.get(0, 0) + s) / t, m.get(0, 1) / t, (m.get(1, 1) + s) / t);
    Ok(SqrtMatrix(b))
}

/// Angle between `B(1, a)′` and `B(1, b)′`.
pub fn cone_angle(b: &SqrtMatrix, a: f64, b_end: f64) -> Result<ConeAngle> {
    if !(a.is_finite() && b_end.is_finite()) || a >= b_end {
        return Err(Error::InvalidInput(format!("interval ({a}, {b_end}) must be finite with a < b")));
    }
    let u_a = b.direction(a);
    let u_b = b.direction(b_end);
    let (na, nb) = (u_a[0].hypot(u_a[1]), u_b[0].hypot(u_b[1]));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "direction vector at x = {} has zero length",
            if na == 0.0 { a } else { b_end }
        )));
    }
    // atan2 of cross and dot is the arccos of the normalised dot product,
    // without the loss of precision near 0 and π.
    let dot = u_a[0] * u_b[0] + u_a[1] * u_b[1];
    let cross = u_a[0] * u_b[1] - u_a[1] * u_b[0];
    let phi = cross.abs().atan2(dot);
    Ok(ConeAngle { phi, u_a: Some(u_a), u_b: Some(u_b) })
}

/// The whole real line: `φ = π`.
pub fn unrestricted_angle() -> ConeAngle {
    ConeAngle { phi: PI, u_a: None, u_b: None }
}

/// Rejects covariance matrices too close to rank one for a meaningful band.
pub fn check_conditioning(cov: &InfoMatrix) -> Result<()> {
    let (lo, hi) = cov.eigenvalues();
    if !(lo > 0.0) || hi / lo > MAX_CONDITION {
        return Err(Error::DegenerateGeometry(format!(
            "covariance condition number {:e} exceeds {MAX_CONDITION:e}",
            hi / lo
        )));
    }
    Ok(())
}

/// Cone angle of a fitted model over `(a, b)`.
pub fn fit_cone_angle(fit: &ModelFit, a: f64, b: f64) -> Result<ConeAngle> {
    check_conditioning(&fit.info_inv)?;
    cone_angle(&sqrt_psd_2x2(&fit.info_inv)?, a, b)
}
