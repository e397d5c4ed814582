//! The generalized Cheeger-Gromoll metric family `h_{p,q}` on the tangent
//! bundle of a pseudo-Riemannian quadric, and its energy densities.
//!
//! On the open set where `<e,e> != -1`, with `omega(e) = 1/|1 + <e,e>|`,
//!
//! ```text
//! h_{p,q}(A,B) = g(d_pi A, d_pi B)
//!              + omega^p(e) ( <KA, KB> + q <KA, e><e, KB> )
//! ```
//!
//! `h_{0,0}` is the Sasaki metric.  For `q != 0` the signature of `h_{p,q}`
//! varies across the bundle: it matches the Sasaki signature on one side of
//! the sphere bundle `<e,e> = -1/q`, degenerates mildly on it, and shifts
//! index by one on the other side.  The singular set `<e,e> = -1` is
//! irremovable for `p > 0` and surfaces here as the `Singular` error; the
//! Euler-Lagrange machinery in [`crate::harmonic`] is free of it.

use crate::error::{Error, Result};
use crate::fields::VectorField;
use crate::pseudolin::{inner, AmbientVector};
use crate::quadric::{tangent_frame, QuadricPoint};
use serde::{Deserialize, Serialize};

/// The pair `(p, q)` selecting a member of the metric family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    pub p: f64,
    pub q: f64,
}

impl MetricParams {
    pub fn new(p: f64, q: f64) -> Self {
        MetricParams { p, q }
    }

    /// Sasaki metric parameters.
    pub fn sasaki() -> Self {
        MetricParams { p: 0.0, q: 0.0 }
    }
}

/// Tolerance around the singular set `<e,e> = -1`.
pub const SINGULAR_TOL: f64 = 1e-12;

/// `omega(e) = 1 / |1 + <e,e>|` as a function of the fiber pseudo-length.
pub fn omega(e_len: f64) -> Result<f64> {
    let denom = 1.0 + e_len;
    if denom.abs() <= SINGULAR_TOL {
        return Err(Error::Singular { e_len });
    }
    Ok(1.0 / denom.abs())
}

/// A tangent vector to the total space at the fiber point `(base, fiber)`,
/// split into horizontal and vertical parts (both identified with tangent
/// vectors at the base point).
#[derive(Debug, Clone)]
pub struct TangentBundleVector {
    pub base: QuadricPoint,
    pub fiber: AmbientVector,
    pub horizontal: AmbientVector,
    pub vertical: AmbientVector,
}

/// `h_{p,q}(A, B)` for two tangent-bundle vectors at the same fiber point.
pub fn h_pq(params: MetricParams, a: &TangentBundleVector, b: &TangentBundleVector) -> Result<f64> {
    if a.base.coords().sub(b.base.coords()).max_abs() > 1e-12
        || a.fiber.sub(&b.fiber).max_abs() > 1e-12
    {
        return Err(Error::BundlePointMismatch);
    }
    let s = a.base.quadric().ambient_signature();
    let e_len = inner(&a.fiber, &a.fiber, &s)?;
    let w = omega(e_len)?.powf(params.p);
    let horizontal = inner(&a.horizontal, &b.horizontal, &s)?;
    let vv = inner(&a.vertical, &b.vertical, &s)?;
    let ve = inner(&a.vertical, &a.fiber, &s)?;
    let ev = inner(&a.fiber, &b.vertical, &s)?;
    Ok(horizontal + w * (vv + params.q * ve * ev))
}

/// Signature behaviour of `h_{p,q}` at a given fiber pseudo-length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignatureClass {
    /// Same signature as the Sasaki metric.
    SasakiLike,
    /// On the sphere bundle `<e,e> = -1/q`: mild degeneration.
    Degenerate,
    /// Index shifted by one relative to the Sasaki metric.
    IndexShifted,
}

/// Classifies the signature of `h_{p,q}` at fiber pseudo-length `e_len`.
pub fn signature_class(params: MetricParams, e_len: f64, tol: f64) -> Result<SignatureClass> {
    if (1.0 + e_len).abs() <= SINGULAR_TOL {
        return Err(Error::Singular { e_len });
    }
    if params.q == 0.0 {
        return Ok(SignatureClass::SasakiLike);
    }
    let threshold = -1.0 / params.q;
    if (e_len - threshold).abs() <= tol {
        return Ok(SignatureClass::Degenerate);
    }
    let sasaki_like = if params.q < 0.0 {
        e_len < threshold
    } else {
        e_len > threshold
    };
    Ok(if sasaki_like {
        SignatureClass::SasakiLike
    } else {
        SignatureClass::IndexShifted
    })
}

/// Vertical energy density
/// `e^v_{p,q} = omega^p(sigma) ( <nabla sigma, nabla sigma> + q g(grad F, grad F) ) / 2`,
/// with the first term traced over a tangent frame with indicator weights.
pub fn vertical_energy_density(
    field: &VectorField,
    x: &QuadricPoint,
    params: MetricParams,
) -> Result<f64> {
    let s = field.quadric().ambient_signature();
    let sigma = field.eval(x);
    let e_len = inner(&sigma, &sigma, &s)?;
    let w = omega(e_len)?.powf(params.p);
    let frame = tangent_frame(x)?;
    let mut grad_sigma_sq = 0.0;
    for (e, &ind) in frame.vectors.iter().zip(&frame.indicators) {
        let d = field.cov_deriv(x, e);
        grad_sigma_sq += f64::from(ind) * inner(&d, &d, &s)?;
    }
    let grad_f = field.grad_f(x);
    let grad_f_sq = inner(&grad_f, &grad_f, &s)?;
    Ok(0.5 * w * (grad_sigma_sq + params.q * grad_f_sq))
}

/// Total energy density `e_{p,q} = e^v_{p,q} + n/2`; the horizontal part is
/// the constant `n/2` because the projection is a pseudo-Riemannian
/// submersion.
pub fn energy_density(field: &VectorField, x: &QuadricPoint, params: MetricParams) -> Result<f64> {
    let n = field.quadric().dim() as f64;
    Ok(vertical_energy_density(field, x, params)? + 0.5 * n)
}

/// `|<nabla*nabla sigma, sigma> - <nabla sigma, nabla sigma> - Delta F|`,
/// all three pieces from the generic polynomial engine.
pub fn weitzenbock_residual(field: &VectorField, x: &QuadricPoint) -> Result<f64> {
    let s = field.quadric().ambient_signature();
    let poly = field.to_poly();
    let frame = tangent_frame(x)?;
    let rough = poly.rough_laplacian_with_frame(x, &frame);
    let sigma = poly.eval(x);
    let lhs = inner(&rough, &sigma, &s)?;
    let grad_sq = poly.grad_sigma_sq_with_frame(x, &frame);
    let delta_f = poly.laplacian_f_with_frame(x, &frame);
    Ok((lhs - grad_sq - delta_f).abs())
}
