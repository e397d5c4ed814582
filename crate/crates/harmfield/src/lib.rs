//! Harmonic vector fields on pseudo-Riemannian hyperquadrics.
//!
//! A vector field on a pseudo-Riemannian manifold is *harmonic* when it is a
//! critical point of the vertical energy induced by some generalized
//! Cheeger-Gromoll metric `h_{p,q}` on the tangent bundle; equivalently, when
//! its Euler-Lagrange section `tau_{p,q}` vanishes identically.  This crate
//! implements that theory on the unit hyperquadrics of pseudo-Euclidean
//! space:
//!
//! - indefinite linear algebra and pseudo-orthonormal frames ([`pseudolin`]);
//! - hyperquadric geometry, tangent frames and the canonical anti-isometry
//!   ([`quadric`]);
//! - conformal gradient, Killing and polynomial vector fields with exact
//!   covariant calculus and the para-Kaehler twist ([`fields`]);
//! - the `h_{p,q}` family and its energy densities ([`cgmetric`]);
//! - the Euler-Lagrange engine, preharmonicity data, exact metric-parameter
//!   solving and a quadrature first-variation check ([`harmonic`]);
//! - the complete two-dimensional theory: fixed points, congruence normal
//!   forms, the harmonic Killing catalog and the twist correspondence
//!   ([`surfaces2d`]);
//! - a JSON-driven command line ([`cli`]).

// Index-based loops mirror the tensor formulas they implement and stay.
#![allow(clippy::needless_range_loop)]

pub mod cgmetric;
pub mod cli;
pub mod error;
pub mod fields;
pub mod harmonic;
pub mod poly;
pub mod pseudolin;
pub mod quadric;
pub mod rational;
pub mod rng;
pub mod surfaces2d;

pub use error::{Error, Result};
