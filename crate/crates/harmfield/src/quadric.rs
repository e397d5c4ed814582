//! Pseudo-Euclidean hyperquadrics.
//!
//! The pseudo-sphere `S^n_v(r)` is the level set `Q(x) = r^2` in `R^{n+1}`
//! with index-`v` inner product; the pseudo-hyperbolic space `H^n_v(r)` is
//! `Q(x) = -r^2` with index `v+1`.  Sectional curvature is `+1/r^2` and
//! `-1/r^2` respectively.  All field-theoretic machinery in this crate works
//! on the unit quadrics, where a point doubles as its own unit normal; radii
//! other than one are supported only by membership and curvature queries,
//! because the harmonicity theory is not scale-invariant.

use crate::error::{Error, Result};
use crate::pseudolin::{inner, pivoted_frame, AmbientVector, Frame, Matrix, Signature};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadricKind {
    Sphere,
    Hyperbolic,
}

/// A hyperquadric `S^n_v(r)` or `H^n_v(r)` together with its ambient space.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadric {
    n: usize,
    v: usize,
    r: f64,
    kind: QuadricKind,
}

/// Default membership tolerance for points produced by exact constructions.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

impl Quadric {
    pub fn new(kind: QuadricKind, n: usize, v: usize, r: f64) -> Self {
        assert!(n >= 2, "quadrics of dimension < 2 are out of scope");
        assert!(v <= n, "index exceeds dimension");
        assert!(r > 0.0, "radius must be positive");
        Quadric { n, v, r, kind }
    }

    /// Unit pseudo-sphere `S^n_v`.
    pub fn sphere(n: usize, v: usize) -> Self {
        Quadric::new(QuadricKind::Sphere, n, v, 1.0)
    }

    /// Unit pseudo-hyperbolic space `H^n_v`.
    pub fn hyperbolic(n: usize, v: usize) -> Self {
        Quadric::new(QuadricKind::Hyperbolic, n, v, 1.0)
    }

    pub fn kind(&self) -> QuadricKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn index(&self) -> usize {
        self.v
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn is_unit(&self) -> bool {
        self.r == 1.0
    }

    /// Curvature sign: `+1` for pseudo-spheres, `-1` for pseudo-hyperbolic spaces.
    pub fn epsilon(&self) -> f64 {
        match self.kind {
            QuadricKind::Sphere => 1.0,
            QuadricKind::Hyperbolic => -1.0,
        }
    }

    /// Sectional curvature `epsilon / r^2`.
    pub fn curvature(&self) -> f64 {
        self.epsilon() / (self.r * self.r)
    }

    /// Ambient signature: index `v` for spheres, `v + 1` for hyperbolic spaces.
    pub fn ambient_signature(&self) -> Signature {
        let index = match self.kind {
            QuadricKind::Sphere => self.v,
            QuadricKind::Hyperbolic => self.v + 1,
        };
        Signature::with_index(self.n + 1, index)
    }

    /// Signature of the tangent spaces: the ambient signature minus the
    /// normal direction (which carries indicator `epsilon`).
    pub fn tangent_signature(&self) -> Signature {
        let ambient = self.ambient_signature();
        let minus = ambient.index() - usize::from(self.epsilon() < 0.0);
        Signature::with_index(self.n, minus)
    }

    /// The quadratic form `Q(x) = <x,x>`.
    pub fn quadratic_form(&self, x: &AmbientVector) -> Result<f64> {
        inner(x, x, &self.ambient_signature())
    }

    /// Membership residual `|Q(x) - eps r^2|`.
    pub fn membership_residual(&self, x: &AmbientVector) -> Result<f64> {
        let q = self.quadratic_form(x)?;
        Ok((q - self.epsilon() * self.r * self.r).abs())
    }

    pub fn contains(&self, x: &AmbientVector, tol: f64) -> bool {
        match self.membership_residual(x) {
            Ok(res) => res <= tol,
            Err(_) => false,
        }
    }

    /// Wraps a point after checking membership.
    pub fn point(&self, coords: AmbientVector, tol: f64) -> Result<QuadricPoint> {
        let residual = self.membership_residual(&coords)?;
        if residual > tol {
            return Err(Error::NotOnQuadric { residual });
        }
        Ok(QuadricPoint {
            coords,
            quadric: self.clone(),
        })
    }

    /// The anti-isometric partner quadric (unit radius): `H^n_v <-> S^n_{n-v}`.
    pub fn anti_partner(&self) -> Quadric {
        match self.kind {
            QuadricKind::Hyperbolic => {
                Quadric::new(QuadricKind::Sphere, self.n, self.n - self.v, self.r)
            }
            QuadricKind::Sphere => {
                Quadric::new(QuadricKind::Hyperbolic, self.n, self.n - self.v, self.r)
            }
        }
    }

    /// True for the two-dimensional quadrics of neutral tangent signature.
    pub fn is_neutral_surface(&self) -> bool {
        self.n == 2 && self.is_unit() && self.tangent_signature().index() == 1
    }
}

/// A point of a quadric, validated on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadricPoint {
    coords: AmbientVector,
    quadric: Quadric,
}

impl QuadricPoint {
    pub fn coords(&self) -> &AmbientVector {
        &self.coords
    }

    pub fn quadric(&self) -> &Quadric {
        &self.quadric
    }
}

/// Orthogonal projection onto the tangent space at `x` of a unit quadric:
/// `w - eps <w,x> x`, using the point itself as unit normal.
pub fn tangent_project(x: &QuadricPoint, w: &AmbientVector) -> Result<AmbientVector> {
    let q = x.quadric();
    assert!(q.is_unit(), "tangent projection requires a unit quadric");
    let s = q.ambient_signature();
    let c = q.epsilon() * inner(w, x.coords(), &s)?;
    Ok(w.axpy(-c, x.coords()))
}

/// Pseudo-orthonormal tangent frame at `x`, obtained by pivoted Gram-Schmidt
/// on the projections of the ambient standard basis.  Appending `x` itself
/// (indicator `eps`) completes it to an ambient pseudo-orthonormal basis.
pub fn tangent_frame(x: &QuadricPoint) -> Result<Frame> {
    let q = x.quadric();
    assert!(q.is_unit(), "tangent frames require a unit quadric");
    let s = q.ambient_signature();
    let dim = q.dim() + 1;
    let mut candidates = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut e = AmbientVector::zero(dim);
        e.0[i] = 1.0;
        candidates.push(tangent_project(x, &e)?);
    }
    let (frame, rejected) = pivoted_frame(&candidates, &s)?;
    if frame.len() != q.dim() {
        // Cannot happen in exact arithmetic: the tangent space of a unit
        // quadric is non-degenerate.  Reaching this signals numerical trouble.
        return Err(Error::NullPivot {
            best: rejected,
            threshold: crate::pseudolin::NULL_PIVOT_TOL,
        });
    }
    Ok(frame)
}

/// The permutation `(x_1,..,x_{n+1}) -> (x_{n+1-v},..,x_{n+1},x_1,..,x_{n-v})`
/// realising the canonical anti-isometry of `H^n_v(r)` onto `S^n_{n-v}(r)`.
pub fn canonical_anti_isometry(n: usize, v: usize) -> Matrix {
    assert!(v <= n);
    let dim = n + 1;
    let mut p = Matrix::zeros(dim, dim);
    for i in 0..dim {
        // Output slot i takes input coordinate (n - v + i) mod (n + 1).
        let j = (n - v + i) % dim;
        p.set(i, j, 1.0);
    }
    p
}

/// Deterministic sampler scattering points over a quadric.
///
/// Ambient directions are drawn uniformly from the cube and scaled onto the
/// quadric; directions of the wrong sign or with quadratic form below a
/// rejection threshold are redrawn.  The threshold defaults to `0.05`, which
/// keeps samples well-conditioned (coordinates of order one) so that the
/// absolute residual tolerances of the verification suites are meaningful;
/// near-null directions with `|Q| < 1e-6` are rejected in any case.
pub struct PointSampler {
    quadric: Quadric,
    rng: SplitMix64,
    min_q: f64,
}

impl PointSampler {
    pub fn new(quadric: Quadric, seed: u64) -> Self {
        assert!(quadric.is_unit(), "sampling is defined on unit quadrics");
        PointSampler {
            quadric,
            rng: SplitMix64::new(seed),
            min_q: 0.05,
        }
    }

    /// Overrides the rejection threshold (floored at the hard `1e-6` cut).
    pub fn with_min_q(mut self, min_q: f64) -> Self {
        self.min_q = min_q.max(1e-6);
        self
    }

    pub fn next_point(&mut self) -> QuadricPoint {
        let dim = self.quadric.dim() + 1;
        let eps = self.quadric.epsilon();
        loop {
            let w = AmbientVector((0..dim).map(|_| self.rng.next_symmetric()).collect());
            let q = self.quadric.quadratic_form(&w).expect("dimension is fixed");
            if q.abs() < self.min_q || (q > 0.0) != (eps > 0.0) {
                continue;
            }
            let x = w.scale(1.0 / q.abs().sqrt());
            return self
                .quadric
                .point(x, MEMBERSHIP_TOL)
                .expect("scaled point lies on the quadric");
        }
    }

    /// A tangent vector at `x` with entries of order one; rejects directions
    /// that project almost to zero.
    pub fn next_tangent(&mut self, x: &QuadricPoint) -> AmbientVector {
        let dim = self.quadric.dim() + 1;
        loop {
            let w = AmbientVector((0..dim).map(|_| self.rng.next_symmetric()).collect());
            let t = tangent_project(x, &w).expect("dimensions agree");
            if t.max_abs() > 1e-3 {
                return t;
            }
        }
    }

    pub fn points(&mut self, count: usize) -> Vec<QuadricPoint> {
        (0..count).map(|_| self.next_point()).collect()
    }
}
