//! Complete two-dimensional theory on the six unit pseudo-Riemannian
//! quadrics.
//!
//! Every Killing field on a quadric surface is preharmonic: its linear
//! extension satisfies `A^3 = lambda A` with
//! `lambda = -e1 e2 a^2 - e1 e3 b^2 - e2 e3 c^2` read off the three matrix
//! entries.  The congruence class of a nonzero Killing field is determined
//! by `lambda`, harmonicity happens exactly at `lambda = eps` with metric
//! parameters `(3, -1/2)`, and on the index-1 hyperbolic surface the sign
//! of `lambda` also decides the fixed-point picture, worked out on a finite
//! cylinder model.  The para-Kaehler twist exchanges Killing and conformal
//! gradient fields on the two neutral surfaces.

use crate::error::{Error, Result};
use crate::fields::{j_twist, ConformalGradientField, KillingField, VectorField};
use crate::pseudolin::{AmbientVector, Matrix};
use crate::quadric::{Quadric, QuadricKind};

/// A Killing field on a unit quadric surface, stored by the three free
/// entries `(a, b, c)` of its linear extension
/// `[[0, a, b], [-e1 e2 a, 0, c], [-e1 e3 b, -e2 e3 c, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Killing2D {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    quadric: Quadric,
}

impl Killing2D {
    pub fn new(quadric: Quadric, a: f64, b: f64, c: f64) -> Self {
        assert!(
            quadric.dim() == 2 && quadric.is_unit(),
            "Killing2D lives on unit quadric surfaces"
        );
        Killing2D { a, b, c, quadric }
    }

    /// Reads `(a, b, c)` back off a full skew matrix.
    pub fn from_matrix(quadric: Quadric, m: &Matrix, tol: f64) -> Result<Self> {
        let field = KillingField::new(quadric.clone(), m.clone(), tol)?;
        let e = field.matrix().entries();
        Ok(Killing2D::new(
            quadric,
            e.get(0, 1),
            e.get(0, 2),
            e.get(1, 2),
        ))
    }

    pub fn quadric(&self) -> &Quadric {
        &self.quadric
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0.0 && self.b == 0.0 && self.c == 0.0
    }

    /// The full linear extension.
    pub fn matrix(&self) -> Matrix {
        let s = self.quadric.ambient_signature();
        let (e1, e2, e3) = (s.indicator(0), s.indicator(1), s.indicator(2));
        Matrix::from_rows(&[
            vec![0.0, self.a, self.b],
            vec![-e1 * e2 * self.a, 0.0, self.c],
            vec![-e1 * e3 * self.b, -e2 * e3 * self.c, 0.0],
        ])
    }

    pub fn to_field(&self) -> KillingField {
        KillingField::new(self.quadric.clone(), self.matrix(), 1e-12)
            .expect("entry pattern is skew by construction")
    }

    /// The eigenvalue in `A^3 = lambda A`.
    pub fn lambda(&self) -> f64 {
        lambda_2d(self)
    }

    /// Axis vector spanning `ker A`; its pseudo-length is `-e1 e2 e3 lambda`.
    pub fn axis(&self) -> AmbientVector {
        let s = self.quadric.ambient_signature();
        let (e1, e2) = (s.indicator(0), s.indicator(1));
        AmbientVector(vec![-e2 * self.c, e1 * self.b, -e1 * self.a])
    }
}

/// `lambda = -e1 e2 a^2 - e1 e3 b^2 - e2 e3 c^2` with the quadric's ambient
/// indicator symbols.
pub fn lambda_2d(k: &Killing2D) -> f64 {
    let s = k.quadric().ambient_signature();
    let (e1, e2, e3) = (s.indicator(0), s.indicator(1), s.indicator(2));
    -e1 * e2 * k.a * k.a - e1 * e3 * k.b * k.b - e2 * e3 * k.c * k.c
}

/// Builds a representative with the prescribed `lambda` on the quadric by
/// loading a single matrix slot whose indicator product matches the sign;
/// `None` when no slot has the right sign (definite ambient signatures
/// admit only one sign of `lambda`).
pub fn killing2d_with_lambda(quadric: &Quadric, lambda: f64) -> Option<Killing2D> {
    let s = quadric.ambient_signature();
    let (e1, e2, e3) = (s.indicator(0), s.indicator(1), s.indicator(2));
    let magnitude = lambda.abs().sqrt();
    let want = lambda.signum();
    if lambda == 0.0 {
        return None;
    }
    // Coefficients of a^2, b^2, c^2 in lambda; the a-slot is preferred and
    // the c-slot beats the b-slot, which reproduces the catalog
    // representatives used in the two-dimensional classification.
    let coeffs = [-e1 * e2, -e1 * e3, -e2 * e3];
    for slot in [0usize, 2, 1] {
        if coeffs[slot] == want {
            let mut abc = [0.0; 3];
            abc[slot] = magnitude;
            return Some(Killing2D::new(quadric.clone(), abc[0], abc[1], abc[2]));
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Cylinder model of the index-1 hyperbolic surface.
// ---------------------------------------------------------------------------

fn require_h21(quadric: &Quadric) -> Result<()> {
    if quadric.kind() == QuadricKind::Hyperbolic && quadric.index() == 1 && quadric.dim() == 2 {
        Ok(())
    } else {
        Err(Error::DegenerateTangent)
    }
}

/// Central projection onto the finite open cylinder
/// `C = {(x,y,z) : -1 < x < 1, y^2 + z^2 = 1}`.
pub fn cylinder_project(x: &AmbientVector) -> [f64; 3] {
    let scale = 1.0 / (1.0 + x[0] * x[0]).sqrt();
    [x[0] * scale, x[1] * scale, x[2] * scale]
}

/// Inverse of the cylinder projection, defined for `|x| < 1`.
pub fn cylinder_unproject(p: &[f64; 3]) -> AmbientVector {
    let scale = 1.0 / (1.0 - p[0] * p[0]).sqrt();
    AmbientVector(vec![p[0] * scale, p[1] * scale, p[2] * scale])
}

/// A Killing field pushed to the cylinder model; extends smoothly across
/// the boundary circles `x = +/-1`.
#[derive(Debug, Clone)]
pub struct CylinderField {
    a: f64,
    b: f64,
    c: f64,
}

impl CylinderField {
    pub fn eval(&self, p: &[f64; 3]) -> [f64; 3] {
        let (x, y, z) = (p[0], p[1], p[2]);
        let radial = self.a * y + self.b * z;
        [
            radial * (1.0 - x * x),
            radial * (-x * y) + self.a * x + self.c * z,
            radial * (-x * z) + self.b * x - self.c * y,
        ]
    }
}

/// Projects a Killing field on the index-1 hyperbolic surface to the
/// cylinder model.
pub fn project_field(k: &Killing2D) -> Result<CylinderField> {
    require_h21(k.quadric())?;
    Ok(CylinderField {
        a: k.a,
        b: k.b,
        c: k.c,
    })
}

/// Fixed-point classification of a Killing field on the index-1 hyperbolic
/// surface, decided by the sign of `lambda = a^2 + b^2 - c^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPointCategory {
    NoFixedPoints,
    /// Two ideal fixed points on the boundary circles of the cylinder model.
    TwoIdeal,
    /// Two genuine fixed points on the surface.
    TwoFixed,
}

#[derive(Debug, Clone)]
pub struct FixedPointReport {
    pub category: FixedPointCategory,
    /// Fixed points: on the quadric for `TwoFixed`, on the boundary of the
    /// cylinder model for `TwoIdeal`, empty otherwise.
    pub points: Vec<AmbientVector>,
}

/// Fixed points of a nonzero Killing field on the index-1 hyperbolic
/// surface: none for `lambda < 0`, two ideal points `+/-(1, b/c, -a/c)` on
/// the boundary circles for `lambda = 0`, two surface points
/// `+/-(c, b, -a)/sqrt(lambda)` for `lambda > 0`.
pub fn fixed_points(k: &Killing2D) -> Result<FixedPointReport> {
    require_h21(k.quadric())?;
    if k.is_zero() {
        return Err(Error::ZeroField);
    }
    let lambda = k.lambda();
    if lambda < 0.0 {
        Ok(FixedPointReport {
            category: FixedPointCategory::NoFixedPoints,
            points: vec![],
        })
    } else if lambda == 0.0 {
        let base = AmbientVector(vec![1.0, k.b / k.c, -k.a / k.c]);
        Ok(FixedPointReport {
            category: FixedPointCategory::TwoIdeal,
            points: vec![base.clone(), base.scale(-1.0)],
        })
    } else {
        let base = AmbientVector(vec![k.c, k.b, -k.a]).scale(1.0 / lambda.sqrt());
        Ok(FixedPointReport {
            category: FixedPointCategory::TwoFixed,
            points: vec![base.clone(), base.scale(-1.0)],
        })
    }
}

/// Zeros of the projected field on the closed cylinder, split into interior
/// zeros (which correspond one-to-one with fixed points on the surface) and
/// boundary zeros.  For `lambda = 0` the boundary zeros are the two ideal
/// fixed points; for `lambda > 0` the boundary equation
/// `a z - b y = -sign(x) c` has two extra solutions per circle that are
/// zeros of the compactified field only, not limits of surface fixed points.
#[derive(Debug, Clone, Default)]
pub struct CylinderZeros {
    pub interior: Vec<[f64; 3]>,
    pub boundary: Vec<[f64; 3]>,
}

/// Brute-force zero search of the projected field over a closed-cylinder
/// grid, with local shrinking-window refinement; used as the independent
/// oracle for [`fixed_points`].
pub fn cylinder_zero_search(
    k: &Killing2D,
    x_steps: usize,
    angle_steps: usize,
) -> Result<CylinderZeros> {
    let field = project_field(k)?;
    let value_sq = |x: f64, phi: f64| -> f64 {
        let p = [x, phi.cos(), phi.sin()];
        let v = field.eval(&p);
        v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
    };

    // Grid of |sigma|^2 including both boundary circles.
    let mut grid = vec![vec![0.0; angle_steps]; x_steps];
    for (i, row) in grid.iter_mut().enumerate() {
        let x = -1.0 + 2.0 * i as f64 / (x_steps - 1) as f64;
        for (j, cell) in row.iter_mut().enumerate() {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / angle_steps as f64;
            *cell = value_sq(x, phi);
        }
    }

    // Local minima (with angular wrap-around), refined by shrinking search.
    let mut zeros = CylinderZeros::default();
    for i in 0..x_steps {
        for j in 0..angle_steps {
            let here = grid[i][j];
            let mut minimal = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let ii = i as i64 + di;
                    if !(0..x_steps as i64).contains(&ii) {
                        continue;
                    }
                    let jj = (j as i64 + dj).rem_euclid(angle_steps as i64);
                    if grid[ii as usize][jj as usize] < here {
                        minimal = false;
                    }
                }
            }
            if !minimal {
                continue;
            }
            let mut x = -1.0 + 2.0 * i as f64 / (x_steps - 1) as f64;
            let mut phi = 2.0 * std::f64::consts::PI * j as f64 / angle_steps as f64;
            let mut dx = 2.0 / (x_steps - 1) as f64;
            let mut dphi = 2.0 * std::f64::consts::PI / angle_steps as f64;
            for _ in 0..70 {
                let mut best = (value_sq(x, phi), x, phi);
                for ii in -1i64..=1 {
                    for jj in -1i64..=1 {
                        let cx = (x + ii as f64 * dx).clamp(-1.0, 1.0);
                        let cphi = phi + jj as f64 * dphi;
                        let val = value_sq(cx, cphi);
                        if val < best.0 {
                            best = (val, cx, cphi);
                        }
                    }
                }
                x = best.1;
                phi = best.2;
                dx *= 0.6;
                dphi *= 0.6;
            }
            if value_sq(x, phi).sqrt() < 1e-8 {
                let candidate = [x, phi.cos(), phi.sin()];
                let bucket = if candidate[0].abs() > 1.0 - 1e-6 {
                    &mut zeros.boundary
                } else {
                    &mut zeros.interior
                };
                let duplicate = bucket.iter().any(|z| {
                    let d = (z[0] - candidate[0]).abs()
                        + (z[1] - candidate[1]).abs()
                        + (z[2] - candidate[2]).abs();
                    d < 1e-4
                });
                if !duplicate {
                    bucket.push(candidate);
                }
            }
        }
    }
    Ok(zeros)
}

// ---------------------------------------------------------------------------
// Congruence normal forms on the index-1 hyperbolic surface.
// ---------------------------------------------------------------------------

/// Result of the normal-form construction: `conjugator^{-1} . A . conjugator`
/// equals `normal` up to `residual`, and the conjugator is an ambient
/// isometry.
#[derive(Debug, Clone)]
pub struct NormalFormResult {
    pub normal: Matrix,
    pub conjugator: Matrix,
    pub residual: f64,
}

/// One-parameter boost flow with axis `(alpha, beta)` in the `(y,z)`-plane.
fn phi_flow(alpha: f64, beta: f64, ch: f64, sh: f64) -> Matrix {
    Matrix::from_rows(&[
        vec![ch, alpha * sh, beta * sh],
        vec![
            alpha * sh,
            beta * beta + alpha * alpha * ch,
            alpha * beta * (ch - 1.0),
        ],
        vec![
            beta * sh,
            alpha * beta * (ch - 1.0),
            alpha * alpha + beta * beta * ch,
        ],
    ])
}

/// Rotation of the negative-definite `(y,z)`-plane.
fn yz_rotation(theta: f64) -> Matrix {
    let (s, c) = theta.sin_cos();
    Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, c, -s], vec![0.0, s, c]])
}

fn conjugate(a: &Matrix, p: &Matrix) -> Matrix {
    p.inverse().expect("conjugator is invertible").mul(a).mul(p)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(
        (flo <= 0.0) != (f(hi) <= 0.0),
        "root not bracketed in bisection"
    );
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-15 {
            return mid;
        }
        let fmid = f(mid);
        if (fmid <= 0.0) == (flo <= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Congruence normal form of a nonzero Killing field on the index-1
/// hyperbolic surface, together with an ambient-isometry conjugator.
///
/// `lambda < 0` uses the boost flow through the axis orthogonal to `(a,b)`
/// with the parameter fixed by `cosh t0 = c / sqrt(-lambda)` (after a sign
/// flip making `c > 0`).  For `lambda = 0` and `lambda > 0` the analogous
/// reductions are a `(y,z)`-rotation with the angle solved from the matrix
/// entries, a sign flip, and an `(x,z)`-boost whose parameter is found by
/// bisection on one matrix entry.
pub fn normal_form(k: &Killing2D) -> Result<NormalFormResult> {
    require_h21(k.quadric())?;
    if k.is_zero() {
        return Err(Error::ZeroField);
    }
    let lambda = k.lambda();
    let a_mat = k.matrix();
    let flip = Matrix::diagonal(&[1.0, 1.0, -1.0]); // (a,b,c) -> (a,-b,-c)

    let (normal, conjugator) = if lambda < 0.0 {
        let c0 = (-lambda).sqrt();
        let normal =
            Matrix::from_rows(&[vec![0.0, 0.0, 0.0], vec![0.0, 0.0, c0], vec![0.0, -c0, 0.0]]);
        let planar = (k.a * k.a + k.b * k.b).sqrt();
        // lambda < 0 forces |c| > planar >= 0 in particular c != 0.
        let mut conj = Matrix::identity(3);
        let (b_cur, c_cur) = if k.c < 0.0 {
            conj = flip.clone();
            (-k.b, -k.c)
        } else {
            (k.b, k.c)
        };
        if planar > 0.0 {
            let alpha = b_cur / planar;
            let beta = -k.a / planar;
            let ch = c_cur / c0;
            let sh = planar / c0;
            conj = conj.mul(&phi_flow(alpha, beta, ch, sh));
        }
        (normal, conj)
    } else {
        // Rotate (a,b) onto the first slot: (a1, 0, c) with a1 > 0.
        let theta = k.b.atan2(k.a);
        let mut conj = yz_rotation(theta);
        let mut current = conjugate(&a_mat, &conj);
        if current.get(1, 2) < 0.0 {
            conj = conj.mul(&flip);
            current = conjugate(&a_mat, &conj);
        }
        let (a1, c1) = (current.get(0, 1), current.get(1, 2));
        if lambda == 0.0 {
            let normal = Matrix::from_rows(&[
                vec![0.0, 1.0, 0.0],
                vec![1.0, 0.0, 1.0],
                vec![0.0, -1.0, 0.0],
            ]);
            // Boost scales the nilpotent pair (a1, c1) = (a1, a1) by e^t;
            // solve entry (0,1) = 1 on the flow.
            let base = current.clone();
            let entry = |t: f64| {
                let boost = phi_flow(0.0, 1.0, t.cosh(), t.sinh());
                conjugate(&base, &boost).get(0, 1) - 1.0
            };
            let guess = -(a1.ln());
            let t0 = bisect(entry, guess - 1.0, guess + 1.0);
            let conj = conj.mul(&phi_flow(0.0, 1.0, t0.cosh(), t0.sinh()));
            (normal, conj)
        } else {
            let root = lambda.sqrt();
            let normal = Matrix::from_rows(&[
                vec![0.0, root, 0.0],
                vec![root, 0.0, 0.0],
                vec![0.0, 0.0, 0.0],
            ]);
            // Boost kills the c-entry; c(t) = a1 sinh t + c1 cosh t is
            // strictly monotone since |a1| > |c1| for lambda > 0.
            let base = current.clone();
            let entry = |t: f64| {
                let boost = phi_flow(0.0, 1.0, t.cosh(), t.sinh());
                conjugate(&base, &boost).get(1, 2)
            };
            let guess = -(c1 / a1).atanh();
            let t0 = bisect(entry, guess - 1.0, guess + 1.0);
            let mut conj = conj.mul(&phi_flow(0.0, 1.0, t0.cosh(), t0.sinh()));
            if conjugate(&a_mat, &conj).get(0, 1) < 0.0 {
                // Half-turn of the (y,z)-plane flips the sign of a.
                conj = conj.mul(&yz_rotation(std::f64::consts::PI));
            }
            (normal, conj)
        }
    };

    let residual = conjugate(&a_mat, &conjugator).sub(&normal).max_abs();
    Ok(NormalFormResult {
        normal,
        conjugator,
        residual,
    })
}

// ---------------------------------------------------------------------------
// Harmonic Killing catalog and congruence tests.
// ---------------------------------------------------------------------------

/// The unique (up to congruence) harmonic Killing field of a unit quadric
/// surface: the representative with `lambda = eps`, passing the harmonicity
/// verification at `(3, -1/2)`.  Absent exactly for the round sphere, where
/// every Killing field has `lambda < 0 < eps`.
pub fn harmonic_killing_catalog(quadric: &Quadric) -> Option<Killing2D> {
    assert!(quadric.dim() == 2 && quadric.is_unit());
    killing2d_with_lambda(quadric, quadric.epsilon())
}

/// Congruence test by the classifying invariant `lambda`.
pub fn killing_congruent(k1: &Killing2D, k2: &Killing2D, tol: f64) -> Result<bool> {
    if k1.quadric() != k2.quadric() {
        return Err(Error::DimensionMismatch {
            expected: k1.quadric().dim(),
            found: k2.quadric().dim(),
        });
    }
    if k1.is_zero() || k2.is_zero() {
        return Err(Error::ZeroField);
    }
    Ok((k1.lambda() - k2.lambda()).abs() <= tol)
}

/// Constructs an explicit conjugating isometry between two Killing fields
/// with the same nonzero `lambda` by aligning their kernel axes through
/// pseudo-orthonormal bases; returns the isometry `P` with
/// `P A_1 P^{-1} = A_2` and the achieved residual, or `None` when the
/// construction fails to conjugate (it cannot for null axes, `lambda = 0`).
pub fn align_congruence(k1: &Killing2D, k2: &Killing2D) -> Option<(Matrix, f64)> {
    let s = k1.quadric().ambient_signature();
    let f1 = crate::pseudolin::frame_through(&k1.axis(), &s).ok()?;
    let f2 = crate::pseudolin::frame_through(&k2.axis(), &s).ok()?;
    if f1.indicators != f2.indicators {
        return None;
    }
    let m1 = columns(&f1.vectors);
    let m2 = columns(&f2.vectors);
    let p = m2.mul(&m1.inverse().ok()?);
    let a2 = k2.matrix();
    let direct = p
        .mul(&k1.matrix())
        .mul(&p.inverse().ok()?)
        .sub(&a2)
        .max_abs();
    if direct < 1e-9 {
        return Some((p, direct));
    }
    // The axis map only fixes A up to sign; flip the non-axis plane.
    let reflect = m2
        .mul(&Matrix::diagonal(&[1.0, 1.0, -1.0]))
        .mul(&m2.inverse().ok()?);
    let p = reflect.mul(&p);
    let flipped = p
        .mul(&k1.matrix())
        .mul(&p.inverse().ok()?)
        .sub(&a2)
        .max_abs();
    if flipped < 1e-9 {
        Some((p, flipped))
    } else {
        None
    }
}

fn columns(vectors: &[AmbientVector]) -> Matrix {
    let dim = vectors[0].dim();
    let mut m = Matrix::zeros(dim, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        for i in 0..dim {
            m.set(i, j, v[i]);
        }
    }
    m
}

// ---------------------------------------------------------------------------
// Twist correspondence between Killing and conformal gradient fields.
// ---------------------------------------------------------------------------

/// Fits the twist of a conformal gradient field on a neutral surface as a
/// `Killing2D` from sampled values; the least-squares residual must stay
/// below `1e-10`, which guards the orientation calibration of the twist.
pub fn twist_cgf_to_killing(f: &ConformalGradientField) -> Result<Killing2D> {
    let quadric = f.quadric().clone();
    let twisted = j_twist(&VectorField::ConformalGradient(f.clone()))?;
    let s = quadric.ambient_signature();
    let (e1, e2, e3) = (s.indicator(0), s.indicator(1), s.indicator(2));
    let mut sampler = crate::quadric::PointSampler::new(quadric.clone(), 0x71157);
    // Normal equations for (a,b,c): value = a u + b v + c w with the three
    // pattern fields u, v, w below.
    let mut ata = Matrix::zeros(3, 3);
    let mut atb = [0.0; 3];
    let mut points = Vec::new();
    for _ in 0..8 {
        let x = sampler.next_point();
        let val = twisted.eval(&x);
        let (x1, x2, x3) = (x.coords()[0], x.coords()[1], x.coords()[2]);
        let u = [x2, -e1 * e2 * x1, 0.0];
        let v = [x3, 0.0, -e1 * e3 * x1];
        let w = [0.0, x3, -e2 * e3 * x2];
        let cols = [u, v, w];
        for r in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    ata.set(i, j, ata.get(i, j) + cols[i][r] * cols[j][r]);
                }
                atb[i] += cols[i][r] * val[r];
            }
        }
        points.push(x);
    }
    let inv = ata.inverse().map_err(|_| Error::DegenerateTangent)?;
    let mut abc = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            abc[i] += inv.get(i, j) * atb[j];
        }
    }
    let killing = Killing2D::new(quadric, abc[0], abc[1], abc[2]);
    let field = killing.to_field();
    for x in &points {
        let residual = field.eval(x).sub(&twisted.eval(x)).max_abs();
        if residual > 1e-10 {
            return Err(Error::NotTangent { residual });
        }
    }
    Ok(killing)
}

/// Fits the twist of a Killing field on a neutral surface as a conformal
/// gradient field (pole recovered by least squares over sampled values).
pub fn twist_killing_to_cgf(k: &Killing2D) -> Result<ConformalGradientField> {
    let quadric = k.quadric().clone();
    let twisted = j_twist(&VectorField::Killing(k.to_field()))?;
    let s = quadric.ambient_signature();
    let eps = quadric.epsilon();
    let mut sampler = crate::quadric::PointSampler::new(quadric.clone(), 0x3C4F);
    let mut ata = Matrix::zeros(3, 3);
    let mut atb = [0.0; 3];
    let mut points = Vec::new();
    for _ in 0..8 {
        let x = sampler.next_point();
        let val = twisted.eval(&x);
        // value_r = sum_j M_rj pole_j with M = I - eps x (Gx)^T.
        let mut m = Matrix::identity(3);
        for r in 0..3 {
            for j in 0..3 {
                m.set(
                    r,
                    j,
                    m.get(r, j) - eps * x.coords()[r] * s.indicator(j) * x.coords()[j],
                );
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                for r in 0..3 {
                    ata.set(i, j, ata.get(i, j) + m.get(r, i) * m.get(r, j));
                }
            }
            for r in 0..3 {
                atb[i] += m.get(r, i) * val[r];
            }
        }
        points.push(x);
    }
    let inv = ata.inverse().map_err(|_| Error::DegenerateTangent)?;
    let mut pole = vec![0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            pole[i] += inv.get(i, j) * atb[j];
        }
    }
    let cgf = ConformalGradientField::new(quadric, AmbientVector(pole))?;
    for x in &points {
        let residual = cgf.eval(x).sub(&twisted.eval(x)).max_abs();
        if residual > 1e-10 {
            return Err(Error::NotTangent { residual });
        }
    }
    Ok(cgf)
}
