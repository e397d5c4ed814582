//! Vector fields on unit hyperquadrics and their covariant calculus.
//!
//! Three representations are supported: conformal gradient fields (gradient
//! of the restriction of a linear ambient covector, determined by a pole
//! vector), Killing fields (restrictions of ambient skew-symmetric maps),
//! and generic tangent-valued polynomial fields.  The first two carry
//! closed-form covariant derivatives; the polynomial representation feeds a
//! generic engine based on the Gauss formula
//! `nabla_X sigma = proj_T (D_X sigma)` with exact polynomial derivatives,
//! so the closed forms can be checked against an independent route.
//!
//! Second covariant derivatives extend tangent vectors as projected
//! constants `E~(y) = e - eps <e,y> y`; the correction term
//! `nabla_{nabla_X E~_Y} sigma` is kept in the formula even though this
//! particular extension makes it vanish at the base point.

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::pseudolin::{
    inner, is_anti_isometry, is_isometry, skew_norm, AmbientVector, Frame, Matrix, SkewMatrix,
};
use crate::quadric::{tangent_frame, tangent_project, Quadric, QuadricPoint};
use crate::rng::SplitMix64;

/// Conformal gradient field `sigma = grad <x,a>` with pole vector `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalGradientField {
    pole: AmbientVector,
    mu: f64,
    quadric: Quadric,
}

impl ConformalGradientField {
    pub fn new(quadric: Quadric, pole: AmbientVector) -> Result<Self> {
        assert!(
            quadric.is_unit(),
            "conformal gradient fields live on unit quadrics"
        );
        let s = quadric.ambient_signature();
        let mu = inner(&pole, &pole, &s)?;
        Ok(ConformalGradientField { pole, mu, quadric })
    }

    pub fn pole(&self) -> &AmbientVector {
        &self.pole
    }

    /// Pseudo-length of the pole vector.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn quadric(&self) -> &Quadric {
        &self.quadric
    }

    /// The potential `alpha(x) = <x,a>`.
    pub fn alpha(&self, x: &QuadricPoint) -> f64 {
        inner(x.coords(), &self.pole, &self.quadric.ambient_signature()).expect("dimensions agree")
    }

    /// `sigma(x) = a - eps alpha(x) x`.
    pub fn eval(&self, x: &QuadricPoint) -> AmbientVector {
        let eps = self.quadric.epsilon();
        self.pole.axpy(-eps * self.alpha(x), x.coords())
    }

    /// `nabla_X sigma = -eps alpha X`.
    pub fn cov_deriv(&self, x: &QuadricPoint, dir: &AmbientVector) -> AmbientVector {
        dir.scale(-self.quadric.epsilon() * self.alpha(x))
    }

    /// `F = <sigma,sigma>/2 = (mu - eps alpha^2)/2`.
    pub fn f_at(&self, x: &QuadricPoint) -> f64 {
        let a = self.alpha(x);
        0.5 * (self.mu - self.quadric.epsilon() * a * a)
    }

    /// `grad F = -eps alpha sigma`.
    pub fn grad_f(&self, x: &QuadricPoint) -> AmbientVector {
        self.eval(x).scale(-self.quadric.epsilon() * self.alpha(x))
    }

    /// `Delta F = 2 eps F (1 + n) - eps n mu`.
    pub fn laplacian_f(&self, x: &QuadricPoint) -> f64 {
        let eps = self.quadric.epsilon();
        let n = self.quadric.dim() as f64;
        2.0 * eps * self.f_at(x) * (1.0 + n) - eps * n * self.mu
    }

    pub fn to_poly(&self) -> AmbientPolyField {
        let dim = self.quadric.dim() + 1;
        let s = self.quadric.ambient_signature();
        let eps = self.quadric.epsilon();
        // alpha(y) = sum_j eps_j a_j y_j
        let mut alpha = Poly::zero(dim);
        for j in 0..dim {
            alpha = alpha.add(&Poly::var(dim, j).scale(s.indicator(j) * self.pole[j]));
        }
        let components = (0..dim)
            .map(|i| {
                Poly::constant(dim, self.pole[i]).sub(&alpha.mul(&Poly::var(dim, i)).scale(eps))
            })
            .collect();
        AmbientPolyField::new(self.quadric.clone(), components)
            .expect("conformal gradient fields are tangent by construction")
    }
}

/// Killing field `sigma(x) = A x` for a skew-symmetric ambient map `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct KillingField {
    matrix: SkewMatrix,
    quadric: Quadric,
}

impl KillingField {
    pub fn new(quadric: Quadric, entries: Matrix, tol: f64) -> Result<Self> {
        assert!(quadric.is_unit(), "Killing fields live on unit quadrics");
        let matrix = SkewMatrix::new(entries, quadric.ambient_signature(), tol)?;
        Ok(KillingField { matrix, quadric })
    }

    pub fn from_skew(quadric: Quadric, matrix: SkewMatrix) -> Self {
        assert_eq!(matrix.signature(), &quadric.ambient_signature());
        KillingField { matrix, quadric }
    }

    pub fn matrix(&self) -> &SkewMatrix {
        &self.matrix
    }

    pub fn quadric(&self) -> &Quadric {
        &self.quadric
    }

    /// `<A,A>`, the pseudo-length of the linear extension.
    pub fn extension_norm(&self) -> f64 {
        skew_norm(&self.matrix)
    }

    pub fn eval(&self, x: &QuadricPoint) -> AmbientVector {
        self.matrix.apply(x.coords())
    }

    /// `nabla_X sigma = A(X) - eps <A(X), x> x`.
    pub fn cov_deriv(&self, x: &QuadricPoint, dir: &AmbientVector) -> AmbientVector {
        let ax = self.matrix.apply(dir);
        tangent_project(x, &ax).expect("dimensions agree")
    }

    pub fn f_at(&self, x: &QuadricPoint) -> f64 {
        let sigma = self.eval(x);
        0.5 * inner(&sigma, &sigma, &self.quadric.ambient_signature()).expect("dimensions agree")
    }

    /// `grad F = -A^2 x - 2 eps F x`.
    pub fn grad_f(&self, x: &QuadricPoint) -> AmbientVector {
        let eps = self.quadric.epsilon();
        let a2x = self.matrix.apply(&self.matrix.apply(x.coords()));
        a2x.scale(-1.0).axpy(-2.0 * eps * self.f_at(x), x.coords())
    }

    /// `Delta F = 2 eps (n+1) F - <A,A>`.
    pub fn laplacian_f(&self, x: &QuadricPoint) -> f64 {
        let eps = self.quadric.epsilon();
        let n = self.quadric.dim() as f64;
        2.0 * eps * (n + 1.0) * self.f_at(x) - self.extension_norm()
    }

    /// The Killing field with linear extension `A^3`.
    pub fn hat(&self) -> KillingField {
        KillingField {
            matrix: self.matrix.cube(),
            quadric: self.quadric.clone(),
        }
    }

    pub fn to_poly(&self) -> AmbientPolyField {
        let dim = self.quadric.dim() + 1;
        let components = (0..dim)
            .map(|i| {
                let mut p = Poly::zero(dim);
                for j in 0..dim {
                    let c = self.matrix.entries().get(i, j);
                    if c != 0.0 {
                        p = p.add(&Poly::var(dim, j).scale(c));
                    }
                }
                p
            })
            .collect();
        AmbientPolyField::new(self.quadric.clone(), components)
            .expect("Killing fields are tangent by construction")
    }
}

/// Tolerance for the tangency validation of polynomial fields, relative to
/// the field magnitude at each sample point.
const TANGENCY_TOL: f64 = 1e-8;

/// A tangent-valued vector field given by one polynomial per ambient
/// coordinate.  Jacobian, second partials and the (projected) gradient of
/// `F = <V,V>/2` are differentiated once at construction.
#[derive(Debug, Clone)]
pub struct AmbientPolyField {
    quadric: Quadric,
    components: Vec<Poly>,
    jacobian: Vec<Vec<Poly>>,
    second: Vec<Vec<Vec<Poly>>>,
    grad_f: Vec<Poly>,
    grad_f_jacobian: Vec<Vec<Poly>>,
}

impl AmbientPolyField {
    /// Validates tangency `<V(x), x> = 0` at seeded sample points.
    pub fn new(quadric: Quadric, components: Vec<Poly>) -> Result<Self> {
        assert!(quadric.is_unit(), "polynomial fields live on unit quadrics");
        let dim = quadric.dim() + 1;
        if components.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: components.len(),
            });
        }
        for c in &components {
            if c.n_vars() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.n_vars(),
                });
            }
        }
        let s = quadric.ambient_signature();
        let mut sampler = crate::quadric::PointSampler::new(quadric.clone(), 0xA11B);
        for _ in 0..32 {
            let x = sampler.next_point();
            let value = AmbientVector(components.iter().map(|p| p.eval(x.coords())).collect());
            let residual = inner(&value, x.coords(), &s)?.abs();
            if residual > TANGENCY_TOL * (1.0 + value.max_abs()) {
                return Err(Error::NotTangent { residual });
            }
        }
        Ok(Self::new_unchecked(quadric, components))
    }

    fn new_unchecked(quadric: Quadric, components: Vec<Poly>) -> Self {
        let dim = quadric.dim() + 1;
        let s = quadric.ambient_signature();
        let eps = quadric.epsilon();
        let jacobian: Vec<Vec<Poly>> = components
            .iter()
            .map(|p| (0..dim).map(|j| p.diff(j)).collect())
            .collect();
        let second: Vec<Vec<Vec<Poly>>> = jacobian
            .iter()
            .map(|row| {
                row.iter()
                    .map(|p| (0..dim).map(|k| p.diff(k)).collect())
                    .collect()
            })
            .collect();

        // F~ = <V,V>/2, ambient pseudo-gradient, tangential projection.
        let mut f_tilde = Poly::zero(dim);
        for (i, p) in components.iter().enumerate() {
            f_tilde = f_tilde.add(&p.mul(p).scale(0.5 * s.indicator(i)));
        }
        let ambient_grad: Vec<Poly> = (0..dim)
            .map(|i| f_tilde.diff(i).scale(s.indicator(i)))
            .collect();
        // <grad~ F, y> as a polynomial.
        let mut radial = Poly::zero(dim);
        for (i, g) in ambient_grad.iter().enumerate() {
            radial = radial.add(&g.mul(&Poly::var(dim, i)).scale(s.indicator(i)));
        }
        let grad_f: Vec<Poly> = (0..dim)
            .map(|i| ambient_grad[i].sub(&radial.mul(&Poly::var(dim, i)).scale(eps)))
            .collect();
        let grad_f_jacobian: Vec<Vec<Poly>> = grad_f
            .iter()
            .map(|p| (0..dim).map(|j| p.diff(j)).collect())
            .collect();

        AmbientPolyField {
            quadric,
            components,
            jacobian,
            second,
            grad_f,
            grad_f_jacobian,
        }
    }

    pub fn zero(quadric: Quadric) -> Self {
        let dim = quadric.dim() + 1;
        Self::new_unchecked(quadric, vec![Poly::zero(dim); dim])
    }

    pub fn quadric(&self) -> &Quadric {
        &self.quadric
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn eval(&self, x: &QuadricPoint) -> AmbientVector {
        self.eval_coords(x.coords())
    }

    pub fn eval_coords(&self, x: &AmbientVector) -> AmbientVector {
        AmbientVector(self.components.iter().map(|p| p.eval(x)).collect())
    }

    /// Ambient directional derivative `(DV)(x) dir`, no projection.
    pub fn directional_derivative(&self, x: &AmbientVector, dir: &AmbientVector) -> AmbientVector {
        let dim = self.components.len();
        let mut out = vec![0.0; dim];
        for i in 0..dim {
            let mut acc = 0.0;
            for j in 0..dim {
                if dir[j] != 0.0 {
                    acc += self.jacobian[i][j].eval(x) * dir[j];
                }
            }
            out[i] = acc;
        }
        AmbientVector(out)
    }

    fn hessian_contraction(
        &self,
        x: &AmbientVector,
        dir_a: &AmbientVector,
        dir_b: &AmbientVector,
    ) -> AmbientVector {
        let dim = self.components.len();
        let mut out = vec![0.0; dim];
        for i in 0..dim {
            let mut acc = 0.0;
            for j in 0..dim {
                if dir_b[j] == 0.0 {
                    continue;
                }
                for k in 0..dim {
                    if dir_a[k] != 0.0 {
                        acc += self.second[i][j][k].eval(x) * dir_b[j] * dir_a[k];
                    }
                }
            }
            out[i] = acc;
        }
        AmbientVector(out)
    }

    /// Gauss-formula covariant derivative `nabla_X sigma = proj_T(D_X V)`.
    pub fn cov_deriv(&self, x: &QuadricPoint, dir: &AmbientVector) -> AmbientVector {
        let d = self.directional_derivative(x.coords(), dir);
        tangent_project(x, &d).expect("dimensions agree")
    }

    /// Second covariant derivative with projected-constant extensions:
    /// `nabla^2_{X,Y} sigma = nabla_X(nabla_{E~_Y} sigma) - nabla_{nabla_X E~_Y} sigma`.
    pub fn second_cov_deriv(
        &self,
        x: &QuadricPoint,
        dir_x: &AmbientVector,
        dir_y: &AmbientVector,
    ) -> AmbientVector {
        let eps = self.quadric.epsilon();
        let s = self.quadric.ambient_signature();
        let pt = x.coords();

        // W(y) = proj_T(D V . E~_Y)(y); expand D_X W at x with u = DV(x) Y.
        let u = self.directional_derivative(pt, dir_y);
        let xy = inner(dir_x, dir_y, &s).expect("dimensions agree");
        let dv_x = self.directional_derivative(pt, pt); // DV(x) x, reused below
        let mut d_x_u = self.hessian_contraction(pt, dir_x, dir_y);
        d_x_u = d_x_u.axpy(-eps * xy, &dv_x);

        let du_x = inner(&d_x_u, pt, &s).expect("dimensions agree");
        let u_xdir = inner(&u, dir_x, &s).expect("dimensions agree");
        let u_pt = inner(&u, pt, &s).expect("dimensions agree");
        let mut d_x_w = d_x_u;
        d_x_w = d_x_w.axpy(-eps * (du_x + u_xdir), pt);
        d_x_w = d_x_w.axpy(-eps * u_pt, dir_x);
        let leading = tangent_project(x, &d_x_w).expect("dimensions agree");

        // Correction nabla_{nabla_X E~_Y} sigma; the projected-constant
        // extension makes nabla_X E~_Y = proj_T(-eps <X,Y> x), which is zero
        // up to rounding, but the term belongs to the formula.
        let correction_dir = tangent_project(x, &pt.scale(-eps * xy)).expect("dimensions agree");
        let correction = self.cov_deriv(x, &correction_dir);
        leading.sub(&correction)
    }

    /// Rough Laplacian `nabla*nabla sigma = -sum_i eps_i nabla^2_{E_i,E_i} sigma`.
    pub fn rough_laplacian_with_frame(&self, x: &QuadricPoint, frame: &Frame) -> AmbientVector {
        let dim = self.quadric.dim() + 1;
        let mut out = AmbientVector::zero(dim);
        for (e, &ind) in frame.vectors.iter().zip(&frame.indicators) {
            let dd = self.second_cov_deriv(x, e, e);
            out = out.axpy(-f64::from(ind), &dd);
        }
        out
    }

    pub fn rough_laplacian(&self, x: &QuadricPoint) -> Result<AmbientVector> {
        let frame = tangent_frame(x)?;
        Ok(self.rough_laplacian_with_frame(x, &frame))
    }

    pub fn f_at(&self, x: &QuadricPoint) -> f64 {
        let v = self.eval(x);
        0.5 * inner(&v, &v, &self.quadric.ambient_signature()).expect("dimensions agree")
    }

    /// Intrinsic gradient of `F` at `x` (tangential projection of the
    /// ambient pseudo-gradient, evaluated from the cached polynomials).
    pub fn grad_f(&self, x: &QuadricPoint) -> AmbientVector {
        AmbientVector(self.grad_f.iter().map(|p| p.eval(x.coords())).collect())
    }

    /// `Delta F = -div grad F`, traced over the given tangent frame.
    pub fn laplacian_f_with_frame(&self, x: &QuadricPoint, frame: &Frame) -> f64 {
        let s = self.quadric.ambient_signature();
        let dim = self.quadric.dim() + 1;
        let mut div = 0.0;
        for (e, &ind) in frame.vectors.iter().zip(&frame.indicators) {
            // <D(gradF)(x) e, e>; the tangential projection drops against e.
            let mut de = vec![0.0; dim];
            for i in 0..dim {
                let mut acc = 0.0;
                for j in 0..dim {
                    if e[j] != 0.0 {
                        acc += self.grad_f_jacobian[i][j].eval(x.coords()) * e[j];
                    }
                }
                de[i] = acc;
            }
            div += f64::from(ind) * inner(&AmbientVector(de), e, &s).expect("dimensions agree");
        }
        -div
    }

    pub fn laplacian_f(&self, x: &QuadricPoint) -> Result<f64> {
        let frame = tangent_frame(x)?;
        Ok(self.laplacian_f_with_frame(x, &frame))
    }

    /// `<nabla sigma, nabla sigma> = sum_i eps_i <nabla_{E_i} sigma, nabla_{E_i} sigma>`.
    pub fn grad_sigma_sq_with_frame(&self, x: &QuadricPoint, frame: &Frame) -> f64 {
        let s = self.quadric.ambient_signature();
        frame
            .vectors
            .iter()
            .zip(&frame.indicators)
            .map(|(e, &ind)| {
                let d = self.cov_deriv(x, e);
                f64::from(ind) * inner(&d, &d, &s).expect("dimensions agree")
            })
            .sum()
    }

    /// Push-forward `(phi.V)(x) = P V(P^{-1} x)` along a linear map.
    pub fn push_forward_poly(&self, p: &Matrix, target: Quadric) -> Result<AmbientPolyField> {
        let dim = self.quadric.dim() + 1;
        let p_inv = p.inverse()?;
        let rows: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| p_inv.get(i, j)).collect())
            .collect();
        let composed: Vec<Poly> = self
            .components
            .iter()
            .map(|c| c.compose_linear(&rows))
            .collect();
        let components: Vec<Poly> = (0..dim)
            .map(|i| {
                let mut acc = Poly::zero(dim);
                for (j, comp) in composed.iter().enumerate() {
                    let c = p.get(i, j);
                    if c != 0.0 {
                        acc = acc.add(&comp.scale(c));
                    }
                }
                acc
            })
            .collect();
        AmbientPolyField::new(target, components)
    }
}

/// The tagged union of supported field representations.
#[derive(Debug, Clone)]
pub enum VectorField {
    ConformalGradient(ConformalGradientField),
    Killing(KillingField),
    Polynomial(AmbientPolyField),
}

impl VectorField {
    pub fn quadric(&self) -> &Quadric {
        match self {
            VectorField::ConformalGradient(f) => f.quadric(),
            VectorField::Killing(f) => f.quadric(),
            VectorField::Polynomial(f) => f.quadric(),
        }
    }

    pub fn eval(&self, x: &QuadricPoint) -> AmbientVector {
        match self {
            VectorField::ConformalGradient(f) => f.eval(x),
            VectorField::Killing(f) => f.eval(x),
            VectorField::Polynomial(f) => f.eval(x),
        }
    }

    /// Covariant derivative along a tangent direction, by the closed form
    /// where one exists and the generic engine otherwise.
    pub fn cov_deriv(&self, x: &QuadricPoint, dir: &AmbientVector) -> AmbientVector {
        match self {
            VectorField::ConformalGradient(f) => f.cov_deriv(x, dir),
            VectorField::Killing(f) => f.cov_deriv(x, dir),
            VectorField::Polynomial(f) => f.cov_deriv(x, dir),
        }
    }

    pub fn f_at(&self, x: &QuadricPoint) -> f64 {
        match self {
            VectorField::ConformalGradient(f) => f.f_at(x),
            VectorField::Killing(f) => f.f_at(x),
            VectorField::Polynomial(f) => f.f_at(x),
        }
    }

    pub fn grad_f(&self, x: &QuadricPoint) -> AmbientVector {
        match self {
            VectorField::ConformalGradient(f) => f.grad_f(x),
            VectorField::Killing(f) => f.grad_f(x),
            VectorField::Polynomial(f) => f.grad_f(x),
        }
    }

    pub fn laplacian_f(&self, x: &QuadricPoint) -> Result<f64> {
        match self {
            VectorField::ConformalGradient(f) => Ok(f.laplacian_f(x)),
            VectorField::Killing(f) => Ok(f.laplacian_f(x)),
            VectorField::Polynomial(f) => f.laplacian_f(x),
        }
    }

    pub fn to_poly(&self) -> AmbientPolyField {
        match self {
            VectorField::ConformalGradient(f) => f.to_poly(),
            VectorField::Killing(f) => f.to_poly(),
            VectorField::Polynomial(f) => f.clone(),
        }
    }

    /// Push-forward `(phi.sigma)(x) = d phi(sigma(phi^{-1}(x)))` along an
    /// ambient linear map that carries the field's quadric onto a unit
    /// quadric (itself for isometries, the anti-isometric partner
    /// otherwise).  Conformal gradient fields stay conformal gradient
    /// fields with pole `P a`; Killing fields stay Killing with extension
    /// `P A P^{-1}`.
    ///
    /// A map can qualify for both readings at once (the identity is an
    /// isometry of a definite quadric *and* the canonical anti-isometry
    /// onto its opposite-definite partner); this method prefers the
    /// isometric reading, use [`VectorField::push_forward_to`] to name the
    /// target explicitly.
    pub fn push_forward(&self, p: &Matrix) -> Result<VectorField> {
        let source = self.quadric().clone();
        let s_dom = source.ambient_signature();
        let target = if is_isometry(p, &s_dom, &s_dom, 1e-9) {
            source.clone()
        } else {
            source.anti_partner()
        };
        self.push_forward_to(p, &target)
    }

    /// Push-forward onto an explicitly named unit quadric; `p` must be an
    /// isometry or anti-isometry from the field's ambient form to the
    /// target's.
    pub fn push_forward_to(&self, p: &Matrix, target: &Quadric) -> Result<VectorField> {
        let source = self.quadric().clone();
        let s_dom = source.ambient_signature();
        let s_cod = target.ambient_signature();
        let compatible =
            is_isometry(p, &s_dom, &s_cod, 1e-9) || is_anti_isometry(p, &s_dom, &s_cod, 1e-9);
        if !compatible {
            // Not a +/- isometry; such a P cannot map the quadric onto the
            // requested unit quadric.
            let residual = {
                let mut sampler = crate::quadric::PointSampler::new(source.clone(), 0xFADE);
                let x = sampler.next_point();
                let y = p.mul_vec(x.coords());
                target.membership_residual(&y).unwrap_or(f64::INFINITY)
            };
            return Err(Error::QuadricMapMismatch { residual });
        }
        let target = target.clone();
        match self {
            VectorField::ConformalGradient(f) => {
                let pole = p.mul_vec(f.pole());
                Ok(VectorField::ConformalGradient(ConformalGradientField::new(
                    target, pole,
                )?))
            }
            VectorField::Killing(f) => {
                let p_inv = p.inverse()?;
                let entries = p.mul(f.matrix().entries()).mul(&p_inv);
                Ok(VectorField::Killing(KillingField::new(
                    target, entries, 1e-8,
                )?))
            }
            VectorField::Polynomial(f) => {
                Ok(VectorField::Polynomial(f.push_forward_poly(p, target)?))
            }
        }
    }
}

/// Orientation calibration for the para-Kaehler structure of the two
/// neutral surfaces.  The sign is pinned by the requirement that the twist
/// of the conformal gradient field with pole `(0,0,1)` on the index-1
/// hyperbolic surface is the field `(x,y,z) -> (y,x,0)`, and on the index-1
/// sphere by para-holomorphy of the canonical anti-isometry between them.
fn orientation_sign(q: &Quadric) -> Result<f64> {
    if !q.is_neutral_surface() {
        return Err(Error::DegenerateTangent);
    }
    Ok(match q.kind() {
        crate::quadric::QuadricKind::Hyperbolic => 1.0,
        crate::quadric::QuadricKind::Sphere => -1.0,
    })
}

/// Pointwise para-Kaehler operator on a neutral surface: `J A = A` and
/// `J B = -B` on the two null tangent directions, labelled so that `(A, B)`
/// is positively oriented with `A + B` space-like.
#[derive(Debug, Clone)]
pub struct ParaKahlerOperator {
    base: QuadricPoint,
    null_plus: AmbientVector,
    null_minus: AmbientVector,
}

impl ParaKahlerOperator {
    pub fn base(&self) -> &QuadricPoint {
        &self.base
    }

    /// The `+1` eigendirection `A` and `-1` eigendirection `B`.
    pub fn eigendirections(&self) -> (&AmbientVector, &AmbientVector) {
        (&self.null_plus, &self.null_minus)
    }

    pub fn apply(&self, dir: &AmbientVector) -> AmbientVector {
        let s = self.base.quadric().ambient_signature();
        // <A,B> = 2 for the normalised null pair built below.
        let ca = inner(dir, &self.null_minus, &s).expect("dimensions agree") / 2.0;
        let cb = inner(dir, &self.null_plus, &s).expect("dimensions agree") / 2.0;
        self.null_plus.scale(ca).axpy(-cb, &self.null_minus)
    }
}

/// Constructs the para-Kaehler operator at a point of a neutral surface by
/// solving for the null tangent directions and orienting them.
pub fn para_kahler_j(x: &QuadricPoint) -> Result<ParaKahlerOperator> {
    let q = x.quadric();
    let or_sign = orientation_sign(q)?;
    let frame = tangent_frame(x)?;
    if frame.indicators != vec![1, -1] {
        return Err(Error::DegenerateTangent);
    }
    let e1 = &frame.vectors[0];
    let e2 = &frame.vectors[1];
    // Null directions; <A,B> = <E1+E2, E1-E2> = 2 and A + B = 2 E1 is
    // space-like for either labelling below.
    let cand_a = e1.add(e2);
    let cand_b = e1.sub(e2);
    let det = Matrix::from_rows(&[x.coords().0.clone(), cand_a.0.clone(), cand_b.0.clone()]).det();
    let (null_plus, null_minus) = if or_sign * det > 0.0 {
        (cand_a, cand_b)
    } else {
        (cand_b, cand_a)
    };
    Ok(ParaKahlerOperator {
        base: x.clone(),
        null_plus,
        null_minus,
    })
}

/// Sign relating the pointwise operator to the ambient cross-product form
/// `J X = sign . (x x X)` with indicator-reweighted components.
fn cross_sign(q: &Quadric) -> Result<f64> {
    if !q.is_neutral_surface() {
        return Err(Error::DegenerateTangent);
    }
    Ok(match q.kind() {
        crate::quadric::QuadricKind::Hyperbolic => 1.0,
        crate::quadric::QuadricKind::Sphere => -1.0,
    })
}

/// Applies the para-Kaehler twist to a whole field, returning a polynomial
/// field.  On a neutral surface the operator coincides with the
/// indicator-reweighted cross product with the position vector, which keeps
/// polynomial fields polynomial; agreement with the pointwise construction
/// is covered by tests.
pub fn j_twist(field: &VectorField) -> Result<VectorField> {
    let q = field.quadric().clone();
    let sign = cross_sign(&q)?;
    let s = q.ambient_signature();
    let poly = field.to_poly();
    let v = poly.components();
    let dim = 3;
    let x = |i: usize| Poly::var(dim, i);
    // Euclidean cross product of the position vector with V, reweighted by
    // the indicator symbols.
    let cross = [
        x(1).mul(&v[2]).sub(&x(2).mul(&v[1])),
        x(2).mul(&v[0]).sub(&x(0).mul(&v[2])),
        x(0).mul(&v[1]).sub(&x(1).mul(&v[0])),
    ];
    let components: Vec<Poly> = (0..dim)
        .map(|i| cross[i].scale(sign * s.indicator(i)))
        .collect();
    Ok(VectorField::Polynomial(AmbientPolyField::new(
        q, components,
    )?))
}

/// Fits the closed-conformal factor `psi` with `nabla_X sigma = psi X` at
/// the sample points; the verdict is negative as soon as one point deviates.
pub fn is_closed_conformal(
    field: &VectorField,
    points: &[QuadricPoint],
    tol: f64,
) -> Result<(bool, Vec<f64>)> {
    let n = field.quadric().dim() as f64;
    let s = field.quadric().ambient_signature();
    let mut psis = Vec::with_capacity(points.len());
    let mut ok = true;
    for x in points {
        let frame = tangent_frame(x)?;
        // n psi = div sigma.
        let mut div = 0.0;
        for (e, &ind) in frame.vectors.iter().zip(&frame.indicators) {
            div += f64::from(ind) * inner(&field.cov_deriv(x, e), e, &s).expect("dimensions agree");
        }
        let psi = div / n;
        psis.push(psi);
        for e in &frame.vectors {
            let d = field.cov_deriv(x, e);
            if d.sub(&e.scale(psi)).max_abs() > tol {
                ok = false;
            }
        }
    }
    Ok((ok, psis))
}

/// Killing test: the symmetrised covariant derivative vanishes on all frame
/// pairs at every sample point.
pub fn is_killing(field: &VectorField, points: &[QuadricPoint], tol: f64) -> Result<bool> {
    let s = field.quadric().ambient_signature();
    for x in points {
        let frame = tangent_frame(x)?;
        let derivs: Vec<AmbientVector> = frame
            .vectors
            .iter()
            .map(|e| field.cov_deriv(x, e))
            .collect();
        for i in 0..frame.len() {
            for j in 0..frame.len() {
                let lhs = inner(&derivs[i], &frame.vectors[j], &s).expect("dimensions agree")
                    + inner(&frame.vectors[i], &derivs[j], &s).expect("dimensions agree");
                if lhs.abs() > tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Builds a random tangent-valued polynomial field of ambient degree <= 2
/// by tangentially projecting a random polynomial map.
pub fn random_tangent_poly_field(quadric: &Quadric, seed: u64) -> AmbientPolyField {
    let dim = quadric.dim() + 1;
    let s = quadric.ambient_signature();
    let eps = quadric.epsilon();
    let mut rng = SplitMix64::new(seed);
    let mut raw: Vec<Poly> = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut p = Poly::constant(dim, rng.next_symmetric());
        for j in 0..dim {
            p = p.add(&Poly::var(dim, j).scale(rng.next_symmetric()));
            for k in j..dim {
                let quad = Poly::var(dim, j).mul(&Poly::var(dim, k));
                p = p.add(&quad.scale(0.5 * rng.next_symmetric()));
            }
        }
        raw.push(p);
    }
    // V = W - eps <W,y> y is tangent on the quadric.
    let mut radial = Poly::zero(dim);
    for (i, w) in raw.iter().enumerate() {
        radial = radial.add(&w.mul(&Poly::var(dim, i)).scale(s.indicator(i)));
    }
    let components: Vec<Poly> = (0..dim)
        .map(|i| raw[i].sub(&radial.mul(&Poly::var(dim, i)).scale(eps)))
        .collect();
    AmbientPolyField::new(quadric.clone(), components).expect("projection makes the field tangent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadric::PointSampler;

    fn h21() -> Quadric {
        Quadric::hyperbolic(2, 1)
    }

    fn v(c: &[f64]) -> AmbientVector {
        AmbientVector(c.to_vec())
    }

    fn h21_killing_c() -> KillingField {
        // (a,b,c) = (0,0,1) pattern on the index-1 hyperbolic surface.
        KillingField::new(
            h21(),
            Matrix::from_rows(&[
                vec![0.0, 0.0, 0.0],
                vec![0.0, 0.0, 1.0],
                vec![0.0, -1.0, 0.0],
            ]),
            1e-12,
        )
        .unwrap()
    }

    #[test]
    fn cgf_eval_hand_examples() {
        let f = ConformalGradientField::new(h21(), v(&[0.0, 0.0, 1.0])).unwrap();
        assert_eq!(f.mu(), -1.0);
        let zero_pt = h21().point(v(&[0.0, 0.0, 1.0]), 1e-12).unwrap();
        assert!(f.eval(&zero_pt).max_abs() < 1e-15);
        let x = h21().point(v(&[1.0, 1.0, 1.0]), 1e-12).unwrap();
        assert_eq!(f.eval(&x).0, vec![-1.0, -1.0, 0.0]);
        // Zero pole gives the zero field everywhere.
        let z = ConformalGradientField::new(h21(), v(&[0.0, 0.0, 0.0])).unwrap();
        assert!(z.eval(&x).max_abs() == 0.0);
    }

    #[test]
    fn cgf_cov_deriv_hand_example() {
        let f = ConformalGradientField::new(h21(), v(&[0.0, 0.0, 1.0])).unwrap();
        let x = h21().point(v(&[1.0, 1.0, 1.0]), 1e-12).unwrap();
        let dir = v(&[-1.0, -1.0, 0.0]);
        assert_eq!(f.cov_deriv(&x, &dir).0, vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn cgf_length_identity() {
        // <sigma,sigma> = mu - eps alpha^2 at sampled points.
        for q in [Quadric::sphere(3, 1), Quadric::hyperbolic(2, 1)] {
            let s = q.ambient_signature();
            let f = ConformalGradientField::new(q.clone(), v_dim(&q, 0.3)).unwrap();
            let mut sampler = PointSampler::new(q.clone(), 5);
            for _ in 0..40 {
                let x = sampler.next_point();
                let sigma = f.eval(&x);
                let lhs = inner(&sigma, &sigma, &s).unwrap();
                let a = f.alpha(&x);
                assert!((lhs - (f.mu() - q.epsilon() * a * a)).abs() < 1e-12);
            }
        }
    }

    fn v_dim(q: &Quadric, fill: f64) -> AmbientVector {
        let dim = q.dim() + 1;
        AmbientVector((0..dim).map(|i| fill + 0.2 * i as f64).collect())
    }

    #[test]
    fn killing_eval_and_cov_deriv_examples() {
        let k = h21_killing_c();
        let x = h21().point(v(&[1.0, 1.0, 1.0]), 1e-12).unwrap();
        assert_eq!(k.eval(&x).0, vec![0.0, 1.0, -1.0]);
        let dir = v(&[-1.0, -1.0, 0.0]);
        assert_eq!(k.cov_deriv(&x, &dir).0, vec![-1.0, -1.0, 0.0]);
        // Tangency of the values is forced by skewness.
        let s = h21().ambient_signature();
        let mut sampler = PointSampler::new(h21(), 31);
        for _ in 0..100 {
            let p = sampler.next_point();
            let val = k.eval(&p);
            assert!(inner(&val, p.coords(), &s).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn killing_identity_for_cov_deriv() {
        let k = h21_killing_c();
        let s = h21().ambient_signature();
        let mut sampler = PointSampler::new(h21(), 77);
        for _ in 0..40 {
            let x = sampler.next_point();
            let a = sampler.next_tangent(&x);
            let b = sampler.next_tangent(&x);
            let lhs = inner(&k.cov_deriv(&x, &a), &b, &s).unwrap()
                + inner(&a, &k.cov_deriv(&x, &b), &s).unwrap();
            assert!(lhs.abs() < 1e-10);
        }
    }

    #[test]
    fn hat_field_is_cube() {
        let k = h21_killing_c();
        let hat = k.hat();
        let expected = k.matrix().entries().scale(-1.0);
        assert!(hat.matrix().entries().sub(&expected).max_abs() < 1e-15);
        let z = KillingField::new(h21(), Matrix::zeros(3, 3), 0.0).unwrap();
        assert!(z.hat().matrix().entries().max_abs() == 0.0);
    }

    #[test]
    fn generic_cov_deriv_matches_closed_forms() {
        let quadrics = [
            Quadric::sphere(2, 0),
            Quadric::sphere(2, 1),
            Quadric::hyperbolic(2, 1),
            Quadric::sphere(3, 1),
            Quadric::hyperbolic(3, 1),
        ];
        for (qi, q) in quadrics.iter().enumerate() {
            let seed = 1000 + qi as u64;
            let mut rng = SplitMix64::new(seed);
            let pole = AmbientVector((0..q.dim() + 1).map(|_| rng.next_symmetric()).collect());
            let cgf = ConformalGradientField::new(q.clone(), pole).unwrap();
            let cgf_poly = cgf.to_poly();
            let kf = KillingField::from_skew(
                q.clone(),
                crate::pseudolin::random_skew(&q.ambient_signature(), 1.0, &mut rng),
            );
            let kf_poly = kf.to_poly();
            let mut sampler = PointSampler::new(q.clone(), seed);
            for _ in 0..50 {
                let x = sampler.next_point();
                let dir = sampler.next_tangent(&x);
                let d1 = cgf.cov_deriv(&x, &dir);
                let d2 = cgf_poly.cov_deriv(&x, &dir);
                assert!(d1.sub(&d2).max_abs() < 1e-10);
                let d1 = kf.cov_deriv(&x, &dir);
                let d2 = kf_poly.cov_deriv(&x, &dir);
                assert!(d1.sub(&d2).max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rough_laplacian_eigenvalues() {
        // cgf: nabla*nabla sigma = eps sigma; Killing: eps (n-1) sigma.
        for q in [
            Quadric::sphere(2, 1),
            Quadric::hyperbolic(2, 1),
            Quadric::sphere(3, 1),
            Quadric::hyperbolic(3, 2),
        ] {
            let mut rng = SplitMix64::new(9 + q.dim() as u64);
            let pole = AmbientVector((0..q.dim() + 1).map(|_| rng.next_symmetric()).collect());
            let cgf = ConformalGradientField::new(q.clone(), pole)
                .unwrap()
                .to_poly();
            let kf = KillingField::from_skew(
                q.clone(),
                crate::pseudolin::random_skew(&q.ambient_signature(), 1.0, &mut rng),
            );
            let kf_poly = kf.to_poly();
            let eps = q.epsilon();
            let n = q.dim() as f64;
            let mut sampler = PointSampler::new(q.clone(), 314);
            for _ in 0..25 {
                let x = sampler.next_point();
                let lap = cgf.rough_laplacian(&x).unwrap();
                let expected = cgf.eval(&x).scale(eps);
                assert!(lap.sub(&expected).max_abs() < 1e-8);
                let lap = kf_poly.rough_laplacian(&x).unwrap();
                let expected = kf.eval(&x).scale(eps * (n - 1.0));
                assert!(lap.sub(&expected).max_abs() < 1e-8);
            }
        }
    }

    #[test]
    fn grad_f_and_laplacian_f_agree_between_paths() {
        let q = h21();
        let k = h21_killing_c();
        let k_poly = k.to_poly();
        let f = ConformalGradientField::new(q.clone(), v(&[0.4, 0.2, 1.1])).unwrap();
        let f_poly = f.to_poly();
        let mut sampler = PointSampler::new(q.clone(), 12);
        for _ in 0..40 {
            let x = sampler.next_point();
            assert!(k.grad_f(&x).sub(&k_poly.grad_f(&x)).max_abs() < 1e-10);
            assert!(f.grad_f(&x).sub(&f_poly.grad_f(&x)).max_abs() < 1e-10);
            assert!((k.laplacian_f(&x) - k_poly.laplacian_f(&x).unwrap()).abs() < 1e-9);
            assert!((f.laplacian_f(&x) - f_poly.laplacian_f(&x).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn laplacian_f_hand_values() {
        let k = h21_killing_c();
        let x = h21().point(v(&[1.0, 1.0, 1.0]), 1e-12).unwrap();
        assert_eq!(k.f_at(&x), -1.0);
        assert_eq!(k.extension_norm(), 2.0);
        assert_eq!(k.laplacian_f(&x), 4.0);
        // cgf with alpha(x) = 0 has vanishing grad F.
        let f = ConformalGradientField::new(h21(), v(&[0.0, 0.0, 1.0])).unwrap();
        let y = h21().point(v(&[0.0, 1.0, 0.0]), 1e-12).unwrap();
        assert_eq!(f.alpha(&y), 0.0);
        assert!(f.grad_f(&y).max_abs() < 1e-15);
    }

    #[test]
    fn hat_field_identity_holds_pointwise() {
        // nabla_{grad F} sigma + sigma_hat + 2 eps F sigma = 0.
        for q in [h21(), Quadric::sphere(2, 2), Quadric::sphere(3, 1)] {
            let mut rng = SplitMix64::new(55);
            let k = KillingField::from_skew(
                q.clone(),
                crate::pseudolin::random_skew(&q.ambient_signature(), 1.0, &mut rng),
            );
            let hat = k.hat();
            let eps = q.epsilon();
            let mut sampler = PointSampler::new(q.clone(), 60);
            for _ in 0..30 {
                let x = sampler.next_point();
                let lhs = k
                    .cov_deriv(&x, &k.grad_f(&x))
                    .add(&hat.eval(&x))
                    .axpy(2.0 * eps * k.f_at(&x), &k.eval(&x));
                assert!(lhs.max_abs() < 1e-8);
            }
        }
    }

    #[test]
    fn cgf_values_never_null_without_vanishing() {
        let q = Quadric::sphere(3, 1);
        let s = q.ambient_signature();
        let f = ConformalGradientField::new(q.clone(), v(&[1.2, 0.0, 0.0, 0.5])).unwrap();
        // eps mu > 0 here, so the only null values are the zeros at
        // x = +/- a / sqrt(mu), where sigma vanishes identically.
        let mu = f.mu();
        assert!(mu > 0.0);
        for sign in [1.0, -1.0] {
            let x0 = q.point(f.pole().scale(sign / mu.sqrt()), 1e-12).unwrap();
            assert!(f.eval(&x0).max_abs() < 1e-12);
        }
        let mut sampler = PointSampler::new(q.clone(), 21);
        for _ in 0..200 {
            let x = sampler.next_point();
            let sigma = f.eval(&x);
            let len = inner(&sigma, &sigma, &s).unwrap();
            assert!(len.abs() > 1e-8 || sigma.max_abs() < 1e-4);
        }
    }

    #[test]
    fn push_forward_identity_and_congruence() {
        let q = Quadric::sphere(3, 1);
        let id = Matrix::identity(4);
        let f = VectorField::ConformalGradient(
            ConformalGradientField::new(q.clone(), v(&[0.3, 0.1, 0.0, 0.9])).unwrap(),
        );
        match f.push_forward(&id).unwrap() {
            VectorField::ConformalGradient(g) => {
                assert_eq!(g.pole().0, vec![0.3, 0.1, 0.0, 0.9]);
            }
            _ => panic!("push-forward changed representation"),
        }
        // An ambient isometry carries the pole along.
        let mut rng = SplitMix64::new(4);
        let p = crate::pseudolin::random_isometry(&q.ambient_signature(), &mut rng);
        match f.push_forward(&p).unwrap() {
            VectorField::ConformalGradient(g) => {
                let expected = p.mul_vec(&v(&[0.3, 0.1, 0.0, 0.9]));
                assert!(g.pole().sub(&expected).max_abs() < 1e-12);
            }
            _ => panic!("push-forward changed representation"),
        }
    }

    #[test]
    fn pole_length_determines_the_congruence_class() {
        // Two conformal gradient fields with equal pole pseudo-length are
        // congruent: an isometry built to carry one pole onto the other
        // pushes one field exactly onto the other.
        let q = Quadric::sphere(3, 1);
        let s = q.ambient_signature();
        let mut rng = SplitMix64::new(606);
        let mut checked = 0;
        while checked < 10 {
            let a = AmbientVector((0..4).map(|_| rng.next_symmetric()).collect());
            let raw = AmbientVector((0..4).map(|_| rng.next_symmetric()).collect());
            let mu = inner(&a, &a, &s).unwrap();
            let raw_mu = inner(&raw, &raw, &s).unwrap();
            if mu.abs() < 0.1 || raw_mu.abs() < 0.1 || mu.signum() != raw_mu.signum() {
                continue;
            }
            checked += 1;
            let a_tilde = raw.scale((mu / raw_mu).sqrt());
            let phi = crate::pseudolin::isometry_mapping(&a, &a_tilde, &s).unwrap();
            let field = VectorField::ConformalGradient(
                ConformalGradientField::new(q.clone(), a.clone()).unwrap(),
            );
            let target = ConformalGradientField::new(q.clone(), a_tilde.clone()).unwrap();
            let moved = field.push_forward(&phi).unwrap();
            let mut sampler = PointSampler::new(q.clone(), 8 + checked as u64);
            for _ in 0..15 {
                let x = sampler.next_point();
                assert!(moved.eval(&x).sub(&target.eval(&x)).max_abs() < 1e-9);
            }
        }
    }

    #[test]
    fn push_forward_rejects_non_isometries() {
        let f = VectorField::Killing(h21_killing_c());
        let bad = Matrix::diagonal(&[2.0, 1.0, 1.0]);
        assert!(matches!(
            f.push_forward(&bad),
            Err(Error::QuadricMapMismatch { .. })
        ));
    }

    #[test]
    fn para_kahler_defining_relations() {
        for q in [Quadric::sphere(2, 1), h21()] {
            let s = q.ambient_signature();
            let mut sampler = PointSampler::new(q.clone(), 40);
            for _ in 0..30 {
                let x = sampler.next_point();
                let j = para_kahler_j(&x).unwrap();
                let a = sampler.next_tangent(&x);
                let b = sampler.next_tangent(&x);
                // J^2 = identity.
                assert!(j.apply(&j.apply(&a)).sub(&a).max_abs() < 1e-10);
                // <JX, JY> = -<X, Y>.
                let lhs = inner(&j.apply(&a), &j.apply(&b), &s).unwrap();
                let rhs = -inner(&a, &b, &s).unwrap();
                assert!((lhs - rhs).abs() < 1e-10);
                // Skew-symmetry <JX, Y> = -<X, JY>.
                let lhs = inner(&j.apply(&a), &b, &s).unwrap();
                let rhs = -inner(&a, &j.apply(&b), &s).unwrap();
                assert!((lhs - rhs).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn para_kahler_rejected_off_neutral_surfaces() {
        let q = Quadric::sphere(2, 0);
        let x = q.point(v(&[0.0, 0.0, 1.0]), 1e-12).unwrap();
        assert!(matches!(para_kahler_j(&x), Err(Error::DegenerateTangent)));
    }

    #[test]
    fn twist_calibration_example() {
        // Pole (0,0,1): J sigma must be the field (y, x, 0).
        let f = VectorField::ConformalGradient(
            ConformalGradientField::new(h21(), v(&[0.0, 0.0, 1.0])).unwrap(),
        );
        let twisted = j_twist(&f).unwrap();
        let mut sampler = PointSampler::new(h21(), 404);
        for _ in 0..30 {
            let x = sampler.next_point();
            let got = twisted.eval(&x);
            let expected = v(&[x.coords()[1], x.coords()[0], 0.0]);
            assert!(got.sub(&expected).max_abs() < 1e-12);
            // The pointwise operator agrees with the cross-product form.
            let j = para_kahler_j(&x).unwrap();
            let sigma = f.eval(&x);
            assert!(j.apply(&sigma).sub(&got).max_abs() < 1e-10);
        }
    }

    #[test]
    fn pointwise_operator_matches_cross_product_on_sphere() {
        let q = Quadric::sphere(2, 1);
        let field = VectorField::Polynomial(random_tangent_poly_field(&q, 7));
        let twisted = j_twist(&field).unwrap();
        let mut sampler = PointSampler::new(q, 2121);
        for _ in 0..40 {
            let x = sampler.next_point();
            let j = para_kahler_j(&x).unwrap();
            let direct = j.apply(&field.eval(&x));
            assert!(direct.sub(&twisted.eval(&x)).max_abs() < 1e-9);
        }
    }

    #[test]
    fn para_holomorphy_of_the_canonical_anti_isometry() {
        // d phi . J = J . d phi for phi : index-1 hyperbolic -> index-1 sphere.
        let p = crate::quadric::canonical_anti_isometry(2, 1);
        let source = h21();
        let target = Quadric::sphere(2, 1);
        let mut sampler = PointSampler::new(source.clone(), 515);
        for _ in 0..40 {
            let x = sampler.next_point();
            let dir = sampler.next_tangent(&x);
            let jx = para_kahler_j(&x).unwrap().apply(&dir);
            let y = target
                .point(p.mul_vec(x.coords()), 1e-9)
                .expect("anti-isometry maps onto the target");
            let lhs = p.mul_vec(&jx);
            let rhs = para_kahler_j(&y).unwrap().apply(&p.mul_vec(&dir));
            assert!(lhs.sub(&rhs).max_abs() < 1e-9);
        }
    }

    #[test]
    fn twist_is_an_involution() {
        for q in [h21(), Quadric::sphere(2, 1)] {
            let field = VectorField::Polynomial(random_tangent_poly_field(&q, 99));
            let twice = j_twist(&j_twist(&field).unwrap()).unwrap();
            let mut sampler = PointSampler::new(q, 17);
            for _ in 0..30 {
                let x = sampler.next_point();
                assert!(twice.eval(&x).sub(&field.eval(&x)).max_abs() < 1e-9);
            }
        }
    }

    #[test]
    fn parallelism_of_j() {
        // nabla_X (J sigma) = J (nabla_X sigma) for polynomial sigma.
        for q in [h21(), Quadric::sphere(2, 1)] {
            let field = random_tangent_poly_field(&q, 123);
            let twisted = match j_twist(&VectorField::Polynomial(field.clone())).unwrap() {
                VectorField::Polynomial(p) => p,
                _ => unreachable!(),
            };
            let mut sampler = PointSampler::new(q, 88);
            for _ in 0..30 {
                let x = sampler.next_point();
                let dir = sampler.next_tangent(&x);
                let lhs = twisted.cov_deriv(&x, &dir);
                let j = para_kahler_j(&x).unwrap();
                let rhs = j.apply(&field.cov_deriv(&x, &dir));
                assert!(lhs.sub(&rhs).max_abs() < 1e-8);
            }
        }
    }

    #[test]
    fn closed_conformal_and_killing_detectors() {
        let q = h21();
        let mut sampler = PointSampler::new(q.clone(), 5150);
        let points: Vec<_> = (0..25).map(|_| sampler.next_point()).collect();

        let cgf = VectorField::ConformalGradient(
            ConformalGradientField::new(q.clone(), v(&[0.0, 0.0, 1.0])).unwrap(),
        );
        let (ok, psis) = is_closed_conformal(&cgf, &points, 1e-9).unwrap();
        assert!(ok);
        // psi = -eps alpha.
        for (x, psi) in points.iter().zip(&psis) {
            let alpha = match &cgf {
                VectorField::ConformalGradient(f) => f.alpha(x),
                _ => unreachable!(),
            };
            assert!((psi - alpha).abs() < 1e-9);
        }
        assert!(!is_killing(&cgf, &points, 1e-6).unwrap());

        let kf = VectorField::Killing(h21_killing_c());
        assert!(is_killing(&kf, &points, 1e-9).unwrap());
        let (ok, _) = is_closed_conformal(&kf, &points, 1e-6).unwrap();
        assert!(!ok);

        // The twist of a closed conformal field is Killing.
        let twisted = j_twist(&cgf).unwrap();
        assert!(is_killing(&twisted, &points, 1e-8).unwrap());

        let zero = VectorField::Polynomial(AmbientPolyField::zero(q.clone()));
        let (ok, psis) = is_closed_conformal(&zero, &points, 1e-12).unwrap();
        assert!(ok);
        assert!(psis.iter().all(|p| p.abs() < 1e-12));
    }

    #[test]
    fn second_derivative_commutator_is_constant_curvature() {
        // nabla^2_{X,Y} - nabla^2_{Y,X} = R(X,Y) applied to the field, and
        // on a unit quadric R(X,Y)Z = eps (<Y,Z> X - <X,Z> Y).  This pins
        // the antisymmetric part of the generic engine, which the
        // eigenvalue checks (traces) cannot see.
        for q in [
            h21(),
            Quadric::sphere(2, 0),
            Quadric::sphere(3, 1),
            Quadric::hyperbolic(3, 2),
        ] {
            let s = q.ambient_signature();
            let eps = q.epsilon();
            let field = random_tangent_poly_field(&q, 2024 + q.dim() as u64);
            let mut sampler = PointSampler::new(q.clone(), 31).with_min_q(0.2);
            for _ in 0..25 {
                let x = sampler.next_point();
                let dir_a = sampler.next_tangent(&x);
                let dir_b = sampler.next_tangent(&x);
                let commutator = field
                    .second_cov_deriv(&x, &dir_a, &dir_b)
                    .sub(&field.second_cov_deriv(&x, &dir_b, &dir_a));
                let sigma = field.eval(&x);
                let curvature = dir_a
                    .scale(eps * inner(&dir_b, &sigma, &s).unwrap())
                    .axpy(-eps * inner(&dir_a, &sigma, &s).unwrap(), &dir_b);
                assert!(
                    commutator.sub(&curvature).max_abs() < 1e-9,
                    "{q:?}: commutator residual {}",
                    commutator.sub(&curvature).max_abs()
                );
            }
        }
    }

    #[test]
    fn poly_field_rejects_non_tangent_components() {
        let q = h21();
        let dim = 3;
        let constant = vec![Poly::constant(dim, 1.0), Poly::zero(dim), Poly::zero(dim)];
        assert!(matches!(
            AmbientPolyField::new(q, constant),
            Err(Error::NotTangent { .. })
        ));
    }
}
