//! The Euler-Lagrange engine for harmonic vector fields.
//!
//! A vector field `sigma` with `F = <sigma,sigma>/2` is `(p,q)`-harmonic
//! when the Euler-Lagrange section
//!
//! ```text
//! tau_{p,q}(sigma) = T_p(sigma) - phi_{p,q}(sigma) sigma,
//! T_p   = (1 + 2F) nabla*nabla sigma + 2p nabla_{grad F} sigma,
//! phi   = p <nabla sigma, nabla sigma> - p q g(grad F, grad F)
//!         - q (1 + 2F) Delta F,
//! ```
//!
//! vanishes identically.  Unlike the vertical energy itself, `tau_{p,q}` is
//! defined on all of the quadric, including the set `<sigma,sigma> = -1`.
//!
//! Preharmonic fields (those with `nabla*nabla sigma = nu sigma` and
//! `nabla_{grad F} sigma = zeta sigma`) reduce the harmonic condition to a
//! polynomial in `F`; with `zeta` and `Delta F` affine in `F` the
//! coefficients form a small system in `(p, q)` that is solved exactly in
//! rational arithmetic.  A quadrature-based first variation of the vertical
//! energy over a coordinate patch provides an independent numerical check
//! of the variational origin of `tau_{p,q}`.

use crate::cgmetric::MetricParams;
use crate::error::{Error, Result};
use crate::fields::{AmbientPolyField, KillingField, VectorField};
use crate::pseudolin::{inner, AmbientVector, Matrix};
use crate::quadric::{tangent_frame, PointSampler, QuadricPoint};
use crate::rational::{intersect, solve_linear, LinearSolutions, Rational};
use std::collections::BTreeSet;

pub use crate::cgmetric::weitzenbock_residual;

/// Default residual tolerance for closed-form evaluation paths.
pub const CLOSED_FORM_TOL: f64 = 1e-9;
/// Default residual tolerance for the generic polynomial path.
pub const GENERIC_TOL: f64 = 1e-6;
/// Default number of verification sample points.
pub const DEFAULT_SAMPLES: usize = 200;
/// Default verification seed.
pub const DEFAULT_SEED: u64 = 42;

/// Everything `tau_{p,q}` needs at one point, computed once so that scans
/// over many `(p,q)` pairs reuse the expensive derivatives.
#[derive(Debug, Clone)]
pub struct TauIngredients {
    pub sigma: AmbientVector,
    pub f: f64,
    pub rough_laplacian: AmbientVector,
    pub nabla_grad_f_sigma: AmbientVector,
    pub grad_sigma_sq: f64,
    pub grad_f_sq: f64,
    pub delta_f: f64,
}

/// The Euler-Lagrange data at a point.
#[derive(Debug, Clone)]
pub struct EulerLagrangeResult {
    pub t_p: AmbientVector,
    pub phi: f64,
    pub tau: AmbientVector,
}

/// Assembles the ingredients along the closed-form path for conformal
/// gradient and Killing fields, and through the generic polynomial engine
/// otherwise.
pub fn tau_ingredients(field: &VectorField, x: &QuadricPoint) -> Result<TauIngredients> {
    let q = field.quadric();
    let s = q.ambient_signature();
    let eps = q.epsilon();
    let n = q.dim() as f64;
    match field {
        VectorField::ConformalGradient(f) => {
            let sigma = f.eval(x);
            let alpha = f.alpha(x);
            let ff = f.f_at(x);
            Ok(TauIngredients {
                rough_laplacian: sigma.scale(eps),
                nabla_grad_f_sigma: sigma.scale(alpha * alpha),
                grad_sigma_sq: n * alpha * alpha,
                grad_f_sq: alpha * alpha * 2.0 * ff,
                delta_f: f.laplacian_f(x),
                sigma,
                f: ff,
            })
        }
        VectorField::Killing(k) => {
            let sigma = k.eval(x);
            let ff = k.f_at(x);
            let grad_f = k.grad_f(x);
            let hat = k.hat().eval(x);
            let nabla_grad_f_sigma = hat.scale(-1.0).axpy(-2.0 * eps * ff, &sigma);
            Ok(TauIngredients {
                rough_laplacian: sigma.scale(eps * (n - 1.0)),
                nabla_grad_f_sigma,
                grad_sigma_sq: k.extension_norm() - 4.0 * eps * ff,
                grad_f_sq: inner(&grad_f, &grad_f, &s)?,
                delta_f: k.laplacian_f(x),
                sigma,
                f: ff,
            })
        }
        VectorField::Polynomial(poly) => tau_ingredients_generic(poly, x),
    }
}

/// The generic-engine path, used for polynomial fields and as the oracle
/// route for the closed forms.
pub fn tau_ingredients_generic(
    poly: &AmbientPolyField,
    x: &QuadricPoint,
) -> Result<TauIngredients> {
    let s = poly.quadric().ambient_signature();
    let frame = tangent_frame(x)?;
    let sigma = poly.eval(x);
    let f = poly.f_at(x);
    let grad_f = poly.grad_f(x);
    Ok(TauIngredients {
        rough_laplacian: poly.rough_laplacian_with_frame(x, &frame),
        nabla_grad_f_sigma: poly.cov_deriv(x, &grad_f),
        grad_sigma_sq: poly.grad_sigma_sq_with_frame(x, &frame),
        grad_f_sq: inner(&grad_f, &grad_f, &s)?,
        delta_f: poly.laplacian_f_with_frame(x, &frame),
        sigma,
        f,
    })
}

/// `tau_{p,q}` from precomputed ingredients.
pub fn tau_from_ingredients(ing: &TauIngredients, params: MetricParams) -> EulerLagrangeResult {
    let one_plus_2f = 1.0 + 2.0 * ing.f;
    let t_p = ing
        .rough_laplacian
        .scale(one_plus_2f)
        .axpy(2.0 * params.p, &ing.nabla_grad_f_sigma);
    let phi = params.p * ing.grad_sigma_sq
        - params.p * params.q * ing.grad_f_sq
        - params.q * one_plus_2f * ing.delta_f;
    let tau = t_p.axpy(-phi, &ing.sigma);
    EulerLagrangeResult { t_p, phi, tau }
}

/// The Euler-Lagrange section at one point.
pub fn tau_pq(
    field: &VectorField,
    x: &QuadricPoint,
    params: MetricParams,
) -> Result<EulerLagrangeResult> {
    Ok(tau_from_ingredients(&tau_ingredients(field, x)?, params))
}

/// Outcome of a sampled harmonicity verification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicityCheck {
    pub passes: bool,
    pub max_residual: f64,
    pub samples: usize,
}

/// Verifies `tau_{p,q} = 0` over seeded sample points: passes when the
/// largest sup-norm residual stays below `tol`.
pub fn is_pq_harmonic(
    field: &VectorField,
    params: MetricParams,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<HarmonicityCheck> {
    let mut sampler = PointSampler::new(field.quadric().clone(), seed);
    let mut max_residual = 0.0f64;
    for _ in 0..samples {
        let x = sampler.next_point();
        let res = tau_pq(field, &x, params)?.tau.max_abs();
        max_residual = max_residual.max(res);
    }
    Ok(HarmonicityCheck {
        passes: max_residual <= tol,
        max_residual,
        samples,
    })
}

/// Scans many parameter pairs over one set of points, reusing the
/// per-point ingredients; returns the max residual per parameter pair.
pub fn residual_scan(
    field: &VectorField,
    points: &[QuadricPoint],
    params: &[MetricParams],
) -> Result<Vec<f64>> {
    let ingredients: Vec<TauIngredients> = points
        .iter()
        .map(|x| tau_ingredients(field, x))
        .collect::<Result<_>>()?;
    Ok(params
        .iter()
        .map(|&p| {
            ingredients
                .iter()
                .map(|ing| tau_from_ingredients(ing, p).tau.max_abs())
                .fold(0.0f64, f64::max)
        })
        .collect())
}

/// Least-squares fit of `lambda` in `A^3 = lambda A` together with the
/// entrywise residual of the fit; `None` for the trivial field.
fn lambda_fit(k: &KillingField) -> Option<(f64, f64)> {
    let a = k.matrix().entries();
    let hat = k.hat();
    let a3 = hat.matrix().entries();
    let dim = a.n_rows();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            num += a3.get(i, j) * a.get(i, j);
            den += a.get(i, j) * a.get(i, j);
        }
    }
    if den == 0.0 {
        return None;
    }
    let lambda = num / den;
    let residual = a3.sub(&a.scale(lambda)).max_abs();
    Some((lambda, residual))
}

/// Least-squares fit of `lambda` with `A^3 = lambda A`; present only when
/// the residual stays below `tol`.  The trivial field is rejected.
pub fn preharmonic_lambda(k: &KillingField, tol: f64) -> Option<f64> {
    match lambda_fit(k) {
        Some((lambda, residual)) if residual <= tol => Some(lambda),
        _ => None,
    }
}

/// Preharmonicity data: the rough-Laplacian eigenvalue `nu` and the affine
/// expansions `zeta = c0 + c1 F`, `Delta F = d0 + d1 F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreharmonicData {
    pub nu: f64,
    pub zeta: (f64, f64),
    pub delta_f: (f64, f64),
}

/// The same data with exact rational coefficients, for the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPreharmonicData {
    pub nu: Rational,
    pub zeta: (Rational, Rational),
    pub delta_f: (Rational, Rational),
}

impl ExactPreharmonicData {
    /// Conformal gradient field data: `nu = eps`, `zeta = eps(mu - 2F)`,
    /// `Delta F = 2 eps (1+n) F - eps n mu`.
    pub fn cgf(n: usize, eps: i64, mu: Rational) -> Self {
        let e = Rational::from_int(eps);
        let n_r = Rational::from_int(n as i64);
        ExactPreharmonicData {
            nu: e,
            zeta: (e.mul(&mu), e.mul(&Rational::from_int(-2))),
            delta_f: (
                e.neg().mul(&n_r).mul(&mu),
                e.mul(&Rational::from_int(2 * (n as i64 + 1))),
            ),
        }
    }

    /// Preharmonic Killing field data: `nu = eps (n-1)`,
    /// `zeta = -(lambda + 2 eps F)`, `Delta F = 2 eps (n+1) F - <A,A>`.
    pub fn killing(n: usize, eps: i64, lambda: Rational, extension_norm: Rational) -> Self {
        let e = Rational::from_int(eps);
        ExactPreharmonicData {
            nu: e.mul(&Rational::from_int(n as i64 - 1)),
            zeta: (lambda.neg(), e.mul(&Rational::from_int(-2))),
            delta_f: (
                extension_norm.neg(),
                e.mul(&Rational::from_int(2 * (n as i64 + 1))),
            ),
        }
    }

    pub fn to_f64(&self) -> PreharmonicData {
        PreharmonicData {
            nu: self.nu.to_f64(),
            zeta: (self.zeta.0.to_f64(), self.zeta.1.to_f64()),
            delta_f: (self.delta_f.0.to_f64(), self.delta_f.1.to_f64()),
        }
    }
}

/// Extracts the preharmonicity data of a field: immediate for conformal
/// gradient fields, conditional on `A^3 = lambda A` for Killing fields.
pub fn spinnaker(field: &VectorField) -> Result<PreharmonicData> {
    let q = field.quadric();
    let eps = q.epsilon();
    let n = q.dim() as f64;
    match field {
        VectorField::ConformalGradient(f) => Ok(PreharmonicData {
            nu: eps,
            zeta: (eps * f.mu(), -2.0 * eps),
            delta_f: (-eps * n * f.mu(), 2.0 * eps * (n + 1.0)),
        }),
        VectorField::Killing(k) => match lambda_fit(k) {
            Some((lambda, residual)) if residual <= 1e-9 => Ok(PreharmonicData {
                nu: eps * (n - 1.0),
                zeta: (-lambda, -2.0 * eps),
                delta_f: (-k.extension_norm(), 2.0 * eps * (n + 1.0)),
            }),
            Some((_, residual)) => Err(Error::NotPreharmonic { residual }),
            None => Err(Error::NotPreharmonic { residual: 0.0 }),
        },
        VectorField::Polynomial(_) => Err(Error::NotPreharmonic { residual: f64::NAN }),
    }
}

/// Coefficients (constant, `F`, `F^2`) of the preharmonic reduction
/// `(p + q + 2qF) Delta F + 2p (1 + qF) zeta + (1 + 2(1-p)F) nu`.
pub fn harmonicity_polynomial(data: &PreharmonicData, params: MetricParams) -> [f64; 3] {
    let (c0, c1) = data.zeta;
    let (d0, d1) = data.delta_f;
    let nu = data.nu;
    let (p, q) = (params.p, params.q);
    [
        (p + q) * d0 + 2.0 * p * c0 + nu,
        (p + q) * d1 + 2.0 * q * d0 + 2.0 * p * c1 + 2.0 * p * q * c0 + 2.0 * (1.0 - p) * nu,
        2.0 * q * d1 + 2.0 * p * q * c1,
    ]
}

/// Exact-coefficient version of [`harmonicity_polynomial`].
pub fn harmonicity_polynomial_exact(
    data: &ExactPreharmonicData,
    p: &Rational,
    q: &Rational,
) -> [Rational; 3] {
    let (c0, c1) = (&data.zeta.0, &data.zeta.1);
    let (d0, d1) = (&data.delta_f.0, &data.delta_f.1);
    let nu = &data.nu;
    let two = Rational::from_int(2);
    let k0 = p.add(q).mul(d0).add(&two.mul(p).mul(c0)).add(nu);
    let k1 = p
        .add(q)
        .mul(d1)
        .add(&two.mul(q).mul(d0))
        .add(&two.mul(p).mul(c1))
        .add(&two.mul(p).mul(q).mul(c0))
        .add(&two.mul(&Rational::ONE.sub(p)).mul(nu));
    let k2 = two.mul(q).mul(d1).add(&two.mul(p).mul(q).mul(c1));
    [k0, k1, k2]
}

/// All `(p, q)` for which every coefficient of the harmonicity polynomial
/// vanishes, solved exactly.
///
/// The `F^2` coefficient `2q (d1 + p c1)` splits the search into the `q = 0`
/// branch and the `p = -d1/c1` branch; each leaves two linear equations
/// whose solution sets are intersected.  Data degenerate enough to admit a
/// continuum of solutions (possible only for fields with constant `F`,
/// outside this routine's contract) is reported as an error.
pub fn solve_metric_params(data: &ExactPreharmonicData) -> Result<BTreeSet<(Rational, Rational)>> {
    let (c0, c1) = (&data.zeta.0, &data.zeta.1);
    let (d0, d1) = (&data.delta_f.0, &data.delta_f.1);
    let nu = &data.nu;
    let two = Rational::from_int(2);
    let mut solutions = BTreeSet::new();

    // Branch q = 0: k0 = p (d0 + 2 c0) + nu, k1 = p (d1 + 2 c1 - 2 nu) + 2 nu.
    let from_k0 = solve_linear(&d0.add(&two.mul(c0)), nu);
    let from_k1 = solve_linear(&d1.add(&two.mul(c1)).sub(&two.mul(nu)), &two.mul(nu));
    match intersect(from_k0, from_k1) {
        LinearSolutions::One(p) => {
            solutions.insert((p, Rational::ZERO));
        }
        LinearSolutions::None => {}
        LinearSolutions::All => return Err(Error::DegenerateParamSystem),
    }

    // Branch q != 0 forces d1 + p c1 = 0.
    if !c1.is_zero() {
        let p = d1.neg().div(c1);
        // k0 = q d0 + (p d0 + 2 p c0 + nu)
        let k0_const = p.mul(d0).add(&two.mul(&p).mul(c0)).add(nu);
        let from_k0 = solve_linear(d0, &k0_const);
        // k1 = q (d1 + 2 d0 + 2 p c0) + (p d1 + 2 p c1 + 2 (1 - p) nu)
        let k1_lin = d1.add(&two.mul(d0)).add(&two.mul(&p).mul(c0));
        let k1_const = p
            .mul(d1)
            .add(&two.mul(&p).mul(c1))
            .add(&two.mul(&Rational::ONE.sub(&p)).mul(nu));
        let from_k1 = solve_linear(&k1_lin, &k1_const);
        match intersect(from_k0, from_k1) {
            LinearSolutions::One(q) => {
                if !q.is_zero() {
                    solutions.insert((p, q));
                }
            }
            LinearSolutions::None => {}
            LinearSolutions::All => return Err(Error::DegenerateParamSystem),
        }
    } else if d1.is_zero() {
        // k2 vanishes identically; fields of the supported kinds always have
        // c1 = -2 eps != 0, so this is reachable only with hand-built data.
        return Err(Error::DegenerateParamSystem);
    }

    Ok(solutions)
}

/// Closed-form classification of harmonic conformal gradient fields by the
/// pseudo-length `mu` of the pole vector (curvature-independent): for
/// `mu >= 0` harmonic only when `n > 2` and `mu = 1/(n-2)`, at
/// `(n+1, 2-n)`; for `mu < 0` only when `mu = -1`, at
/// `(n+1, (1+n-n^2)/n)` and, when `n > 2`, also `(1/(2-n), 0)`.
pub fn classify_cgf(n: usize, mu: Rational) -> BTreeSet<(Rational, Rational)> {
    let mut out = BTreeSet::new();
    let n_i = n as i64;
    if mu >= Rational::ZERO {
        if n > 2 && mu == Rational::new(1, i128::from(n_i) - 2) {
            out.insert((Rational::from_int(n_i + 1), Rational::from_int(2 - n_i)));
        }
    } else if mu == Rational::from_int(-1) {
        out.insert((
            Rational::from_int(n_i + 1),
            Rational::new(i128::from(1 + n_i - n_i * n_i), i128::from(n_i)),
        ));
        if n > 2 {
            out.insert((Rational::new(1, i128::from(2 - n_i)), Rational::ZERO));
        }
    }
    out
}

/// The unique metric parameters `(3, -1/2)` of a two-dimensional harmonic
/// Killing field, available exactly when `lambda = eps`.
pub fn killing_harmonic_condition_2d(eps: i8, lambda: f64, tol: f64) -> Option<MetricParams> {
    if (lambda - f64::from(eps)).abs() <= tol {
        Some(MetricParams::new(3.0, -0.5))
    } else {
        None
    }
}

/// Coefficients in powers of `2F` of the harmonicity condition for a
/// preharmonic Killing field with `A^3 = lambda A`:
/// `eps(n+1-p)q (2F)^2 + (eps(n-1+(n+1)q) - pq lambda - q<A,A>)(2F)
///  + eps(n-1) - 2p lambda - (p+q)<A,A>`.
pub fn general_killing_condition(
    n: usize,
    eps: f64,
    lambda: f64,
    extension_norm: f64,
    params: MetricParams,
) -> [f64; 3] {
    let nf = n as f64;
    let (p, q) = (params.p, params.q);
    [
        eps * (nf - 1.0) - 2.0 * p * lambda - (p + q) * extension_norm,
        eps * (nf - 1.0 + (nf + 1.0) * q) - p * q * lambda - q * extension_norm,
        eps * (nf + 1.0 - p) * q,
    ]
}

/// Result of the constant-length reduction check.
#[derive(Debug, Clone, Copy)]
pub struct ConstantLengthCheck {
    pub holds: bool,
    /// Largest residual of `(1+k) nabla*nabla sigma = p <nabla sigma, nabla sigma> sigma`.
    pub max_residual: f64,
    /// Largest deviation between `tau_{p,q}` and the reduced expression.
    pub tau_consistency: f64,
}

/// For a field of constant pseudo-length `k != -1`, tests the reduced
/// Euler-Lagrange equation `(1+k) nabla*nabla sigma = p <nabla sigma,
/// nabla sigma> sigma` and its agreement with the full `tau_{p,q}` (which
/// must hold for every `q`).
pub fn constant_length_check(
    field: &VectorField,
    k: f64,
    params: MetricParams,
    points: &[QuadricPoint],
    tol: f64,
) -> Result<ConstantLengthCheck> {
    if (k + 1.0).abs() <= 1e-12 {
        return Err(Error::Singular { e_len: k });
    }
    let s = field.quadric().ambient_signature();
    let mut max_residual = 0.0f64;
    let mut tau_consistency = 0.0f64;
    for x in points {
        let sigma = field.eval(x);
        let len = inner(&sigma, &sigma, &s)?;
        if (len - k).abs() > 1e-9 {
            return Err(Error::NotConstantLength {
                spread: (len - k).abs(),
            });
        }
        let ing = tau_ingredients(field, x)?;
        let reduced = ing
            .rough_laplacian
            .scale(1.0 + k)
            .axpy(-params.p * ing.grad_sigma_sq, &sigma);
        max_residual = max_residual.max(reduced.max_abs());
        let full = tau_from_ingredients(&ing, params);
        tau_consistency = tau_consistency.max(full.tau.sub(&reduced).max_abs());
    }
    Ok(ConstantLengthCheck {
        holds: max_residual <= tol,
        max_residual,
        tau_consistency,
    })
}

// ---------------------------------------------------------------------------
// First variation by quadrature over a graph-coordinate patch.
// ---------------------------------------------------------------------------

/// Graph-coordinate chart over a box: the quadric equation is solved for
/// one ambient coordinate, the remaining ones run over the box.
#[derive(Debug, Clone)]
pub struct PatchSpec {
    /// Ambient coordinate index solved from the quadric equation.
    pub solve_coord: usize,
    /// Square-root branch (+1 or -1).
    pub branch: f64,
    /// The free ambient coordinates, in chart order.
    pub free_coords: Vec<usize>,
    /// Chart box, one interval per free coordinate.
    pub intervals: Vec<(f64, f64)>,
    /// Gauss-Legendre nodes per axis.
    pub quad_order: usize,
}

impl PatchSpec {
    /// Chart for a surface: solve for coordinate `solve_coord`, the other
    /// two run over the given intervals in ascending index order.
    pub fn surface(solve_coord: usize, branch: f64, intervals: [(f64, f64); 2]) -> Self {
        let free_coords = (0..3).filter(|&i| i != solve_coord).collect();
        PatchSpec {
            solve_coord,
            branch,
            free_coords,
            intervals: intervals.to_vec(),
            quad_order: 24,
        }
    }
}

/// Cutoff profile: per-axis polynomial spline `[(u-lo)(hi-u)]^order`,
/// normalised to one at the box centre; vanishes to `order` at the boundary.
#[derive(Debug, Clone, Copy)]
pub struct BumpSpec {
    pub order: u32,
}

impl Default for BumpSpec {
    fn default() -> Self {
        BumpSpec { order: 2 }
    }
}

impl BumpSpec {
    fn value_and_derivs(&self, u: &[f64], intervals: &[(f64, f64)]) -> (f64, Vec<f64>) {
        let mut factors = Vec::with_capacity(u.len());
        let mut dfactors = Vec::with_capacity(u.len());
        for (ui, &(lo, hi)) in u.iter().zip(intervals) {
            let half = 0.5 * (hi - lo);
            let norm = (half * half).powi(self.order as i32);
            let base = (ui - lo) * (hi - ui);
            let value = base.powi(self.order as i32) / norm;
            let dbase = (hi - ui) - (ui - lo);
            let dvalue = if self.order == 0 {
                0.0
            } else {
                f64::from(self.order) * base.powi(self.order as i32 - 1) * dbase / norm
            };
            factors.push(value);
            dfactors.push(dvalue);
        }
        let product: f64 = factors.iter().product();
        let grads = (0..u.len())
            .map(|a| {
                factors
                    .iter()
                    .enumerate()
                    .map(|(j, f)| if j == a { dfactors[a] } else { *f })
                    .product()
            })
            .collect();
        (product, grads)
    }
}

/// Numeric vs analytic first variation of the local vertical energy.
#[derive(Debug, Clone, Copy)]
pub struct VariationCheck {
    /// Central finite difference (with one Richardson refinement) of the
    /// quadrature of `e^v_{p,q}(sigma + t rho~)` at `t = 0`.
    pub numeric: f64,
    /// Quadrature of `sign(1+2F) omega^{p+1} <tau_{p,q}(sigma), rho~>`.
    pub analytic: f64,
}

fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let m = order;
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_deriv(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        // Central node of odd orders.
        let (_, dp) = legendre_with_deriv(m, 0.0);
        nodes[m / 2] = 0.0;
        weights[m / 2] = 2.0 / (dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_deriv(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let pk = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = pk;
    }
    let dp = if (x * x - 1.0).abs() < 1e-300 {
        f64::INFINITY
    } else {
        m as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

struct PatchNode {
    point: QuadricPoint,
    weight_vol: f64,
    frame_indicators: Vec<i8>,
    sigma: AmbientVector,
    dsigma: Vec<AmbientVector>,
    rho_bumped: AmbientVector,
    drho_bumped: Vec<AmbientVector>,
}

fn chart_point(
    quadric: &crate::quadric::Quadric,
    patch: &PatchSpec,
    u: &[f64],
) -> Result<QuadricPoint> {
    let s = quadric.ambient_signature();
    let eps = quadric.epsilon();
    let dim = quadric.dim() + 1;
    let k = patch.solve_coord;
    let eps_k = s.indicator(k);
    let mut partial = 0.0;
    for (j, &cj) in patch.free_coords.iter().zip(u) {
        partial += s.indicator(*j) * cj * cj;
    }
    let radicand = eps_k * (eps - partial);
    if radicand <= 0.0 {
        return Err(Error::InvalidChart { radicand });
    }
    let mut coords = vec![0.0; dim];
    for (j, &cj) in patch.free_coords.iter().zip(u) {
        coords[*j] = cj;
    }
    coords[k] = patch.branch * radicand.sqrt();
    quadric.point(AmbientVector(coords), 1e-9)
}

/// The vertical energy is defined only where `1 + <sigma,sigma>` keeps one
/// sign.  Quadrature nodes never land on the box centre or the boundary, so
/// the guard scans a denser uniform grid (endpoints included) for a sign
/// change or a small margin.
fn singular_margin_scan(field: &VectorField, patch: &PatchSpec) -> Result<()> {
    let quadric = field.quadric().clone();
    let s = quadric.ambient_signature();
    let m = patch.free_coords.len();
    let per_axis = 2 * patch.quad_order + 1;
    let total = per_axis.pow(m as u32);
    let mut min_margin = f64::INFINITY;
    let mut has_positive = false;
    let mut has_negative = false;
    for flat in 0..total {
        let mut rem = flat;
        let mut u = Vec::with_capacity(m);
        for &(lo, hi) in &patch.intervals {
            let idx = rem % per_axis;
            rem /= per_axis;
            u.push(lo + (hi - lo) * idx as f64 / (per_axis - 1) as f64);
        }
        let x = chart_point(&quadric, patch, &u)?;
        let sigma = field.eval(&x);
        let d = 1.0 + inner(&sigma, &sigma, &s)?;
        min_margin = min_margin.min(d.abs());
        if d > 0.0 {
            has_positive = true;
        } else {
            has_negative = true;
        }
    }
    if min_margin < 1e-6 || (has_positive && has_negative) {
        return Err(Error::SingularPatch { margin: min_margin });
    }
    Ok(())
}

fn build_patch_nodes(
    field: &VectorField,
    rho: &AmbientPolyField,
    bump: &BumpSpec,
    patch: &PatchSpec,
) -> Result<Vec<PatchNode>> {
    let quadric = field.quadric().clone();
    let s = quadric.ambient_signature();
    let dim = quadric.dim() + 1;
    let m = patch.free_coords.len();
    assert_eq!(m + 1, dim, "patch must fix all but one ambient coordinate");
    assert_eq!(patch.intervals.len(), m);

    let (nodes01, weights01) = gauss_legendre(patch.quad_order);
    let axes: Vec<(Vec<f64>, Vec<f64>)> = patch
        .intervals
        .iter()
        .map(|&(lo, hi)| {
            let c = 0.5 * (lo + hi);
            let h = 0.5 * (hi - lo);
            (
                nodes01.iter().map(|t| c + h * t).collect(),
                weights01.iter().map(|w| w * h).collect(),
            )
        })
        .collect();

    let total = patch.quad_order.pow(m as u32);
    let mut out = Vec::with_capacity(total);
    let k = patch.solve_coord;
    let eps_k = s.indicator(k);
    for flat in 0..total {
        let mut rem = flat;
        let mut u = Vec::with_capacity(m);
        let mut weight = 1.0;
        for axis in axes.iter() {
            let idx = rem % patch.quad_order;
            rem /= patch.quad_order;
            u.push(axis.0[idx]);
            weight *= axis.1[idx];
        }
        let point = chart_point(&quadric, patch, &u)?;
        let xk = point.coords()[k];

        // Chart tangent basis T_a = e_{free_a} + (dx_k/du_a) e_k and the
        // induced chart metric g_ab.
        let derivs: Vec<f64> = patch
            .free_coords
            .iter()
            .zip(&u)
            .map(|(&j, &uj)| -eps_k * s.indicator(j) * uj / xk)
            .collect();
        let mut tangents = Vec::with_capacity(m);
        for (a, &j) in patch.free_coords.iter().enumerate() {
            let mut t = vec![0.0; dim];
            t[j] = 1.0;
            t[k] = derivs[a];
            tangents.push(AmbientVector(t));
        }
        let mut g = Matrix::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                g.set(a, b, inner(&tangents[a], &tangents[b], &s)?);
            }
        }
        let vol = g.det().abs().sqrt();
        let g_inv = g.inverse().map_err(|_| Error::DegenerateTangent)?;

        let frame = tangent_frame(&point)?;
        let sigma = field.eval(&point);
        let dsigma: Vec<AmbientVector> = frame
            .vectors
            .iter()
            .map(|e| field.cov_deriv(&point, e))
            .collect();

        // rho~ = b rho with b evaluated in chart coordinates; the chart
        // differential of b reaches each frame vector through that vector's
        // chart components.
        let (b, db_chart) = bump.value_and_derivs(&u, &patch.intervals);
        let rho_val = rho.eval(&point);
        let mut drho_bumped = Vec::with_capacity(frame.len());
        for e in &frame.vectors {
            let mut rhs = vec![0.0; m];
            for (a, t) in tangents.iter().enumerate() {
                rhs[a] = inner(e, t, &s)?;
            }
            let mut db_e = 0.0;
            for a in 0..m {
                let mut comp = 0.0;
                for b_idx in 0..m {
                    comp += g_inv.get(a, b_idx) * rhs[b_idx];
                }
                db_e += comp * db_chart[a];
            }
            let drho = rho.cov_deriv(&point, e);
            drho_bumped.push(rho_val.scale(db_e).axpy(b, &drho));
        }

        out.push(PatchNode {
            weight_vol: weight * vol,
            frame_indicators: frame.indicators,
            sigma,
            dsigma,
            rho_bumped: rho_val.scale(b),
            drho_bumped,
            point,
        });
    }
    Ok(out)
}

fn vertical_energy_at_node(
    node: &PatchNode,
    params: MetricParams,
    t: f64,
    s: &crate::pseudolin::Signature,
) -> Result<f64> {
    let sigma_t = node.sigma.axpy(t, &node.rho_bumped);
    let len = inner(&sigma_t, &sigma_t, s)?;
    let denom = 1.0 + len;
    if denom.abs() < 1e-6 {
        return Err(Error::SingularPatch {
            margin: denom.abs(),
        });
    }
    let w = (1.0 / denom.abs()).powf(params.p);
    let mut grad_sq = 0.0;
    let mut grad_f_sq = 0.0;
    for ((d, db), &ind) in node
        .dsigma
        .iter()
        .zip(&node.drho_bumped)
        .zip(&node.frame_indicators)
    {
        let dt = d.axpy(t, db);
        grad_sq += f64::from(ind) * inner(&dt, &dt, s)?;
        let df = inner(&dt, &sigma_t, s)?;
        grad_f_sq += f64::from(ind) * df * df;
    }
    Ok(0.5 * w * (grad_sq + params.q * grad_f_sq))
}

/// First variation of the local vertical `(p,q)`-energy along the compactly
/// supported variation `sigma + t b rho`: the numeric side differentiates
/// the quadrature of the energy density by central differences (step `dt`,
/// one Richardson refinement); the analytic side integrates
/// `sign(1+2F) omega^{p+1} <tau_{p,q}(sigma), b rho>`.
pub fn first_variation(
    field: &VectorField,
    rho: &AmbientPolyField,
    bump: &BumpSpec,
    patch: &PatchSpec,
    params: MetricParams,
    dt: f64,
) -> Result<VariationCheck> {
    let s = field.quadric().ambient_signature();
    singular_margin_scan(field, patch)?;
    let nodes = build_patch_nodes(field, rho, bump, patch)?;

    let energy = |t: f64| -> Result<f64> {
        let mut total = 0.0;
        for node in &nodes {
            total += vertical_energy_at_node(node, params, t, &s)? * node.weight_vol;
        }
        Ok(total)
    };
    let diff = |h: f64| -> Result<f64> { Ok((energy(h)? - energy(-h)?) / (2.0 * h)) };
    let d1 = diff(dt)?;
    let d2 = diff(0.5 * dt)?;
    let numeric = (4.0 * d2 - d1) / 3.0;

    let mut analytic = 0.0;
    for node in &nodes {
        let ing = tau_ingredients(field, &node.point)?;
        let tau = tau_from_ingredients(&ing, params).tau;
        let one_plus_2f = 1.0 + 2.0 * ing.f;
        if one_plus_2f.abs() < 1e-6 {
            return Err(Error::SingularPatch {
                margin: one_plus_2f.abs(),
            });
        }
        let sign = one_plus_2f.signum();
        let omega_p1 = (1.0 / one_plus_2f.abs()).powf(params.p + 1.0);
        analytic += sign * omega_p1 * inner(&tau, &node.rho_bumped, &s)? * node.weight_vol;
    }

    Ok(VariationCheck { numeric, analytic })
}
