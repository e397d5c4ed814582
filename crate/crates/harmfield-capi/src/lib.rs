//! C ABI over the harmfield library.
//!
//! Fields are held behind opaque `HfField` handles created from explicit
//! data or from the same JSON specification documents the command line
//! reads; every function returns an [`HfStatus`] code and writes results
//! through out-pointers.  The companion header `include/harmfield.h` is
//! generated by cbindgen at build time.

use std::ffi::{c_char, c_int, CStr};

use harmfield::cgmetric::{energy_density, MetricParams};
use harmfield::error::Error;
use harmfield::fields::{ConformalGradientField, KillingField, VectorField};
use harmfield::harmonic::{
    is_pq_harmonic, preharmonic_lambda, solve_metric_params, ExactPreharmonicData,
};
use harmfield::pseudolin::{AmbientVector, Matrix};
use harmfield::quadric::Quadric;
use harmfield::rational::Rational;
use harmfield::surfaces2d::{
    fixed_points, harmonic_killing_catalog, normal_form, FixedPointCategory, Killing2D,
};

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfStatus {
    Ok = 0,
    /// Null pointer, bad dimension, or an otherwise unusable argument.
    InvalidArgument = 1,
    /// A JSON specification failed to parse or validate.
    SchemaError = 2,
    /// The fiber pseudo-length hit the singular set `<e,e> = -1`.
    SingularFiber = 3,
    /// Parameter solving needs a preharmonic field.
    NotPreharmonic = 4,
    /// The zero Killing field has no classification.
    ZeroField = 5,
    /// The provided output buffer cannot hold the result.
    BufferTooSmall = 6,
    /// Any other numerical failure surfaced by the library.
    NumericalError = 7,
}

fn status_of(err: &Error) -> HfStatus {
    match err {
        Error::Singular { .. } | Error::SingularPatch { .. } => HfStatus::SingularFiber,
        Error::NotPreharmonic { .. } => HfStatus::NotPreharmonic,
        Error::ZeroField => HfStatus::ZeroField,
        Error::DimensionMismatch { .. } | Error::NotOnQuadric { .. } | Error::NotSkew { .. } => {
            HfStatus::InvalidArgument
        }
        _ => HfStatus::NumericalError,
    }
}

/// Opaque handle to a vector field on a unit hyperquadric.
pub struct HfField {
    inner: VectorField,
}

/// Quadric kinds for handle constructors.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfQuadricKind {
    Sphere = 0,
    Hyperbolic = 1,
}

fn make_quadric(kind: HfQuadricKind, n: usize, v: usize) -> Option<Quadric> {
    if n < 2 || v > n {
        return None;
    }
    Some(match kind {
        HfQuadricKind::Sphere => Quadric::sphere(n, v),
        HfQuadricKind::Hyperbolic => Quadric::hyperbolic(n, v),
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Creates a conformal gradient field from a pole vector of length `n + 1`.
///
/// # Safety
/// `pole` must point to `pole_len` readable doubles and `out` to a writable
/// handle slot.
#[no_mangle]
pub unsafe extern "C" fn hf_field_new_cgf(
    kind: HfQuadricKind,
    n: usize,
    v: usize,
    pole: *const f64,
    pole_len: usize,
    out: *mut *mut HfField,
) -> HfStatus {
    if pole.is_null() || out.is_null() || pole_len != n + 1 {
        return HfStatus::InvalidArgument;
    }
    let Some(quadric) = make_quadric(kind, n, v) else {
        return HfStatus::InvalidArgument;
    };
    let coords = std::slice::from_raw_parts(pole, pole_len).to_vec();
    match ConformalGradientField::new(quadric, AmbientVector(coords)) {
        Ok(f) => {
            *out = Box::into_raw(Box::new(HfField {
                inner: VectorField::ConformalGradient(f),
            }));
            HfStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Creates a Killing field from a row-major `(n+1) x (n+1)` matrix, which
/// must be skew-symmetric for the quadric's ambient signature.
///
/// # Safety
/// `entries` must point to `(n+1)^2` readable doubles and `out` to a
/// writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn hf_field_new_killing(
    kind: HfQuadricKind,
    n: usize,
    v: usize,
    entries: *const f64,
    out: *mut *mut HfField,
) -> HfStatus {
    if entries.is_null() || out.is_null() {
        return HfStatus::InvalidArgument;
    }
    let Some(quadric) = make_quadric(kind, n, v) else {
        return HfStatus::InvalidArgument;
    };
    let dim = n + 1;
    let flat = std::slice::from_raw_parts(entries, dim * dim);
    let rows: Vec<Vec<f64>> = (0..dim)
        .map(|i| flat[i * dim..(i + 1) * dim].to_vec())
        .collect();
    match KillingField::new(quadric, Matrix::from_rows(&rows), 1e-10) {
        Ok(f) => {
            *out = Box::into_raw(Box::new(HfField {
                inner: VectorField::Killing(f),
            }));
            HfStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Creates a field from a JSON specification document (the same schema the
/// command-line `--spec` files use).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn hf_field_from_spec_json(
    json: *const c_char,
    out: *mut *mut HfField,
) -> HfStatus {
    if json.is_null() || out.is_null() {
        return HfStatus::InvalidArgument;
    }
    let Ok(text) = CStr::from_ptr(json).to_str() else {
        return HfStatus::SchemaError;
    };
    match harmfield::cli::parse_field_spec(text) {
        Ok((_, field)) => {
            *out = Box::into_raw(Box::new(HfField { inner: field }));
            HfStatus::Ok
        }
        Err(_) => HfStatus::SchemaError,
    }
}

/// Releases a field handle; a null pointer is a no-op.
///
/// # Safety
/// `field` must be a handle previously returned by a constructor of this
/// library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hf_field_free(field: *mut HfField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Reports the quadric a field lives on.
///
/// # Safety
/// `field` must be a live handle; out-pointers must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn hf_field_quadric(
    field: *const HfField,
    out_kind: *mut HfQuadricKind,
    out_n: *mut usize,
    out_v: *mut usize,
) -> HfStatus {
    let Some(field) = field.as_ref() else {
        return HfStatus::InvalidArgument;
    };
    let q = field.inner.quadric();
    if !out_kind.is_null() {
        *out_kind = match q.kind() {
            harmfield::quadric::QuadricKind::Sphere => HfQuadricKind::Sphere,
            harmfield::quadric::QuadricKind::Hyperbolic => HfQuadricKind::Hyperbolic,
        };
    }
    if !out_n.is_null() {
        *out_n = q.dim();
    }
    if !out_v.is_null() {
        *out_v = q.index();
    }
    HfStatus::Ok
}

/// Largest sup-norm of the Euler-Lagrange section over seeded sample points.
///
/// # Safety
/// `field` must be a live handle and `out_residual` writable.
#[no_mangle]
pub unsafe extern "C" fn hf_tau_max_residual(
    field: *const HfField,
    p: f64,
    q: f64,
    samples: usize,
    seed: u64,
    out_residual: *mut f64,
) -> HfStatus {
    let (Some(field), false) = (field.as_ref(), out_residual.is_null()) else {
        return HfStatus::InvalidArgument;
    };
    match is_pq_harmonic(
        &field.inner,
        MetricParams::new(p, q),
        samples,
        seed,
        f64::INFINITY,
    ) {
        Ok(check) => {
            *out_residual = check.max_residual;
            HfStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Sampled harmonicity verdict: writes 1 when the largest residual stays
/// below `tol`, else 0.
///
/// # Safety
/// `field` must be a live handle and `out_pass` writable.
#[no_mangle]
pub unsafe extern "C" fn hf_is_pq_harmonic(
    field: *const HfField,
    p: f64,
    q: f64,
    samples: usize,
    seed: u64,
    tol: f64,
    out_pass: *mut c_int,
) -> HfStatus {
    let (Some(field), false) = (field.as_ref(), out_pass.is_null()) else {
        return HfStatus::InvalidArgument;
    };
    match is_pq_harmonic(&field.inner, MetricParams::new(p, q), samples, seed, tol) {
        Ok(check) => {
            *out_pass = c_int::from(check.passes);
            HfStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Total energy density `e_{p,q}` of the field at an ambient point of the
/// quadric; fails with `SINGULAR_FIBER` on the singular set.
///
/// # Safety
/// `field` must be a live handle, `point` must hold `point_len` doubles,
/// and `out_energy` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hf_energy_density(
    field: *const HfField,
    p: f64,
    q: f64,
    point: *const f64,
    point_len: usize,
    out_energy: *mut f64,
) -> HfStatus {
    let (Some(field), false, false) = (field.as_ref(), point.is_null(), out_energy.is_null())
    else {
        return HfStatus::InvalidArgument;
    };
    let quadric = field.inner.quadric();
    if point_len != quadric.dim() + 1 {
        return HfStatus::InvalidArgument;
    }
    let coords = AmbientVector(std::slice::from_raw_parts(point, point_len).to_vec());
    let x = match quadric.point(coords, 1e-8) {
        Ok(x) => x,
        Err(e) => return status_of(&e),
    };
    match energy_density(&field.inner, &x, MetricParams::new(p, q)) {
        Ok(e) => {
            *out_energy = e;
            HfStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Solves the exact metric-parameter sets of a conformal gradient or
/// preharmonic Killing field.  Pairs are written flat as
/// `[p_num, p_den, q_num, q_den]` per solution; `out_count` receives the
/// number of solutions even when the buffer is too small.
///
/// # Safety
/// `field` must be a live handle; `out_pairs` must hold `capacity * 4`
/// writable `int64_t`; `out_count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hf_solve_metric_params(
    field: *const HfField,
    out_pairs: *mut i64,
    capacity: usize,
    out_count: *mut usize,
) -> HfStatus {
    let (Some(field), false) = (field.as_ref(), out_count.is_null()) else {
        return HfStatus::InvalidArgument;
    };
    let quadric = field.inner.quadric();
    let n = quadric.dim();
    let eps = quadric.epsilon() as i64;
    let rationalize = |x: f64| Rational::approximate(x, 1_000_000, 1e-9);
    let data = match &field.inner {
        VectorField::ConformalGradient(f) => {
            let Some(mu) = rationalize(f.mu()) else {
                return HfStatus::NumericalError;
            };
            ExactPreharmonicData::cgf(n, eps, mu)
        }
        VectorField::Killing(k) => {
            let Some(lambda) = preharmonic_lambda(k, 1e-9) else {
                return HfStatus::NotPreharmonic;
            };
            let (Some(lambda), Some(norm)) = (rationalize(lambda), rationalize(k.extension_norm()))
            else {
                return HfStatus::NumericalError;
            };
            ExactPreharmonicData::killing(n, eps, lambda, norm)
        }
        VectorField::Polynomial(_) => return HfStatus::NotPreharmonic,
    };
    let solutions = match solve_metric_params(&data) {
        Ok(s) => s,
        Err(e) => return status_of(&e),
    };
    *out_count = solutions.len();
    if solutions.len() > capacity {
        return HfStatus::BufferTooSmall;
    }
    if !out_pairs.is_null() {
        let out = std::slice::from_raw_parts_mut(out_pairs, solutions.len() * 4);
        for (slot, (p, q)) in out.chunks_exact_mut(4).zip(&solutions) {
            slot[0] = p.num() as i64;
            slot[1] = p.den() as i64;
            slot[2] = q.num() as i64;
            slot[3] = q.den() as i64;
        }
    }
    HfStatus::Ok
}

/// Fixed-point categories of Killing fields on the index-1 hyperbolic
/// surface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfFixedPointCategory {
    NoFixedPoints = 0,
    TwoIdeal = 1,
    TwoFixed = 2,
}

/// Classifies the fixed points of the Killing field with entries `(a, b, c)`
/// on the index-1 hyperbolic surface and writes the two representative
/// points (surface points, or ideal boundary points of the cylinder model)
/// into `out_points` when present.
///
/// # Safety
/// `out_category` must be writable; `out_points`, when non-null, must hold
/// six writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hf_fixed_points_h21(
    a: f64,
    b: f64,
    c: f64,
    out_category: *mut HfFixedPointCategory,
    out_points: *mut f64,
) -> HfStatus {
    if out_category.is_null() {
        return HfStatus::InvalidArgument;
    }
    let k = Killing2D::new(Quadric::hyperbolic(2, 1), a, b, c);
    match fixed_points(&k) {
        Ok(report) => {
            *out_category = match report.category {
                FixedPointCategory::NoFixedPoints => HfFixedPointCategory::NoFixedPoints,
                FixedPointCategory::TwoIdeal => HfFixedPointCategory::TwoIdeal,
                FixedPointCategory::TwoFixed => HfFixedPointCategory::TwoFixed,
            };
            if !out_points.is_null() && !report.points.is_empty() {
                let out = std::slice::from_raw_parts_mut(out_points, 6);
                for (chunk, point) in out.chunks_exact_mut(3).zip(&report.points) {
                    chunk.copy_from_slice(point);
                }
            }
            HfStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Congruence normal form of the Killing field `(a, b, c)` on the index-1
/// hyperbolic surface: writes the normal form and the conjugating ambient
/// isometry (both row-major 3x3) and the conjugation residual.
///
/// # Safety
/// `out_normal` and `out_conjugator` must each hold nine writable doubles;
/// `out_residual` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hf_normal_form_h21(
    a: f64,
    b: f64,
    c: f64,
    out_normal: *mut f64,
    out_conjugator: *mut f64,
    out_residual: *mut f64,
) -> HfStatus {
    if out_normal.is_null() || out_conjugator.is_null() || out_residual.is_null() {
        return HfStatus::InvalidArgument;
    }
    let k = Killing2D::new(Quadric::hyperbolic(2, 1), a, b, c);
    match normal_form(&k) {
        Ok(result) => {
            let write = |m: &Matrix, out: *mut f64| {
                let slice = std::slice::from_raw_parts_mut(out, 9);
                for i in 0..3 {
                    for j in 0..3 {
                        slice[i * 3 + j] = m.get(i, j);
                    }
                }
            };
            write(&result.normal, out_normal);
            write(&result.conjugator, out_conjugator);
            *out_residual = result.residual;
            HfStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Looks up the harmonic Killing representative of a quadric surface:
/// writes its `(a, b, c)` entries and sets `out_present` to 1, or sets it
/// to 0 when none exists (the round sphere).
///
/// # Safety
/// `out_abc` must hold three writable doubles; `out_present` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn hf_harmonic_killing_catalog(
    kind: HfQuadricKind,
    v: usize,
    out_abc: *mut f64,
    out_present: *mut c_int,
) -> HfStatus {
    if out_abc.is_null() || out_present.is_null() {
        return HfStatus::InvalidArgument;
    }
    let Some(quadric) = make_quadric(kind, 2, v) else {
        return HfStatus::InvalidArgument;
    };
    match harmonic_killing_catalog(&quadric) {
        Some(k) => {
            let out = std::slice::from_raw_parts_mut(out_abc, 3);
            out.copy_from_slice(&[k.a, k.b, k.c]);
            *out_present = 1;
        }
        None => {
            *out_present = 0;
        }
    }
    HfStatus::Ok
}
