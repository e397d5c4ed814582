//! Indefinite linear algebra over pseudo-Euclidean space.
//!
//! The ambient space is `R^{n+1}` equipped with the inner product
//! `<x,y> = sum_i eps_i x_i y_i`, where the indicator symbols `eps_i` are
//! `+1` on the leading block and `-1` on the trailing block.  This module
//! provides the signature bookkeeping, skew-symmetric maps (infinitesimal
//! isometries), pseudo-orthonormal frames via pivoted Gram-Schmidt, and
//! isometry / anti-isometry tests.
//!
//! Everything here is dimension-generic; the quadric modules specialise to
//! unit hyperquadrics.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Signature of a pseudo-Euclidean inner product: the ordered list of
/// indicator symbols, all `+1` entries before all `-1` entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    indicators: Vec<i8>,
}

impl Signature {
    /// Signature with `plus` leading `+1` entries and `minus` trailing `-1` entries.
    pub fn new(plus: usize, minus: usize) -> Self {
        let mut indicators = vec![1i8; plus];
        indicators.extend(std::iter::repeat_n(-1i8, minus));
        Signature { indicators }
    }

    /// Signature of `R^{dim}_index`: `dim - index` pluses followed by `index` minuses.
    pub fn with_index(dim: usize, index: usize) -> Self {
        assert!(index <= dim, "index exceeds dimension");
        Signature::new(dim - index, index)
    }

    /// Validates the plus-then-minus ordering.
    pub fn from_indicators(indicators: Vec<i8>) -> Result<Self> {
        let mut seen_minus = false;
        for &e in &indicators {
            match e {
                1 => {
                    if seen_minus {
                        return Err(Error::DimensionMismatch {
                            expected: 0,
                            found: 1,
                        });
                    }
                }
                -1 => seen_minus = true,
                _ => {
                    return Err(Error::DimensionMismatch {
                        expected: 0,
                        found: 1,
                    })
                }
            }
        }
        Ok(Signature { indicators })
    }

    pub fn dim(&self) -> usize {
        self.indicators.len()
    }

    /// Number of `-1` entries (the index `u` of the inner product).
    pub fn index(&self) -> usize {
        self.indicators.iter().filter(|&&e| e == -1).count()
    }

    pub fn indicator(&self, i: usize) -> f64 {
        f64::from(self.indicators[i])
    }

    pub fn indicators(&self) -> &[i8] {
        &self.indicators
    }

    /// Product of all indicators; the sign of `det` of the Gram matrix.
    pub fn det_sign(&self) -> f64 {
        if self.index().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

/// A vector of the ambient pseudo-Euclidean space.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientVector(pub Vec<f64>);

impl AmbientVector {
    pub fn zero(dim: usize) -> Self {
        AmbientVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn add(&self, other: &AmbientVector) -> AmbientVector {
        AmbientVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &AmbientVector) -> AmbientVector {
        AmbientVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, t: f64) -> AmbientVector {
        AmbientVector(self.0.iter().map(|a| a * t).collect())
    }

    /// `self + t * other`.
    pub fn axpy(&self, t: f64, other: &AmbientVector) -> AmbientVector {
        AmbientVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + t * b)
                .collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, a| m.max(a.abs()))
    }
}

impl std::ops::Deref for AmbientVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Index<usize> for AmbientVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Pseudo-Euclidean inner product `sum_i eps_i x_i y_i`.
pub fn inner(x: &AmbientVector, y: &AmbientVector, s: &Signature) -> Result<f64> {
    if x.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: x.dim(),
        });
    }
    if y.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: y.dim(),
        });
    }
    Ok((0..s.dim()).map(|i| s.indicator(i) * x[i] * y[i]).sum())
}

/// Small dense row-major matrix.  Dimensions in this crate never exceed
/// `n + 1 <= 8`, so explicit Gaussian elimination is plenty.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let mut m = Matrix::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m.set(i, i, e);
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &AmbientVector) -> AmbientVector {
        assert_eq!(self.cols, v.dim(), "matrix-vector dimensions differ");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        AmbientVector(out)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, t: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * t).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, a| m.max(a.abs()))
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Matrix> {
        assert_eq!(self.rows, self.cols, "inverse of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let mut pivot = col;
            for r in col + 1..n {
                if a.get(r, col).abs() > a.get(pivot, col).abs() {
                    pivot = r;
                }
            }
            if a.get(pivot, col).abs() < 1e-14 {
                return Err(Error::NonInvertible);
            }
            if pivot != col {
                for j in 0..n {
                    let (x, y) = (a.get(col, j), a.get(pivot, j));
                    a.set(col, j, y);
                    a.set(pivot, j, x);
                    let (x, y) = (inv.get(col, j), inv.get(pivot, j));
                    inv.set(col, j, y);
                    inv.set(pivot, j, x);
                }
            }
            let d = a.get(col, col);
            for j in 0..n {
                a.set(col, j, a.get(col, j) / d);
                inv.set(col, j, inv.get(col, j) / d);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col);
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a.set(r, j, a.get(r, j) - f * a.get(col, j));
                    inv.set(r, j, inv.get(r, j) - f * inv.get(col, j));
                }
            }
        }
        Ok(inv)
    }

    /// Determinant via LU with partial pivoting.
    pub fn det(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut det = 1.0;
        for col in 0..n {
            let mut pivot = col;
            for r in col + 1..n {
                if a.get(r, col).abs() > a.get(pivot, col).abs() {
                    pivot = r;
                }
            }
            if a.get(pivot, col) == 0.0 {
                return 0.0;
            }
            if pivot != col {
                det = -det;
                for j in 0..n {
                    let (x, y) = (a.get(col, j), a.get(pivot, j));
                    a.set(col, j, y);
                    a.set(pivot, j, x);
                }
            }
            det *= a.get(col, col);
            for r in col + 1..n {
                let f = a.get(r, col) / a.get(col, col);
                for j in col..n {
                    a.set(r, j, a.get(r, j) - f * a.get(col, j));
                }
            }
        }
        det
    }

    /// Matrix exponential by scaling-and-squaring with a Taylor series.
    pub fn exp(&self) -> Matrix {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let norm = self.max_abs() * n as f64;
        let squarings = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let scaled = self.scale(0.5f64.powi(squarings as i32));
        let mut term = Matrix::identity(n);
        let mut sum = Matrix::identity(n);
        for k in 1..30 {
            term = term.mul(&scaled).scale(1.0 / k as f64);
            sum = sum.add(&term);
            if term.max_abs() < 1e-18 {
                break;
            }
        }
        let mut result = sum;
        for _ in 0..squarings {
            result = result.mul(&result);
        }
        result
    }
}

/// A linear map that is skew-adjoint for a pseudo-Euclidean inner product:
/// `a_ij = -eps_i eps_j a_ji`.  Such maps are exactly the linear extensions
/// of Killing fields on the unit hyperquadrics of the ambient space.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    entries: Matrix,
    signature: Signature,
}

impl SkewMatrix {
    /// Validates skewness entrywise against the signature.
    pub fn new(entries: Matrix, signature: Signature, tol: f64) -> Result<Self> {
        if entries.n_rows() != signature.dim() || entries.n_cols() != signature.dim() {
            return Err(Error::DimensionMismatch {
                expected: signature.dim(),
                found: entries.n_rows(),
            });
        }
        let residual = skew_residual(&entries, &signature);
        if residual > tol {
            return Err(Error::NotSkew { residual });
        }
        Ok(SkewMatrix { entries, signature })
    }

    pub fn zero(signature: Signature) -> Self {
        let n = signature.dim();
        SkewMatrix {
            entries: Matrix::zeros(n, n),
            signature,
        }
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn apply(&self, x: &AmbientVector) -> AmbientVector {
        self.entries.mul_vec(x)
    }

    /// `A^3`, which is again skew (odd powers of skew maps are skew).
    pub fn cube(&self) -> SkewMatrix {
        let c = self.entries.mul(&self.entries).mul(&self.entries);
        SkewMatrix {
            entries: c,
            signature: self.signature.clone(),
        }
    }

    pub fn scale(&self, t: f64) -> SkewMatrix {
        SkewMatrix {
            entries: self.entries.scale(t),
            signature: self.signature.clone(),
        }
    }
}

fn skew_residual(a: &Matrix, s: &Signature) -> f64 {
    let n = s.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let r = (a.get(i, j) + s.indicator(i) * s.indicator(j) * a.get(j, i)).abs();
            worst = worst.max(r);
        }
    }
    worst
}

/// Entrywise skewness test `|a_ij + eps_i eps_j a_ji| <= tol`.
pub fn is_skew(a: &Matrix, s: &Signature, tol: f64) -> bool {
    a.n_rows() == s.dim() && a.n_cols() == s.dim() && skew_residual(a, s) <= tol
}

/// Pseudo-length `<A,A> = sum_i eps_i <A e_i, A e_i>` of a skew map,
/// evaluated over the standard basis.  The value is basis-independent;
/// over the standard basis it reduces to `sum_{ij} eps_i eps_j a_ji^2`.
pub fn skew_norm(a: &SkewMatrix) -> f64 {
    let s = a.signature();
    let n = s.dim();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += s.indicator(i) * s.indicator(j) * a.entries().get(j, i).powi(2);
        }
    }
    total
}

/// A pseudo-orthonormal system: `<E_i, E_j> = indicator_i delta_ij`.
#[derive(Debug, Clone)]
pub struct Frame {
    pub vectors: Vec<AmbientVector>,
    pub indicators: Vec<i8>,
}

impl Frame {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Worst deviation from pseudo-orthonormality.
    pub fn residual(&self, s: &Signature) -> Result<f64> {
        let mut worst = 0.0f64;
        for i in 0..self.len() {
            for j in 0..self.len() {
                let ip = inner(&self.vectors[i], &self.vectors[j], s)?;
                let target = if i == j {
                    f64::from(self.indicators[i])
                } else {
                    0.0
                };
                worst = worst.max((ip - target).abs());
            }
        }
        Ok(worst)
    }
}

/// Threshold below which a projected pseudo-norm counts as null.
pub const NULL_PIVOT_TOL: f64 = 1e-8;

/// Pivoted Gram-Schmidt core: extracts pseudo-orthonormal vectors from the
/// candidate list until every remaining candidate projects to pseudo-norm
/// below [`NULL_PIVOT_TOL`].  At each step the candidate maximising `|<v,v>|`
/// after projection becomes the next frame vector.  Never fails on dependent
/// input; the caller decides whether a short frame is an error.  Returns the
/// frame and the best rejected pseudo-norm (0 when all candidates were used).
pub fn pivoted_frame(candidates: &[AmbientVector], s: &Signature) -> Result<(Frame, f64)> {
    let mut remaining: Vec<AmbientVector> = candidates.to_vec();
    let mut vectors: Vec<AmbientVector> = Vec::new();
    let mut indicators: Vec<i8> = Vec::new();
    let mut rejected = 0.0f64;

    while !remaining.is_empty() {
        let mut best: Option<(usize, AmbientVector, f64)> = None;
        for (idx, cand) in remaining.iter().enumerate() {
            let mut w = cand.clone();
            for (e, &ind) in vectors.iter().zip(&indicators) {
                let c = f64::from(ind) * inner(&w, e, s)?;
                w = w.axpy(-c, e);
            }
            let norm = inner(&w, &w, s)?;
            match &best {
                Some((_, _, n)) if norm.abs() <= n.abs() => {}
                _ => best = Some((idx, w, norm)),
            }
        }
        let (idx, w, norm) = best.expect("remaining is non-empty");
        if norm.abs() < NULL_PIVOT_TOL {
            rejected = norm.abs();
            break;
        }
        let scale = 1.0 / norm.abs().sqrt();
        vectors.push(w.scale(scale));
        indicators.push(if norm > 0.0 { 1 } else { -1 });
        remaining.remove(idx);
    }

    // Deterministic presentation: positive indicators first, preserving the
    // relative pivot order inside each block.
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    order.sort_by_key(|&i| (indicators[i] != 1) as u8);
    let vectors = order.iter().map(|&i| vectors[i].clone()).collect();
    let indicators = order.iter().map(|&i| indicators[i]).collect();
    Ok((
        Frame {
            vectors,
            indicators,
        },
        rejected,
    ))
}

/// Pivoted Gram-Schmidt for an indefinite inner product.
///
/// Expects the input to be linearly independent and to span a subspace on
/// which the induced form is non-degenerate; if the pivoting core cannot
/// extract one frame vector per input, the subspace is degenerate (or
/// numerically so) and `NullPivot` is returned.
pub fn orthonormalize(basis: &[AmbientVector], s: &Signature) -> Result<Frame> {
    let (frame, rejected) = pivoted_frame(basis, s)?;
    if frame.len() < basis.len() {
        return Err(Error::NullPivot {
            best: rejected,
            threshold: NULL_PIVOT_TOL,
        });
    }
    Ok(frame)
}

fn respects_form(p: &Matrix, s_dom: &Signature, s_cod: &Signature, sign: f64, tol: f64) -> bool {
    if p.n_rows() != s_cod.dim() || p.n_cols() != s_dom.dim() {
        return false;
    }
    let n = s_dom.dim();
    for i in 0..n {
        for j in 0..n {
            // <P e_i, P e_j>_cod compared against sign * <e_i, e_j>_dom.
            let mut ip = 0.0;
            for k in 0..s_cod.dim() {
                ip += s_cod.indicator(k) * p.get(k, i) * p.get(k, j);
            }
            let target = if i == j {
                sign * s_dom.indicator(i)
            } else {
                0.0
            };
            if (ip - target).abs() > tol {
                return false;
            }
        }
    }
    true
}

/// `<Px, Py>_cod = <x, y>_dom` on all basis pairs, within `tol`.
pub fn is_isometry(p: &Matrix, s_dom: &Signature, s_cod: &Signature, tol: f64) -> bool {
    respects_form(p, s_dom, s_cod, 1.0, tol)
}

/// `<Px, Py>_cod = -<x, y>_dom` on all basis pairs, within `tol`.
pub fn is_anti_isometry(p: &Matrix, s_dom: &Signature, s_cod: &Signature, tol: f64) -> bool {
    respects_form(p, s_dom, s_cod, -1.0, tol)
}

/// Pseudo-orthonormal frame whose first vector is the normalisation of the
/// given non-null vector, completed by pivoted Gram-Schmidt over the
/// standard basis (completion sorted with positive indicators first).
pub fn frame_through(vector: &AmbientVector, s: &Signature) -> Result<Frame> {
    let len = inner(vector, vector, s)?;
    if len.abs() < NULL_PIVOT_TOL {
        return Err(Error::NullPivot {
            best: len.abs(),
            threshold: NULL_PIVOT_TOL,
        });
    }
    let head = vector.scale(1.0 / len.abs().sqrt());
    let head_indicator: i8 = if len > 0.0 { 1 } else { -1 };
    let dim = s.dim();
    let mut vectors = vec![head.clone()];
    let mut indicators = vec![head_indicator];
    let mut candidates: Vec<AmbientVector> = (0..dim)
        .map(|i| {
            let mut e = AmbientVector::zero(dim);
            e.0[i] = 1.0;
            e
        })
        .collect();
    while vectors.len() < dim && !candidates.is_empty() {
        let mut best: Option<(usize, AmbientVector, f64)> = None;
        for (idx, cand) in candidates.iter().enumerate() {
            let mut w = cand.clone();
            for (e, &ind) in vectors.iter().zip(&indicators) {
                let c = f64::from(ind) * inner(&w, e, s)?;
                w = w.axpy(-c, e);
            }
            let norm = inner(&w, &w, s)?;
            match &best {
                Some((_, _, n)) if norm.abs() <= n.abs() => {}
                _ => best = Some((idx, w, norm)),
            }
        }
        let (idx, w, norm) = best.expect("candidates non-empty");
        candidates.remove(idx);
        if norm.abs() < NULL_PIVOT_TOL {
            continue;
        }
        vectors.push(w.scale(1.0 / norm.abs().sqrt()));
        indicators.push(if norm > 0.0 { 1 } else { -1 });
    }
    if vectors.len() < dim {
        return Err(Error::NullPivot {
            best: 0.0,
            threshold: NULL_PIVOT_TOL,
        });
    }
    // Deterministic completion order: positive indicators first after the
    // seeded head vector.
    let mut order: Vec<usize> = (1..dim).collect();
    order.sort_by_key(|&i| (indicators[i] != 1) as u8);
    let mut sorted_vectors = vec![vectors[0].clone()];
    let mut sorted_indicators = vec![indicators[0]];
    for &i in &order {
        sorted_vectors.push(vectors[i].clone());
        sorted_indicators.push(indicators[i]);
    }
    Ok(Frame {
        vectors: sorted_vectors,
        indicators: sorted_indicators,
    })
}

/// An isometry of the form carrying `from` to `to`; the two vectors must
/// have equal, non-null pseudo-length.  Built by aligning the frames
/// through the two vectors.
pub fn isometry_mapping(from: &AmbientVector, to: &AmbientVector, s: &Signature) -> Result<Matrix> {
    let len_from = inner(from, from, s)?;
    let len_to = inner(to, to, s)?;
    if (len_from - len_to).abs() > 1e-9 * (1.0 + len_from.abs()) {
        return Err(Error::QuadricMapMismatch {
            residual: (len_from - len_to).abs(),
        });
    }
    let f1 = frame_through(from, s)?;
    let f2 = frame_through(to, s)?;
    if f1.indicators != f2.indicators {
        return Err(Error::DegenerateTangent);
    }
    let columns = |frame: &Frame| {
        let dim = s.dim();
        let mut m = Matrix::zeros(dim, dim);
        for (j, v) in frame.vectors.iter().enumerate() {
            for i in 0..dim {
                m.set(i, j, v[i]);
            }
        }
        m
    };
    let m1 = columns(&f1);
    let m2 = columns(&f2);
    let p = m2.mul(&m1.inverse()?);
    // Scale correction: frames normalise the seed vectors, so P carries
    // from/|from| to to/|to|; equal lengths make it carry from to to.
    Ok(p)
}

/// A random skew map for the signature, entries of magnitude about `scale`.
pub fn random_skew(s: &Signature, scale: f64, rng: &mut SplitMix64) -> SkewMatrix {
    let n = s.dim();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = scale * rng.next_symmetric();
            m.set(i, j, v);
            m.set(j, i, -s.indicator(i) * s.indicator(j) * v);
        }
    }
    SkewMatrix {
        entries: m,
        signature: s.clone(),
    }
}

/// A random element of the isometry group, as the exponential of a random
/// skew map.  `exp` of a skew-adjoint map preserves the inner product.
pub fn random_isometry(s: &Signature, rng: &mut SplitMix64) -> Matrix {
    random_isometry_with_scale(s, 0.7, rng)
}

/// As [`random_isometry`], with the generator magnitude under the caller's
/// control; indefinite signatures produce boost factors of order
/// `exp(scale)`, which matters when residual budgets are tight.
pub fn random_isometry_with_scale(s: &Signature, scale: f64, rng: &mut SplitMix64) -> Matrix {
    random_skew(s, scale, rng).entries().exp()
}
