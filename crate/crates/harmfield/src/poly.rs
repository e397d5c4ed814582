//! Multivariate polynomials with real coefficients.
//!
//! Every vector field treated by this crate is polynomial in the ambient
//! coordinates (conformal gradient fields have degree 2, Killing fields
//! degree 1), so covariant derivatives can be taken by exact coefficient
//! differentiation instead of finite differences.  Monomials are exponent
//! vectors keyed in a `BTreeMap` to keep all iteration orders, and hence
//! all floating-point summation orders, deterministic.

use std::collections::BTreeMap;

/// Polynomial in `n_vars` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    n_vars: usize,
    terms: BTreeMap<Vec<u16>, f64>,
}

impl Poly {
    pub fn zero(n_vars: usize) -> Self {
        Poly {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_vars: usize, c: f64) -> Self {
        let mut p = Poly::zero(n_vars);
        if c != 0.0 {
            p.terms.insert(vec![0; n_vars], c);
        }
        p
    }

    /// The coordinate function `x_i`.
    pub fn var(n_vars: usize, i: usize) -> Self {
        assert!(i < n_vars);
        let mut exps = vec![0u16; n_vars];
        exps[i] = 1;
        let mut p = Poly::zero(n_vars);
        p.terms.insert(exps, 1.0);
        p
    }

    pub fn from_terms(n_vars: usize, terms: &[(f64, Vec<u16>)]) -> Self {
        let mut p = Poly::zero(n_vars);
        for (c, e) in terms {
            assert_eq!(e.len(), n_vars, "exponent vector has wrong arity");
            p.add_term(e.clone(), *c);
        }
        p
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u16>, &f64)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| u32::from(x)).sum())
            .max()
            .unwrap_or(0)
    }

    fn add_term(&mut self, exps: Vec<u16>, c: f64) {
        if c == 0.0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if *slot.get() == 0.0 {
                    slot.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.n_vars, other.n_vars);
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, t: f64) -> Poly {
        if t == 0.0 {
            return Poly::zero(self.n_vars);
        }
        Poly {
            n_vars: self.n_vars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * t)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.n_vars, other.n_vars);
        let mut out = Poly::zero(self.n_vars);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let exps: Vec<u16> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(exps, ca * cb);
            }
        }
        out
    }

    /// Exact partial derivative with respect to `x_i`.
    pub fn diff(&self, i: usize) -> Poly {
        assert!(i < self.n_vars);
        let mut out = Poly::zero(self.n_vars);
        for (e, &c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut exps = e.clone();
            exps[i] -= 1;
            out.add_term(exps, c * f64::from(e[i]));
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n_vars);
        let mut total = 0.0;
        for (e, &c) in &self.terms {
            let mut m = c;
            for (xi, &ei) in x.iter().zip(e) {
                match ei {
                    0 => {}
                    1 => m *= xi,
                    2 => m *= xi * xi,
                    _ => m *= xi.powi(i32::from(ei)),
                }
            }
            total += m;
        }
        total
    }

    /// Substitutes `x -> M x`: returns `p(Mx)` for a square matrix given as
    /// rows of coefficients (`row i` holds the expansion of old `x_i`).
    pub fn compose_linear(&self, rows: &[Vec<f64>]) -> Poly {
        assert_eq!(rows.len(), self.n_vars);
        let linears: Vec<Poly> = rows
            .iter()
            .map(|row| {
                assert_eq!(row.len(), self.n_vars);
                let mut p = Poly::zero(self.n_vars);
                for (j, &c) in row.iter().enumerate() {
                    if c != 0.0 {
                        p = p.add(&Poly::var(self.n_vars, j).scale(c));
                    }
                }
                p
            })
            .collect();
        let mut out = Poly::zero(self.n_vars);
        for (e, &c) in &self.terms {
            let mut m = Poly::constant(self.n_vars, c);
            for (i, &ei) in e.iter().enumerate() {
                for _ in 0..ei {
                    m = m.mul(&linears[i]);
                }
            }
            out = out.add(&m);
        }
        out
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().fold(0.0f64, |m, c| m.max(c.abs()))
    }
}
