//! Exact rational arithmetic for the metric-parameter solver.
//!
//! Classifying metric parameters comes down to deciding whether polynomial
//! coefficients vanish *exactly*; floating point misclassifies boundary
//! cases such as `q = 0` against `q -> 0`.  The quantities involved are
//! tiny integers and their quotients, so a reduced `i128` fraction is
//! ample — arithmetic panics on the (unreachable in practice) overflow
//! rather than silently wrapping.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// A reduced fraction `num/den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rational {
    num: i128,
    den: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };
    pub const ONE: Rational = Rational { num: 1, den: 1 };

    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd(num, den).max(1);
        Rational {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn from_int(n: i64) -> Self {
        Rational {
            num: i128::from(n),
            den: 1,
        }
    }

    pub fn num(&self) -> i128 {
        self.num
    }

    pub fn den(&self) -> i128 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn add(&self, other: &Rational) -> Rational {
        Rational::new(
            self.num
                .checked_mul(other.den)
                .and_then(|a| a.checked_add(other.num.checked_mul(self.den).unwrap()))
                .expect("rational overflow"),
            self.den.checked_mul(other.den).expect("rational overflow"),
        )
    }

    pub fn sub(&self, other: &Rational) -> Rational {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Rational) -> Rational {
        Rational::new(
            self.num.checked_mul(other.num).expect("rational overflow"),
            self.den.checked_mul(other.den).expect("rational overflow"),
        )
    }

    pub fn div(&self, other: &Rational) -> Rational {
        assert!(!other.is_zero(), "division by zero rational");
        Rational::new(
            self.num.checked_mul(other.den).expect("rational overflow"),
            self.den.checked_mul(other.num).expect("rational overflow"),
        )
    }

    pub fn neg(&self) -> Rational {
        Rational {
            num: -self.num,
            den: self.den,
        }
    }

    /// Best rational approximation by continued fractions, accepted only
    /// when it reproduces `x` within `tol`; used to recognise exact
    /// rational inputs that arrive as floating-point values.
    pub fn approximate(x: f64, max_den: i128, tol: f64) -> Option<Rational> {
        if !x.is_finite() {
            return None;
        }
        let negative = x < 0.0;
        let mut value = x.abs();
        let (mut h0, mut h1) = (0i128, 1i128);
        let (mut k0, mut k1) = (1i128, 0i128);
        for _ in 0..64 {
            let a = value.floor();
            if a > max_den as f64 {
                break;
            }
            let ai = a as i128;
            let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
            let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
            if k2 > max_den {
                break;
            }
            h0 = h1;
            h1 = h2;
            k0 = k1;
            k1 = k2;
            let approx = h1 as f64 / k1 as f64;
            if (approx - x.abs()).abs() <= tol {
                let num = if negative { -h1 } else { h1 };
                return Some(Rational::new(num, k1));
            }
            let frac = value - a;
            if frac.abs() < 1e-15 {
                break;
            }
            value = 1.0 / frac;
        }
        None
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Solution set of `a x + b = 0` over the rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinearSolutions {
    /// Unique root `-b/a`.
    One(Rational),
    /// `0 = 0`: every rational solves.
    All,
    /// `0 = b != 0`: no solution.
    None,
}

pub fn solve_linear(a: &Rational, b: &Rational) -> LinearSolutions {
    if a.is_zero() {
        if b.is_zero() {
            LinearSolutions::All
        } else {
            LinearSolutions::None
        }
    } else {
        LinearSolutions::One(b.neg().div(a))
    }
}

/// Intersection of two linear solution sets.
pub fn intersect(a: LinearSolutions, b: LinearSolutions) -> LinearSolutions {
    use LinearSolutions::*;
    match (a, b) {
        (None, _) | (_, None) => None,
        (All, other) | (other, All) => other,
        (One(x), One(y)) => {
            if x == y {
                One(x)
            } else {
                None
            }
        }
    }
}
