//! Rational functions of a real variable with complex coefficients.
//!
//! Only what the symbol integrands need: pointwise evaluation, ring
//! operations, conjugation on the real line and the `|λ| → ∞` limit of `|R|`.

use std::ops::{Add, Mul, Sub};

use crate::numerics::{C64, ONE, ZERO};

/// Coefficients below this fraction of the largest are treated as cancelled.
const TRIM_REL: f64 = 1e-14;

/// `Σ cₖ λᵏ`, ascending coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly(Vec<C64>);

impl Poly {
    pub fn new(coeffs: Vec<C64>) -> Self {
        let mut p = Poly(coeffs);
        p.trim();
        p
    }

    pub fn real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.0
    }

    fn trim(&mut self) {
        let scale = self.0.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while let Some(last) = self.0.last() {
            if last.norm() <= TRIM_REL * scale || last.norm() == 0.0 {
                self.0.pop();
            } else {
                break;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn leading(&self) -> C64 {
        self.0.last().copied().unwrap_or(ZERO)
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.0.iter().rev().fold(ZERO, |acc, &c| acc * x + c)
    }

    /// The polynomial whose values on the real line are the conjugates.
    pub fn conj(&self) -> Self {
        Poly(self.0.iter().map(|c| c.conj()).collect())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.0.iter().map(|&c| c * s).collect())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.0.len().max(rhs.0.len());
        let get = |p: &Poly, k: usize| p.0.get(k).copied().unwrap_or(ZERO);
        Poly::new((0..n).map(|k| get(self, k) + get(rhs, k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &rhs.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly(Vec::new());
        }
        let mut out = vec![ZERO; self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

/// `num / den`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rational {
    pub num: Poly,
    pub den: Poly,
}

impl Rational {
    pub fn poly(p: Poly) -> Self {
        Self {
            num: p,
            den: Poly::constant(ONE),
        }
    }

    pub fn new(num: Poly, den: Poly) -> Self {
        Self { num, den }
    }

    pub fn constant(c: C64) -> Self {
        Self::poly(Poly::constant(c))
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.num.eval(x) / self.den.eval(x)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.num.conj(), self.den.conj())
    }

    pub fn recip(&self) -> Self {
        Self::new(self.den.clone(), self.num.clone())
    }

    /// `lim_{|λ|→∞} |R(λ)|`, possibly infinite.
    pub fn tail_abs(&self) -> f64 {
        match (self.num.degree(), self.den.degree()) {
            (None, _) => 0.0,
            (Some(_), None) => f64::INFINITY,
            (Some(p), Some(q)) if p < q => 0.0,
            (Some(p), Some(q)) if p > q => f64::INFINITY,
            _ => (self.num.leading() / self.den.leading()).norm(),
        }
    }
}

impl Add for &Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        if self.den == rhs.den {
            return Rational::new(&self.num + &rhs.num, self.den.clone());
        }
        Rational::new(&(&self.num * &rhs.den) + &(&rhs.num * &self.den), &self.den * &rhs.den)
    }
}

impl Sub for &Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        self + &Rational::new(rhs.num.scale(C64::new(-1.0, 0.0)), rhs.den.clone())
    }
}

impl Mul for &Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        Rational::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}
