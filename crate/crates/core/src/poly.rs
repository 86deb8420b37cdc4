//! Sparse bivariate polynomials with exact coefficients.
//!
//! Terms live in a `BTreeMap` keyed by the exponent pair `(i, j)` of
//! `x^i y^j`, so iteration order is the canonical `(i, j)` ordering and two
//! polynomials compare equal exactly when their monomial lists agree.
//!
//! The coefficient ring is generic. [`Rational`] is used for concrete
//! parameter values; [`ParamPoly`] (a univariate polynomial in the damping
//! parameter `a`) lets the chart and blow-up identities be checked with the
//! parameter kept symbolic.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Coefficient ring for [`Poly`].
pub trait Coeff:
    Clone + PartialEq + fmt::Debug + Zero + One + Sub<Output = Self> + Neg<Output = Self>
{
    fn from_i64(k: i64) -> Self;
}

impl Coeff for Rational {
    fn from_i64(k: i64) -> Self {
        Rational::from_integer(BigInt::from(k))
    }
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses a plain decimal literal (`"-0.25"`, `"3"`, `"1.5e-2"`) into an exact rational.
pub fn rational_from_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match body.find('.') {
        Some(k) => (&body[..k], &body[k + 1..]),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Exact rational for a finite `f64`, taken from its shortest round-trip
/// decimal form, so `0.1` becomes `1/10` rather than its binary expansion.
pub fn rational_from_f64(x: f64) -> Rational {
    assert!(x.is_finite(), "non-finite value has no rational form");
    rational_from_decimal(&format!("{x}")).expect("f64 Display is a decimal literal")
}

/// Renders a rational as an exact decimal string when the expansion
/// terminates, otherwise `None`.
pub fn terminating_decimal(r: &Rational) -> Option<String> {
    let mut den = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut p2, mut p5) = (0usize, 0usize);
    while (&den % &two).is_zero() {
        den /= &two;
        p2 += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        p5 += 1;
    }
    if !den.is_one() {
        return None;
    }
    let k = p2.max(p5);
    let scaled: BigInt = r.numer() * num_traits::pow(BigInt::from(10), k) / r.denom();
    let neg = scaled.is_negative();
    let mut digits = scaled.abs().to_string();
    if k == 0 {
        return Some(if neg { format!("-{digits}") } else { digits });
    }
    if digits.len() <= k {
        digits = format!("{}{}", "0".repeat(k + 1 - digits.len()), digits);
    }
    let (ip, fp) = digits.split_at(digits.len() - k);
    let fp = fp.trim_end_matches('0');
    let body = if fp.is_empty() { ip.to_string() } else { format!("{ip}.{fp}") };
    Some(if neg { format!("-{body}") } else { body })
}

/// Univariate polynomial in the parameter `a` with rational coefficients,
/// stored densely by ascending power with no trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ParamPoly(Vec<Rational>);

impl ParamPoly {
    /// The parameter `a` itself.
    pub fn param() -> Self {
        ParamPoly(vec![Rational::zero(), Rational::one()])
    }

    pub fn constant(c: Rational) -> Self {
        ParamPoly(vec![c]).trimmed()
    }

    pub fn from_coeffs(c: Vec<Rational>) -> Self {
        ParamPoly(c).trimmed()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn eval(&self, a: &Rational) -> Rational {
        self.0.iter().rev().fold(Rational::zero(), |acc, c| acc * a + c)
    }

    fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }
}

impl fmt::Display for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let m = c.abs();
            match k {
                0 => write!(f, "{m}")?,
                _ => {
                    if !m.is_one() {
                        write!(f, "{m}")?;
                    }
                    write!(f, "a")?;
                    if k > 1 {
                        write!(f, "^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl Add for ParamPoly {
    type Output = ParamPoly;
    fn add(self, rhs: ParamPoly) -> ParamPoly {
        let len = self.0.len().max(rhs.0.len());
        let out = (0..len)
            .map(|k| {
                let l = self.0.get(k).cloned().unwrap_or_else(Rational::zero);
                let r = rhs.0.get(k).cloned().unwrap_or_else(Rational::zero);
                l + r
            })
            .collect();
        ParamPoly(out).trimmed()
    }
}

impl Neg for ParamPoly {
    type Output = ParamPoly;
    fn neg(self) -> ParamPoly {
        ParamPoly(self.0.into_iter().map(|c| -c).collect())
    }
}

impl Sub for ParamPoly {
    type Output = ParamPoly;
    fn sub(self, rhs: ParamPoly) -> ParamPoly {
        self + (-rhs)
    }
}

impl Mul for ParamPoly {
    type Output = ParamPoly;
    fn mul(self, rhs: ParamPoly) -> ParamPoly {
        if self.0.is_empty() || rhs.0.is_empty() {
            return ParamPoly::default();
        }
        let mut out = vec![Rational::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, l) in self.0.iter().enumerate() {
            for (j, r) in rhs.0.iter().enumerate() {
                out[i + j] += l * r;
            }
        }
        ParamPoly(out).trimmed()
    }
}

impl Zero for ParamPoly {
    fn zero() -> Self {
        ParamPoly::default()
    }
    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

impl One for ParamPoly {
    fn one() -> Self {
        ParamPoly(vec![Rational::one()])
    }
}

impl Coeff for ParamPoly {
    fn from_i64(k: i64) -> Self {
        ParamPoly::constant(Rational::from_i64(k))
    }
}

/// Sparse polynomial in two variables.
#[derive(Clone, PartialEq, Debug)]
pub struct Poly<C> {
    terms: BTreeMap<(u32, u32), C>,
}

impl<C: Coeff> Default for Poly<C> {
    fn default() -> Self {
        Poly::zero()
    }
}

impl<C: Coeff> Poly<C> {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        Poly::monomial(0, 0, c)
    }

    pub fn monomial(i: u32, j: u32, c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((i, j), c);
        }
        Poly { terms }
    }

    pub fn x() -> Self {
        Poly::monomial(1, 0, C::one())
    }

    pub fn y() -> Self {
        Poly::monomial(0, 1, C::one())
    }

    /// Builds a polynomial from possibly repeated terms; like terms are
    /// combined and zero coefficients dropped.
    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), C)>>(iter: I) -> Self {
        let mut p = Poly::zero();
        for (e, c) in iter {
            p.add_term(e, c);
        }
        p
    }

    /// Builds a polynomial from terms with signed exponents. Returns `None`
    /// when a negative exponent survives cancellation.
    pub fn from_laurent<I: IntoIterator<Item = ((i64, i64), C)>>(iter: I) -> Option<Self> {
        let mut acc: BTreeMap<(i64, i64), C> = BTreeMap::new();
        for (e, c) in iter {
            let slot = acc.entry(e).or_insert_with(C::zero);
            *slot = slot.clone() + c;
        }
        let mut p = Poly::zero();
        for ((i, j), c) in acc {
            if c.is_zero() {
                continue;
            }
            if i < 0 || j < 0 {
                return None;
            }
            p.terms.insert((i as u32, j as u32), c);
        }
        Some(p)
    }

    fn add_term(&mut self, e: (u32, u32), c: C) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&e) {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(e, sum);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: u32, j: u32) -> C {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(C::zero)
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).max()
    }

    pub fn scale(&self, c: &C) -> Self {
        Poly::from_terms(self.terms.iter().map(|(e, v)| (*e, v.clone() * c.clone())))
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        Poly::from_terms(self.terms.iter().map(|(e, c)| (*e, f(c))))
    }

    /// Remaps every exponent pair, e.g. for monomial substitutions.
    pub fn map_exponents(&self, f: impl Fn(u32, u32) -> (u32, u32)) -> Self {
        Poly::from_terms(self.terms.iter().map(|(&(i, j), c)| (f(i, j), c.clone())))
    }

    pub fn swap_vars(&self) -> Self {
        self.map_exponents(|i, j| (j, i))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Poly::constant(C::one());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn deriv_x(&self) -> Self {
        Poly::from_terms(
            self.terms
                .iter()
                .filter(|((i, _), _)| *i > 0)
                .map(|(&(i, j), c)| ((i - 1, j), C::from_i64(i as i64) * c.clone())),
        )
    }

    pub fn deriv_y(&self) -> Self {
        Poly::from_terms(
            self.terms
                .iter()
                .filter(|((_, j), _)| *j > 0)
                .map(|(&(i, j), c)| ((i, j - 1), C::from_i64(j as i64) * c.clone())),
        )
    }

    /// Substitutes `x -> sx`, `y -> sy`.
    pub fn compose(&self, sx: &Poly<C>, sy: &Poly<C>) -> Self {
        let max_i = self.terms.keys().map(|e| e.0).max().unwrap_or(0);
        let max_j = self.terms.keys().map(|e| e.1).max().unwrap_or(0);
        let powers = |base: &Poly<C>, k: u32| {
            let mut v = vec![Poly::constant(C::one())];
            for m in 1..=k as usize {
                let next = &v[m - 1] * base;
                v.push(next);
            }
            v
        };
        let px = powers(sx, max_i);
        let py = powers(sy, max_j);
        let mut out = Poly::zero();
        for (&(i, j), c) in &self.terms {
            let t = (&px[i as usize] * &py[j as usize]).scale(c);
            out = &out + &t;
        }
        out
    }

    /// Largest `k` with `x^k` dividing every term (0 for the zero polynomial).
    pub fn x_valuation(&self) -> u32 {
        self.terms.keys().map(|e| e.0).min().unwrap_or(0)
    }

    pub fn y_valuation(&self) -> u32 {
        self.terms.keys().map(|e| e.1).min().unwrap_or(0)
    }

    /// Exact division by `x^kx y^ky`; `None` if some term is not divisible.
    pub fn div_monomial(&self, kx: u32, ky: u32) -> Option<Self> {
        let mut out = Poly::zero();
        for (&(i, j), c) in &self.terms {
            if i < kx || j < ky {
                return None;
            }
            out.terms.insert((i - kx, j - ky), c.clone());
        }
        Some(out)
    }

    /// Coefficients of `p(x, 0)` by ascending power of `x`.
    pub fn restrict_y0(&self) -> Vec<C> {
        let deg = self.terms.keys().filter(|e| e.1 == 0).map(|e| e.0).max();
        let Some(deg) = deg else { return Vec::new() };
        let mut v = vec![C::zero(); deg as usize + 1];
        for (&(i, j), c) in &self.terms {
            if j == 0 {
                v[i as usize] = c.clone();
            }
        }
        v
    }

    /// Coefficients of `p(0, y)` by ascending power of `y`.
    pub fn restrict_x0(&self) -> Vec<C> {
        self.swap_vars().restrict_y0()
    }

    /// Lowest total degree among the terms.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).min()
    }
}

impl Poly<Rational> {
    pub fn eval_exact(&self, x: &Rational, y: &Rational) -> Rational {
        self.terms.iter().fold(Rational::zero(), |acc, (&(i, j), c)| {
            acc + c * num_traits::pow(x.clone(), i as usize) * num_traits::pow(y.clone(), j as usize)
        })
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        Horner::new(self).eval(x, y)
    }
}

impl Poly<ParamPoly> {
    /// Instantiates the symbolic parameter.
    pub fn at(&self, a: &Rational) -> Poly<Rational> {
        self.map_coeffs(|c| c.eval(a))
    }
}

impl<C: Coeff> Add for &Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: &Poly<C>) -> Poly<C> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl<C: Coeff> Sub for &Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: &Poly<C>) -> Poly<C> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl<C: Coeff> Mul for &Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: &Poly<C>) -> Poly<C> {
        let mut out = Poly::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &rhs.terms {
                out.add_term((i1 + i2, j1 + j2), c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<C: Coeff> Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        Poly { terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<C: Coeff> $tr for Poly<C> {
            type Output = Poly<C>;
            fn $m(self, rhs: Poly<C>) -> Poly<C> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<C: Coeff> Neg for Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        -&self
    }
}

impl<C: Coeff + fmt::Display> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (&(i, j), c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            match i {
                0 => {}
                1 => write!(f, "*x")?,
                _ => write!(f, "*x^{i}")?,
            }
            match j {
                0 => {}
                1 => write!(f, "*y")?,
                _ => write!(f, "*y^{j}")?,
            }
        }
        Ok(())
    }
}

/// Floating-point evaluator: `rows[j][i]` holds the coefficient of `x^i y^j`,
/// evaluated by Horner's rule in `x` for each row and then in `y`.
#[derive(Clone, Debug, Default)]
pub struct Horner {
    rows: Vec<Vec<f64>>,
}

impl Horner {
    pub fn new(p: &Poly<Rational>) -> Self {
        let Some(max_j) = p.terms.keys().map(|e| e.1).max() else {
            return Horner::default();
        };
        let mut rows = vec![Vec::new(); max_j as usize + 1];
        for (&(i, j), c) in &p.terms {
            let row = &mut rows[j as usize];
            if row.len() <= i as usize {
                row.resize(i as usize + 1, 0.0);
            }
            row[i as usize] = rat_to_f64(c);
        }
        Horner { rows }
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        for row in self.rows.iter().rev() {
            let r = row.iter().rev().fold(0.0, |s, c| s * x + c);
            acc = acc * y + r;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(terms: &[((u32, u32), i64)]) -> Poly<Rational> {
        Poly::from_terms(terms.iter().map(|&(e, c)| (e, Rational::from_i64(c))))
    }

    #[test]
    fn canonical_form_drops_cancelled_terms() {
        let a = p(&[((1, 0), 2), ((0, 1), 1)]);
        let b = p(&[((1, 0), -2)]);
        let s = &a + &b;
        assert_eq!(s.len(), 1);
        assert_eq!(s.coeff(0, 1), Rational::one());
        assert_eq!(s.degree(), Some(1));
        assert!((&a - &a).is_empty());
    }

    #[test]
    fn compose_and_derivatives() {
        // (x + y)^2 composed with x -> x y, y -> 1
        let q = (&Poly::<Rational>::x() + &Poly::y()).pow(2);
        let c = q.compose(&(&Poly::x() * &Poly::y()), &Poly::constant(Rational::one()));
        assert_eq!(c, p(&[((2, 2), 1), ((1, 1), 2), ((0, 0), 1)]));
        assert_eq!(q.deriv_x(), p(&[((1, 0), 2), ((0, 1), 2)]));
    }

    #[test]
    fn laurent_rejects_negative_exponents() {
        let ok = Poly::from_laurent(vec![((-1, 0), Rational::one()), ((-1, 0), -Rational::one())]);
        assert_eq!(ok, Some(Poly::zero()));
        assert!(Poly::from_laurent(vec![((0, -2), Rational::one())]).is_none());
    }

    #[test]
    fn decimal_conversions() {
        assert_eq!(rational_from_f64(0.1), rat(1, 10));
        assert_eq!(rational_from_decimal("-2.5e-1"), Some(rat(-1, 4)));
        assert_eq!(rational_from_decimal("abc"), None);
        assert_eq!(terminating_decimal(&rat(-1, 8)).as_deref(), Some("-0.125"));
        assert_eq!(terminating_decimal(&rat(7, 1)).as_deref(), Some("7"));
        assert_eq!(terminating_decimal(&rat(1, 3)), None);
    }

    #[test]
    fn param_poly_ring() {
        let a = ParamPoly::param();
        let e = (a.clone() + ParamPoly::one()) * (a.clone() - ParamPoly::one());
        assert_eq!(e, ParamPoly::from_coeffs(vec![rat(-1, 1), rat(0, 1), rat(1, 1)]));
        assert_eq!(e.eval(&rat(3, 1)), rat(8, 1));
        assert_eq!(format!("{e}"), "a^2 - 1");
    }

    #[test]
    fn horner_matches_exact() {
        let q = p(&[((0, 0), 1), ((3, 1), -2), ((1, 4), 5)]);
        let h = Horner::new(&q);
        let (x, y) = (0.7f64, -1.3f64);
        let exact = 1.0 - 2.0 * x.powi(3) * y + 5.0 * x * y.powi(4);
        assert!((h.eval(x, y) - exact).abs() < 1e-14);
    }
}
