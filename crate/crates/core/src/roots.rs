//! Real roots of univariate polynomials with rational coefficients.
//!
//! Exact rational roots are peeled off first (rational root theorem), then the
//! deflated remainder is isolated numerically: the real roots of `p'` split the
//! line into monotone pieces, each of which holds at most one root.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::poly::{rat_to_f64, Rational};

/// A real root, exact when it came from the rational-candidate pass.
#[derive(Clone, Debug, PartialEq)]
pub enum Root {
    Exact(Rational),
    Approx(f64),
}

impl Root {
    pub fn value(&self) -> f64 {
        match self {
            Root::Exact(r) => rat_to_f64(r),
            Root::Approx(x) => *x,
        }
    }
}

// Rational-candidate enumeration is skipped past this magnitude.
const CANDIDATE_LIMIT: u64 = 1_000_000;

fn trim(c: &[Rational]) -> Vec<Rational> {
    let mut v = c.to_vec();
    while v.last().is_some_and(|x| x.is_zero()) {
        v.pop();
    }
    v
}

fn eval(c: &[Rational], x: &Rational) -> Rational {
    c.iter().rev().fold(Rational::zero(), |acc, k| acc * x + k)
}

/// Divides by `(x - r)`, assuming `r` is a root.
fn deflate(c: &[Rational], r: &Rational) -> Vec<Rational> {
    let n = c.len() - 1;
    let mut out = vec![Rational::zero(); n];
    let mut carry = Rational::zero();
    for k in (1..=n).rev() {
        carry = &c[k] + carry * r;
        out[k - 1] = carry.clone();
    }
    out
}

fn divisors(n: u64) -> Vec<u64> {
    let mut d = Vec::new();
    let mut k = 1;
    while k * k <= n {
        if n.is_multiple_of(k) {
            d.push(k);
            if k != n / k {
                d.push(n / k);
            }
        }
        k += 1;
    }
    d
}

fn rational_candidates(c: &[Rational]) -> Vec<Rational> {
    let lcm = c.iter().fold(BigInt::one(), |acc, k| acc.lcm(k.denom()));
    let ints: Vec<BigInt> = c.iter().map(|k| (k * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let (Some(a0), Some(an)) = (ints.first(), ints.last()) else { return Vec::new() };
    let (Some(a0), Some(an)) = (a0.abs().to_u64(), an.abs().to_u64()) else { return Vec::new() };
    if a0 == 0 || a0 > CANDIDATE_LIMIT || an > CANDIDATE_LIMIT {
        return Vec::new();
    }
    let mut out = Vec::new();
    for p in divisors(a0) {
        for q in divisors(an) {
            let r = Rational::new(BigInt::from(p), BigInt::from(q));
            out.push(r.clone());
            out.push(-r);
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Distinct real roots in increasing order, `None` for the zero polynomial.
pub fn real_roots(coeffs: &[Rational]) -> Option<Vec<Root>> {
    let mut c = trim(coeffs);
    if c.is_empty() {
        return None;
    }
    let mut roots = Vec::new();
    let lead_zeros = c.iter().take_while(|k| k.is_zero()).count();
    if lead_zeros > 0 {
        roots.push(Root::Exact(Rational::zero()));
        c.drain(..lead_zeros);
    }
    for cand in rational_candidates(&c) {
        let mut hit = false;
        while c.len() > 1 && eval(&c, &cand).is_zero() {
            c = deflate(&c, &cand);
            hit = true;
        }
        if hit {
            roots.push(Root::Exact(cand));
        }
    }
    let cf: Vec<f64> = c.iter().map(rat_to_f64).collect();
    for x in roots_f64(&cf) {
        if !roots.iter().any(|r| (r.value() - x).abs() < 1e-9 * (1.0 + x.abs())) {
            roots.push(Root::Approx(x));
        }
    }
    roots.sort_by(|a, b| a.value().total_cmp(&b.value()));
    Some(roots)
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, k| acc * x + k)
}

/// Numeric real roots of a float polynomial (ascending coefficients).
pub fn roots_f64(c: &[f64]) -> Vec<f64> {
    let mut c = c.to_vec();
    while c.last().is_some_and(|x| *x == 0.0) {
        c.pop();
    }
    match c.len() {
        0 | 1 => return Vec::new(),
        2 => return vec![-c[0] / c[1]],
        _ => {}
    }
    let lead = c[c.len() - 1];
    let bound = 1.0 + c[..c.len() - 1].iter().map(|k| (k / lead).abs()).fold(0.0, f64::max);
    let deriv: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect();
    let mut knots = vec![-bound];
    knots.extend(roots_f64(&deriv).into_iter().filter(|x| x.abs() < bound));
    knots.push(bound);
    let scale = c.iter().map(|k| k.abs()).fold(0.0, f64::max);
    let mut out: Vec<f64> = Vec::new();
    let push = |x: f64, out: &mut Vec<f64>| {
        if !out.iter().any(|r| (r - x).abs() < 1e-10 * (1.0 + x.abs())) {
            out.push(x);
        }
    };
    for w in knots.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (horner(&c, lo), horner(&c, hi));
        if flo == 0.0 {
            push(lo, &mut out);
            continue;
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if horner(&c, mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        push(0.5 * (lo + hi), &mut out);
    }
    // touching roots at critical points
    for &k in &knots[1..knots.len() - 1] {
        if horner(&c, k).abs() <= 1e-12 * scale {
            push(k, &mut out);
        }
    }
    let last = *knots.last().unwrap();
    if horner(&c, last) == 0.0 {
        push(last, &mut out);
    }
    out.sort_by(f64::total_cmp);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn ints(c: &[i64]) -> Vec<Rational> {
        c.iter().map(|&k| rat(k, 1)).collect()
    }

    #[test]
    fn zero_polynomial_is_none() {
        assert!(real_roots(&ints(&[0, 0])).is_none());
    }

    #[test]
    fn exact_rational_roots() {
        // 3u (1 + 2u)(u - 1)^2
        let c = ints(&[0, 3, 0, -9, 6]);
        let r = real_roots(&c).unwrap();
        assert_eq!(r, vec![Root::Exact(rat(-1, 2)), Root::Exact(rat(0, 1)), Root::Exact(rat(1, 1))]);
    }

    #[test]
    fn irrational_roots_numeric() {
        // u^2 - 2
        let r = real_roots(&ints(&[-2, 0, 1])).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[1].value() - 2f64.sqrt()).abs() < 1e-12);
        // -1 - u^2 has none
        assert!(real_roots(&ints(&[-1, 0, -1])).unwrap().is_empty());
    }

    #[test]
    fn cubic_three_real() {
        // (u - 0.3)(u + 1.7)(u - 2.9) with an irrational shift to defeat candidates
        let s = 2f64.sqrt() * 1e-3;
        let rts = [0.3 + s, -1.7 + s, 2.9 + s];
        let c = [-rts[0] * rts[1] * rts[2], rts[0] * rts[1] + rts[0] * rts[2] + rts[1] * rts[2], -(rts[0] + rts[1] + rts[2]), 1.0];
        let found = roots_f64(&c);
        assert_eq!(found.len(), 3);
        let mut want = rts.to_vec();
        want.sort_by(f64::total_cmp);
        for (f, w) in found.iter().zip(&want) {
            assert!((f - w).abs() < 1e-10);
        }
    }
}
