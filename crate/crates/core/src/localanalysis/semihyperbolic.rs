//! Semi-hyperbolic singular points.
//!
//! Input is a system in the normal form `x' = A(x, y)`, `y' = λ y + B(x, y)`
//! with `A`, `B` of order at least two and `λ != 0`. The center manifold
//! `y = f(x)` solves `λ f + B(x, f) = 0` to leading orders and is computed
//! as a truncated power series by the iteration `f <- -B(x, f) / λ`, which
//! fixes one more coefficient per pass. Then `g(x) = A(x, f(x)) = c x^α + …`
//! decides the type:
//!
//! * `α` odd, `c > 0`: unstable node,
//! * `α` odd, `c < 0`: saddle,
//! * `α` even: saddle-node.
//!
//! The table is stated for `λ > 0`; for `λ < 0` the classification is done
//! on the time-reversed system and the stability labels are swapped back.

use serde::Serialize;

use super::Kind;
use crate::error::{Error, Result};
use crate::poly::{rat_to_f64, Coeff, Poly, Rational};
use crate::vectorfield::PolySystem;

const START_ORDER: usize = 10;
const MAX_ORDER: usize = 160;

#[derive(Clone, Debug, Serialize)]
pub struct SemiHyperbolicData {
    pub lambda: f64,
    pub alpha: u32,
    pub leading_coeff: String,
    pub leading_coeff_f64: f64,
    pub truncation_order: usize,
    /// Set when `λ < 0` and the table was applied to `t -> -t`.
    pub time_reversed: bool,
    /// Center manifold `y = Σ c_k x^k`, coefficients up to `x^α`.
    pub center_manifold: Vec<f64>,
    pub separatrices: String,
}

fn series_mul(a: &[Rational], b: &[Rational], n: usize) -> Vec<Rational> {
    let zero = Rational::from_i64(0);
    let mut out = vec![zero.clone(); n + 1];
    for (i, ai) in a.iter().enumerate() {
        if *ai == zero {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(n + 1 - i.min(n + 1)) {
            if i + j > n {
                break;
            }
            out[i + j] += ai * bj;
        }
    }
    out
}

/// `p(x, f(x))` truncated after `x^n`.
fn substitute(p: &Poly<Rational>, f: &[Rational], n: usize) -> Vec<Rational> {
    let zero = Rational::from_i64(0);
    let max_j = p.terms().map(|(e, _)| e.1).max().unwrap_or(0) as usize;
    let mut powers = vec![{
        let mut one = vec![zero.clone(); n + 1];
        one[0] = Rational::from_i64(1);
        one
    }];
    for k in 1..=max_j {
        let next = series_mul(&powers[k - 1], f, n);
        powers.push(next);
    }
    let mut out = vec![zero; n + 1];
    for (&(i, j), c) in p.terms() {
        let i = i as usize;
        if i > n {
            continue;
        }
        for (k, v) in powers[j as usize].iter().enumerate() {
            if i + k > n {
                break;
            }
            out[i + k] += c * v;
        }
    }
    out
}

/// Center manifold coefficients `f_0..f_n` of `y' = λ y + B`.
fn center_manifold(b: &Poly<Rational>, lambda: &Rational, n: usize) -> Vec<Rational> {
    let mut f = vec![Rational::from_i64(0); n + 1];
    for _ in 0..=n {
        let next: Vec<Rational> = substitute(b, &f, n).iter().map(|c| -(c / lambda)).collect();
        if next == f {
            break;
        }
        f = next;
    }
    f
}

fn check_normal_form(sys: &PolySystem<Rational>) -> Result<(Rational, Poly<Rational>)> {
    let zero = Rational::from_i64(0);
    if sys.p.order().is_some_and(|o| o < 2) {
        return Err(Error::Malformed("A must have order at least 2".into()));
    }
    let lambda = sys.q.coeff(0, 1);
    if lambda == zero {
        return Err(Error::Malformed("λ must be nonzero".into()));
    }
    let b = &sys.q - &Poly::monomial(0, 1, lambda.clone());
    if b.order().is_some_and(|o| o < 2) {
        return Err(Error::Malformed("B must have order at least 2".into()));
    }
    Ok((lambda, b))
}

/// Classifies the origin of a system already in semi-hyperbolic normal form.
pub fn classify_semihyperbolic(sys: &PolySystem<Rational>) -> Result<(Kind, SemiHyperbolicData)> {
    let (lambda, _) = check_normal_form(sys)?;
    let zero = Rational::from_i64(0);
    if lambda < zero {
        let (kind, mut data) = classify_positive(&sys.time_reversed())?;
        data.time_reversed = true;
        data.lambda = -data.lambda;
        data.separatrices = swap_words(&data.separatrices);
        return Ok((kind.time_reversed(), data));
    }
    classify_positive(sys)
}

fn swap_words(s: &str) -> String {
    s.replace("unstable", "\u{0}").replace("stable", "unstable").replace('\u{0}', "stable")
}

fn classify_positive(sys: &PolySystem<Rational>) -> Result<(Kind, SemiHyperbolicData)> {
    let (lambda, b) = check_normal_form(sys)?;
    let zero = Rational::from_i64(0);
    let mut order = START_ORDER;
    loop {
        let f = center_manifold(&b, &lambda, order);
        let g = substitute(&sys.p, &f, order);
        if let Some(alpha) = g.iter().position(|c| *c != zero) {
            let c = g[alpha].clone();
            let positive = c > zero;
            let (kind, sep) = if alpha % 2 == 1 {
                if positive {
                    (Kind::SemiHyperbolicNodeUnstable, "unstable node: all orbits leave, the center manifold is tangent to the x-axis".to_string())
                } else {
                    (
                        Kind::SemiHyperbolicSaddle,
                        "saddle: stable separatrices along the center manifold (tangent to the x-axis), unstable separatrices tangent to the y-axis".to_string(),
                    )
                }
            } else {
                let side = if positive { "negative" } else { "positive" };
                (
                    Kind::SaddleNode,
                    format!("saddle-node: orbits on the center manifold enter from the {side} x side; the unstable separatrices are tangent to the y-axis"),
                )
            };
            let data = SemiHyperbolicData {
                lambda: rat_to_f64(&lambda),
                alpha: alpha as u32,
                leading_coeff: c.to_string(),
                leading_coeff_f64: rat_to_f64(&c),
                truncation_order: order,
                time_reversed: false,
                center_manifold: f.iter().take(alpha + 1).map(rat_to_f64).collect(),
                separatrices: sep,
            };
            return Ok((kind, data));
        }
        if order >= MAX_ORDER {
            return Err(Error::Undetermined { order });
        }
        order *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn sys(a: &[((u32, u32), i64)], q: &[((u32, u32), i64)]) -> PolySystem<Rational> {
        let mk = |t: &[((u32, u32), i64)]| Poly::from_terms(t.iter().map(|&(e, c)| (e, rat(c, 1))));
        PolySystem::new(mk(a), mk(q))
    }

    #[test]
    fn textbook_cases() {
        // x' = x^3, y' = y: unstable node
        let (k, d) = classify_semihyperbolic(&sys(&[((3, 0), 1)], &[((0, 1), 1)])).unwrap();
        assert_eq!((k, d.alpha), (Kind::SemiHyperbolicNodeUnstable, 3));
        // x' = -x^3, y' = y: saddle
        let (k, _) = classify_semihyperbolic(&sys(&[((3, 0), -1)], &[((0, 1), 1)])).unwrap();
        assert_eq!(k, Kind::SemiHyperbolicSaddle);
        // x' = x^2, y' = y: saddle-node
        let (k, _) = classify_semihyperbolic(&sys(&[((2, 0), 1)], &[((0, 1), 1)])).unwrap();
        assert_eq!(k, Kind::SaddleNode);
    }

    #[test]
    fn negative_lambda_uses_time_reversal() {
        // x' = x^3, y' = -y: saddle (reversed: x' = -x^3, y' = y)
        let (k, d) = classify_semihyperbolic(&sys(&[((3, 0), 1)], &[((0, 1), -1)])).unwrap();
        assert_eq!(k, Kind::SemiHyperbolicSaddle);
        assert!(d.time_reversed);
        assert_eq!(d.lambda, -1.0);
        // x' = -x^3, y' = -y: stable node
        let (k, _) = classify_semihyperbolic(&sys(&[((3, 0), -1)], &[((0, 1), -1)])).unwrap();
        assert_eq!(k, Kind::SemiHyperbolicNodeStable);
    }

    #[test]
    fn center_manifold_feeds_back() {
        // y' = y - x^2 gives f = x^2; x' = x y - x^3 ... A(x, f) = x^3 - x^3 + x^5 = x^5
        let s = sys(&[((1, 1), 1), ((3, 0), -1), ((5, 0), 1)], &[((0, 1), 1), ((2, 0), -1)]);
        let (k, d) = classify_semihyperbolic(&s).unwrap();
        assert_eq!(d.alpha, 5);
        assert_eq!(k, Kind::SemiHyperbolicNodeUnstable);
        assert_eq!(d.center_manifold[2], 1.0);
    }

    #[test]
    fn high_order_retry() {
        // x' = -x^13, y' = y needs more than the starting truncation
        let (k, d) = classify_semihyperbolic(&sys(&[((13, 0), -1)], &[((0, 1), 1)])).unwrap();
        assert_eq!(d.alpha, 13);
        assert_eq!(d.truncation_order, 20);
        assert_eq!(k, Kind::SemiHyperbolicSaddle);
    }

    #[test]
    fn flat_reduction_is_undetermined() {
        // x' = x y, y' = y: center manifold y = 0, A vanishes on it
        let e = classify_semihyperbolic(&sys(&[((1, 1), 1)], &[((0, 1), 1)]));
        assert!(matches!(e, Err(Error::Undetermined { .. })));
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(classify_semihyperbolic(&sys(&[((1, 0), 1)], &[((0, 1), 1)])), Err(Error::Malformed(_))));
        assert!(matches!(classify_semihyperbolic(&sys(&[((2, 0), 1)], &[((0, 2), 1)])), Err(Error::Malformed(_))));
    }
}
