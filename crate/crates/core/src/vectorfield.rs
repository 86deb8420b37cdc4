//! Planar polynomial vector fields and the generalized Rayleigh family.
//!
//! The family appears in two forms related by `(x, y, t) -> (y, x, -t)`:
//!
//! * [`Form::Eq1`]: `x' = y`, `y' = -x + a(1 - y^{2n}) y`
//! * [`Form::Eq2`]: `x' = y + a(x^{2n} - 1) x`, `y' = -x` (Liénard form)
//!
//! Coefficients are exact rationals; floating point is only used for
//! evaluation.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::poly::{
    rat_to_f64, rational_from_decimal, rational_from_f64, terminating_decimal, Coeff, Horner,
    ParamPoly, Poly, Rational,
};

pub type Point = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayleighParams {
    pub a: f64,
    pub n: u32,
}

impl RayleighParams {
    pub fn new(a: f64, n: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParams("n must be ≥ 1".into()));
        }
        if !a.is_finite() {
            return Err(Error::InvalidParams("a must be finite".into()));
        }
        Ok(RayleighParams { a, n })
    }

    /// The parameter as an exact rational (shortest decimal reading of `a`).
    pub fn a_exact(&self) -> Rational {
        rational_from_f64(self.a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Eq1,
    Eq2,
}

impl std::fmt::Display for Form {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Form::Eq1 => "eq1",
            Form::Eq2 => "eq2",
        })
    }
}

impl std::str::FromStr for Form {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eq1" => Ok(Form::Eq1),
            "eq2" => Ok(Form::Eq2),
            other => Err(Error::InvalidParams(format!("unknown form {other:?} (expected eq1 or eq2)"))),
        }
    }
}

/// `x' = P(x, y)`, `y' = Q(x, y)` over a generic coefficient ring.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySystem<C> {
    pub p: Poly<C>,
    pub q: Poly<C>,
}

impl<C: Coeff> PolySystem<C> {
    pub fn new(p: Poly<C>, q: Poly<C>) -> Self {
        PolySystem { p, q }
    }

    /// `max(deg P, deg Q)`, 0 for the zero field.
    pub fn degree(&self) -> u32 {
        self.p.degree().unwrap_or(0).max(self.q.degree().unwrap_or(0))
    }

    /// Image under `(x, y, t) -> (y, x, -t)`.
    pub fn swap_reverse(&self) -> Self {
        PolySystem { p: -&self.q.swap_vars(), q: -&self.p.swap_vars() }
    }

    /// Image under `(x, y, t) -> (-x, y, -t)`.
    pub fn reflect_x_reverse(&self) -> Self {
        let mx = -&Poly::x();
        let y = Poly::y();
        PolySystem { p: self.p.compose(&mx, &y), q: -&self.q.compose(&mx, &y) }
    }

    pub fn time_reversed(&self) -> Self {
        PolySystem { p: -&self.p, q: -&self.q }
    }
}

/// `P = y`, `Q = -x + a y - a y^{2n+1}` with the coefficient `a` supplied.
fn rayleigh_generic<C: Coeff>(a: C, n: u32) -> PolySystem<C> {
    let p = Poly::y();
    let q = Poly::from_terms([
        ((1, 0), -C::one()),
        ((0, 1), a.clone()),
        ((0, 2 * n + 1), -a),
    ]);
    PolySystem::new(p, q)
}

/// `P = y + a x^{2n+1} - a x`, `Q = -x`.
fn lienard_generic<C: Coeff>(a: C, n: u32) -> PolySystem<C> {
    let p = Poly::from_terms([((0, 1), C::one()), ((2 * n + 1, 0), a.clone()), ((1, 0), -a)]);
    let q = Poly::monomial(1, 0, -C::one());
    PolySystem::new(p, q)
}

/// Family in either form with the parameter kept symbolic.
pub fn symbolic_system(n: u32, form: Form) -> PolySystem<ParamPoly> {
    match form {
        Form::Eq1 => rayleigh_generic(ParamPoly::param(), n),
        Form::Eq2 => lienard_generic(ParamPoly::param(), n),
    }
}

/// Exact system plus compiled float evaluators for the field and its Jacobian.
#[derive(Clone, Debug)]
pub struct PlanarPolySystem {
    exact: PolySystem<Rational>,
    fp: Horner,
    fq: Horner,
    jac: [Horner; 4],
}

impl PartialEq for PlanarPolySystem {
    fn eq(&self, other: &Self) -> bool {
        self.exact == other.exact
    }
}

impl PlanarPolySystem {
    pub fn new(p: Poly<Rational>, q: Poly<Rational>) -> Self {
        Self::from_exact(PolySystem::new(p, q))
    }

    pub fn from_exact(exact: PolySystem<Rational>) -> Self {
        let jac = [
            Horner::new(&exact.p.deriv_x()),
            Horner::new(&exact.p.deriv_y()),
            Horner::new(&exact.q.deriv_x()),
            Horner::new(&exact.q.deriv_y()),
        ];
        PlanarPolySystem { fp: Horner::new(&exact.p), fq: Horner::new(&exact.q), jac, exact }
    }

    pub fn exact(&self) -> &PolySystem<Rational> {
        &self.exact
    }

    pub fn p(&self) -> &Poly<Rational> {
        &self.exact.p
    }

    pub fn q(&self) -> &Poly<Rational> {
        &self.exact.q
    }

    pub fn degree(&self) -> u32 {
        self.exact.degree()
    }

    #[inline]
    pub fn evaluate(&self, pt: Point) -> Point {
        [self.fp.eval(pt[0], pt[1]), self.fq.eval(pt[0], pt[1])]
    }

    pub fn jacobian(&self, pt: Point) -> Mat2 {
        let [px, py, qx, qy] = &self.jac;
        let (x, y) = (pt[0], pt[1]);
        [[px.eval(x, y), py.eval(x, y)], [qx.eval(x, y), qy.eval(x, y)]]
    }

    /// Exact Jacobian at a rational point.
    pub fn jacobian_exact(&self, x: &Rational, y: &Rational) -> [[Rational; 2]; 2] {
        let e = &self.exact;
        [
            [e.p.deriv_x().eval_exact(x, y), e.p.deriv_y().eval_exact(x, y)],
            [e.q.deriv_x().eval_exact(x, y), e.q.deriv_y().eval_exact(x, y)],
        ]
    }

    #[inline]
    pub fn divergence(&self, pt: Point) -> f64 {
        self.jac[0].eval(pt[0], pt[1]) + self.jac[3].eval(pt[0], pt[1])
    }

    pub fn time_reversed(&self) -> Self {
        Self::from_exact(self.exact.time_reversed())
    }

    pub fn swap_reverse(&self) -> Self {
        Self::from_exact(self.exact.swap_reverse())
    }

    pub fn to_json(&self) -> Value {
        system_json(&self.exact.p, &self.exact.q, self.degree())
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let p = poly_from_json(&v["P"])?;
        let q = poly_from_json(&v["Q"])?;
        let sys = Self::new(p, q);
        if let Some(d) = v.get("d").and_then(Value::as_u64) {
            if d != sys.degree() as u64 {
                return Err(Error::Malformed(format!("stated degree {d} != computed {}", sys.degree())));
            }
        }
        Ok(sys)
    }
}

pub fn rayleigh_system(params: RayleighParams) -> PlanarPolySystem {
    PlanarPolySystem::from_exact(rayleigh_generic(params.a_exact(), params.n))
}

pub fn lienard_form(params: RayleighParams) -> PlanarPolySystem {
    PlanarPolySystem::from_exact(lienard_generic(params.a_exact(), params.n))
}

pub fn family_system(params: RayleighParams, form: Form) -> PlanarPolySystem {
    match form {
        Form::Eq1 => rayleigh_system(params),
        Form::Eq2 => lienard_form(params),
    }
}

pub fn coeff_json(c: &Rational) -> Value {
    match terminating_decimal(c) {
        Some(s) => Value::String(s),
        None => Value::Array(vec![
            Value::String(c.numer().to_string()),
            Value::String(c.denom().to_string()),
        ]),
    }
}

pub fn coeff_from_json(v: &Value) -> Result<Rational> {
    let bad = || Error::Malformed(format!("bad coefficient {v}"));
    match v {
        Value::String(s) => rational_from_decimal(s).ok_or_else(bad),
        Value::Number(n) => rational_from_decimal(&n.to_string()).ok_or_else(bad),
        Value::Array(pair) if pair.len() == 2 => {
            let part = |x: &Value| -> Result<num_bigint::BigInt> {
                match x {
                    Value::String(s) => s.parse().map_err(|_| bad()),
                    Value::Number(n) => n.to_string().parse().map_err(|_| bad()),
                    _ => Err(bad()),
                }
            };
            let den = part(&pair[1])?;
            if den == num_bigint::BigInt::from(0) {
                return Err(bad());
            }
            Ok(Rational::new(part(&pair[0])?, den))
        }
        _ => Err(bad()),
    }
}

pub fn poly_json(p: &Poly<Rational>) -> Value {
    Value::Array(
        p.terms()
            .map(|(&(i, j), c)| Value::Array(vec![i.into(), j.into(), coeff_json(c)]))
            .collect(),
    )
}

pub fn poly_from_json(v: &Value) -> Result<Poly<Rational>> {
    let arr = v.as_array().ok_or_else(|| Error::Malformed("monomial list expected".into()))?;
    let mut terms = Vec::with_capacity(arr.len());
    let mut last: Option<(u32, u32)> = None;
    for t in arr {
        let bad = || Error::Malformed(format!("bad monomial {t}"));
        let t = t.as_array().filter(|t| t.len() == 3).ok_or_else(bad)?;
        let i = t[0].as_u64().ok_or_else(bad)? as u32;
        let j = t[1].as_u64().ok_or_else(bad)? as u32;
        if last.is_some_and(|l| l >= (i, j)) {
            return Err(Error::Malformed("monomials must be sorted by (i, j) without duplicates".into()));
        }
        last = Some((i, j));
        terms.push(((i, j), coeff_from_json(&t[2])?));
    }
    Ok(Poly::from_terms(terms))
}

pub(crate) fn system_json(p: &Poly<Rational>, q: &Poly<Rational>, d: u32) -> Value {
    serde_json::json!({ "P": poly_json(p), "Q": poly_json(q), "d": d })
}

pub fn mat_det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn mat_trace(m: &Mat2) -> f64 {
    m[0][0] + m[1][1]
}

/// Float view of a rational coefficient (convenience for reports).
pub fn to_f64(r: &Rational) -> f64 {
    rat_to_f64(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn params(a: f64, n: u32) -> RayleighParams {
        RayleighParams::new(a, n).unwrap()
    }

    fn poly(terms: &[((u32, u32), Rational)]) -> Poly<Rational> {
        Poly::from_terms(terms.iter().cloned())
    }

    #[test]
    fn rayleigh_instances() {
        let s = rayleigh_system(params(1.0, 1));
        assert_eq!(s.p(), &poly(&[((0, 1), rat(1, 1))]));
        assert_eq!(s.q(), &poly(&[((0, 1), rat(1, 1)), ((0, 3), rat(-1, 1)), ((1, 0), rat(-1, 1))]));
        assert_eq!(s.degree(), 3);

        let s = rayleigh_system(params(0.0, 1));
        assert_eq!(s.q(), &poly(&[((1, 0), rat(-1, 1))]));
        assert_eq!(s.degree(), 1);

        let s = rayleigh_system(params(2.0, 2));
        assert_eq!(s.q(), &poly(&[((0, 1), rat(2, 1)), ((0, 5), rat(-2, 1)), ((1, 0), rat(-1, 1))]));
        assert_eq!(s.degree(), 5);
    }

    #[test]
    fn lienard_instances() {
        let s = lienard_form(params(1.0, 1));
        assert_eq!(s.p(), &poly(&[((0, 1), rat(1, 1)), ((1, 0), rat(-1, 1)), ((3, 0), rat(1, 1))]));
        assert_eq!(s.q(), &poly(&[((1, 0), rat(-1, 1))]));
        for n in 1..=4 {
            let s = lienard_form(params(0.0, n));
            assert_eq!(s.p(), &Poly::y());
            assert_eq!(s.degree(), 1);
        }
    }

    #[test]
    fn forms_linked_by_swap_reversal() {
        for (a, n) in [(1.0, 1), (-0.3, 2), (2.5, 3), (0.0, 1)] {
            let p = params(a, n);
            assert_eq!(lienard_form(p).swap_reverse(), rayleigh_system(p));
            assert_eq!(rayleigh_system(p).swap_reverse(), lienard_form(p));
        }
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(rayleigh_system(params(1.0, 1)).evaluate([0.0, 0.0]), [0.0, 0.0]);
        assert_eq!(rayleigh_system(params(1.0, 1)).evaluate([0.0, 1.0]), [1.0, 0.0]);
        assert_eq!(rayleigh_system(params(0.0, 1)).evaluate([3.0, 4.0]), [4.0, -3.0]);
    }

    #[test]
    fn jacobian_at_origin() {
        for (a, n) in [(1.0, 1), (-2.0, 3), (0.5, 2)] {
            let j = lienard_form(params(a, n)).jacobian([0.0, 0.0]);
            assert_eq!(j, [[-a, 1.0], [-1.0, 0.0]]);
            let j1 = rayleigh_system(params(a, n)).jacobian([0.0, 0.0]);
            assert_eq!(j1, [[0.0, 1.0], [-1.0, a]]);
            assert_eq!(mat_det(&j), 1.0);
            assert_eq!(mat_det(&j1), 1.0);
        }
    }

    #[test]
    fn reflect_conjugates_sign_of_a() {
        let s = lienard_form(params(0.75, 2));
        assert_eq!(s.exact().reflect_x_reverse(), *lienard_form(params(-0.75, 2)).exact());
    }

    #[test]
    fn invalid_params() {
        assert!(RayleighParams::new(1.0, 0).is_err());
        assert!(RayleighParams::new(f64::NAN, 1).is_err());
    }

    #[test]
    fn json_round_trip_with_nonterminating_coefficient() {
        let s = PlanarPolySystem::new(
            poly(&[((0, 1), rat(1, 3)), ((2, 0), rat(-5, 4))]),
            poly(&[((1, 0), rat(-1, 1))]),
        );
        let v = s.to_json();
        assert_eq!(v["d"], 2);
        assert_eq!(v["P"][0], serde_json::json!([0, 1, ["1", "3"]]));
        assert_eq!(v["P"][1], serde_json::json!([2, 0, "-1.25"]));
        assert_eq!(PlanarPolySystem::from_json(&v).unwrap(), s);
    }

    #[test]
    fn json_rejects_unsorted() {
        let v = serde_json::json!({"P": [[1,0,"1"],[0,1,"1"]], "Q": [], "d": 1});
        assert!(PlanarPolySystem::from_json(&v).is_err());
    }
}
