//! Poincaré compactification in the local charts `U1, U2, U3` and their
//! antipodal counterparts `V1, V2, V3`.
//!
//! For a field of degree `d` the chart expressions are, after the positive
//! time rescaling that removes the `m(z)` factor,
//!
//! ```text
//! U1:  u' = v^d (-u P(1/v, u/v) + Q(1/v, u/v)),   v' = -v^{d+1} P(1/v, u/v)
//! U2:  u' = v^d ( P(u/v, 1/v) - u Q(u/v, 1/v)),   v' = -v^{d+1} Q(u/v, 1/v)
//! U3:  u' = P(u, v),                              v' = Q(u, v)
//! ```
//!
//! and `V_k = (-1)^{d-1} U_k`. Substitutions are done monomial by monomial:
//! `x^i y^j` contributes `u^j v^{-i-j}` in `U1` and `u^i v^{-i-j}` in `U2`,
//! and the `v^d` prefactor clears every negative power because `i + j <= d`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::localanalysis::{classify_point, EquilibriumReport};
use crate::poly::{rat_to_f64, Coeff, Poly, Rational};
use crate::roots::{real_roots, Root};
use crate::vectorfield::{system_json, PlanarPolySystem, Point, PolySystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChartId {
    U1,
    U2,
    U3,
    V1,
    V2,
    V3,
}

impl ChartId {
    pub fn is_v(self) -> bool {
        matches!(self, ChartId::V1 | ChartId::V2 | ChartId::V3)
    }

    /// `U_k <-> V_k`.
    pub fn opposite(self) -> ChartId {
        match self {
            ChartId::U1 => ChartId::V1,
            ChartId::U2 => ChartId::V2,
            ChartId::U3 => ChartId::V3,
            ChartId::V1 => ChartId::U1,
            ChartId::V2 => ChartId::U2,
            ChartId::V3 => ChartId::U3,
        }
    }

    fn base(self) -> ChartId {
        if self.is_v() {
            self.opposite()
        } else {
            self
        }
    }
}

impl std::fmt::Display for ChartId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// The compactified field in one chart, as exact polynomials in `(u, v)`
/// (stored in the `x`/`y` slots of [`Poly`]).
#[derive(Clone, Debug, PartialEq)]
pub struct ChartSystem<C> {
    pub chart: ChartId,
    pub du: Poly<C>,
    pub dv: Poly<C>,
    pub source_degree: u32,
}

impl<C: Coeff> ChartSystem<C> {
    /// True when `v' (u, 0)` vanishes identically.
    pub fn equator_invariant(&self) -> bool {
        self.dv.restrict_y0().iter().all(|c| c.is_zero())
    }

    pub fn as_poly_system(&self) -> PolySystem<C> {
        PolySystem::new(self.du.clone(), self.dv.clone())
    }
}

impl ChartSystem<Rational> {
    pub fn as_planar(&self) -> PlanarPolySystem {
        PlanarPolySystem::new(self.du.clone(), self.dv.clone())
    }

    pub fn to_json(&self) -> Value {
        let mut v = system_json(&self.du, &self.dv, self.source_degree);
        v["chart"] = Value::String(self.chart.to_string());
        v
    }
}

/// `(-1)^{d-1}`.
pub fn orientation_factor(d: u32) -> i32 {
    if d % 2 == 1 {
        1
    } else {
        -1
    }
}

pub fn chart_system<C: Coeff>(sys: &PolySystem<C>, chart: ChartId) -> Result<ChartSystem<C>> {
    let d = sys.degree();
    if d == 0 {
        return Err(Error::ConstantField);
    }
    let di = d as i64;
    let lift = |it: Vec<((i64, i64), C)>| {
        Poly::from_laurent(it).expect("v^d clears all negative powers when i + j <= d")
    };
    let (du, dv) = match chart.base() {
        ChartId::U1 => {
            let mut du = Vec::new();
            let mut dv = Vec::new();
            for (&(i, j), c) in sys.p.terms() {
                let (i, j) = (i as i64, j as i64);
                du.push(((j + 1, di - i - j), -c.clone()));
                dv.push(((j, di + 1 - i - j), -c.clone()));
            }
            for (&(i, j), c) in sys.q.terms() {
                let (i, j) = (i as i64, j as i64);
                du.push(((j, di - i - j), c.clone()));
            }
            (lift(du), lift(dv))
        }
        ChartId::U2 => {
            let mut du = Vec::new();
            let mut dv = Vec::new();
            for (&(i, j), c) in sys.p.terms() {
                let (i, j) = (i as i64, j as i64);
                du.push(((i, di - i - j), c.clone()));
            }
            for (&(i, j), c) in sys.q.terms() {
                let (i, j) = (i as i64, j as i64);
                du.push(((i + 1, di - i - j), -c.clone()));
                dv.push(((i, di + 1 - i - j), -c.clone()));
            }
            (lift(du), lift(dv))
        }
        _ => (sys.p.clone(), sys.q.clone()),
    };
    let (du, dv) = if chart.is_v() && orientation_factor(d) < 0 { (-&du, -&dv) } else { (du, dv) };
    Ok(ChartSystem { chart, du, dv, source_degree: d })
}

/// Unit direction on the equator represented by `(chart, u)` with `v = 0`.
pub fn equator_direction(chart: ChartId, u: f64) -> Point {
    let (x, y) = match chart {
        ChartId::U1 => (1.0, u),
        ChartId::V1 => (-1.0, -u),
        ChartId::U2 => (u, 1.0),
        ChartId::V2 => (-u, -1.0),
        // U3/V3 carry no equator points
        ChartId::U3 | ChartId::V3 => (0.0, 0.0),
    };
    let norm = (x * x + y * y).sqrt();
    if norm == 0.0 {
        [0.0, 0.0]
    } else {
        [x / norm, y / norm]
    }
}

/// An infinite singular point found in a `U` chart together with its
/// diametral opposite in the matching `V` chart.
#[derive(Clone, Debug, Serialize)]
pub struct InfiniteEquilibrium {
    pub chart: ChartId,
    /// Location `(u, 0)` in the chart.
    pub u: f64,
    pub direction: Point,
    pub report: EquilibriumReport,
    pub opposite: EquilibriumReport,
    pub orientation_factor: i32,
}

/// All singular points on the equator. `U1` is searched over all `u`; the
/// only direction it misses, `(0, ±1)`, is the origin of `U2`.
pub fn infinite_equilibria(sys: &PlanarPolySystem) -> Result<Vec<InfiniteEquilibrium>> {
    let d = sys.degree();
    if d == 0 {
        return Err(Error::ConstantField);
    }
    let factor = orientation_factor(d);
    let u1 = chart_system(sys.exact(), ChartId::U1)?;
    let u2 = chart_system(sys.exact(), ChartId::U2)?;
    let restricted = u1.du.restrict_y0();
    let roots = real_roots(&restricted).ok_or(Error::DegenerateEquator)?;
    let mut out = Vec::new();
    for root in roots {
        let (pt, exact) = match &root {
            Root::Exact(r) => ([rat_to_f64(r), 0.0], Some((r.clone(), Rational::from_i64(0)))),
            Root::Approx(x) => ([*x, 0.0], None),
        };
        out.push(pair(&u1, pt, exact, factor)?);
    }
    let origin_du = u2.du.coeff(0, 0);
    if origin_du == Rational::from_i64(0) {
        let zero = Rational::from_i64(0);
        out.push(pair(&u2, [0.0, 0.0], Some((zero.clone(), zero)), factor)?);
    }
    Ok(out)
}

fn pair(
    cs: &ChartSystem<Rational>,
    pt: Point,
    exact: Option<(Rational, Rational)>,
    factor: i32,
) -> Result<InfiniteEquilibrium> {
    let planar = cs.as_planar();
    let report = classify_point(&planar, pt, exact, Some(cs.chart))?;
    let opposite = report.mirrored(cs.chart.opposite(), factor);
    Ok(InfiniteEquilibrium {
        chart: cs.chart,
        u: pt[0],
        direction: equator_direction(cs.chart, pt[0]),
        report,
        opposite,
        orientation_factor: factor,
    })
}

/// Distance between the unit vectors of the `U2` field and the pushforward
/// of the `U1` field under `(u, v) -> (1/u, v/u)`, at a `U1` point with
/// `u > 0`, `v > 0`. Zero when the two chart fields are positively parallel.
pub fn chart_compatibility_defect(u1: &PlanarPolySystem, u2: &PlanarPolySystem, u: f64, v: f64) -> f64 {
    let f1 = u1.evaluate([u, v]);
    let push = [-f1[0] / (u * u), -v * f1[0] / (u * u) + f1[1] / u];
    let f2 = u2.evaluate([1.0 / u, v / u]);
    let unit = |w: [f64; 2]| {
        let n = (w[0] * w[0] + w[1] * w[1]).sqrt();
        [w[0] / n, w[1] / n]
    };
    let (a, b) = (unit(push), unit(f2));
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localanalysis::Kind;
    use crate::poly::rat;
    use crate::vectorfield::{lienard_form, rayleigh_system, RayleighParams};

    fn p(terms: &[((u32, u32), i64)]) -> Poly<Rational> {
        Poly::from_terms(terms.iter().map(|&(e, c)| (e, rat(c, 1))))
    }

    #[test]
    fn orientation_factor_examples() {
        assert_eq!(orientation_factor(3), 1);
        assert_eq!(orientation_factor(1), 1);
        assert_eq!(orientation_factor(2), -1);
    }

    #[test]
    fn linear_center_u1() {
        // rayleigh(a=0): u' = -1 - u^2, v' = -u v
        let sys = rayleigh_system(RayleighParams::new(0.0, 1).unwrap());
        let cs = chart_system(sys.exact(), ChartId::U1).unwrap();
        assert_eq!(cs.du, p(&[((0, 0), -1), ((2, 0), -1)]));
        assert_eq!(cs.dv, p(&[((1, 1), -1)]));
        assert!(infinite_equilibria(&sys).unwrap().is_empty());
    }

    #[test]
    fn constant_field_rejected() {
        let sys = PolySystem::new(p(&[((0, 0), 1)]), p(&[((0, 0), 2)]));
        assert!(matches!(chart_system(&sys, ChartId::U1), Err(Error::ConstantField)));
    }

    #[test]
    fn u3_is_identity_and_v_charts_mirror() {
        let sys = PolySystem::new(p(&[((2, 0), 1), ((0, 1), -1)]), p(&[((1, 1), 3)]));
        let u3 = chart_system(&sys, ChartId::U3).unwrap();
        assert_eq!((u3.du.clone(), u3.dv.clone()), (sys.p.clone(), sys.q.clone()));
        // degree 2: V charts carry the factor -1
        for k in [ChartId::U1, ChartId::U2, ChartId::U3] {
            let u = chart_system(&sys, k).unwrap();
            let v = chart_system(&sys, k.opposite()).unwrap();
            assert_eq!(v.du, -&u.du);
            assert_eq!(v.dv, -&u.dv);
        }
    }

    #[test]
    fn family_infinite_points() {
        let sys = lienard_form(RayleighParams::new(1.0, 1).unwrap());
        let inf = infinite_equilibria(&sys).unwrap();
        assert_eq!(inf.len(), 2);
        assert_eq!(inf[0].chart, ChartId::U1);
        assert_eq!(inf[0].u, 0.0);
        assert_eq!(inf[0].report.jac, [[-1.0, 0.0], [0.0, -1.0]]);
        assert_eq!(inf[0].report.kind, Kind::StableNode);
        assert_eq!(inf[0].opposite.chart, Some(ChartId::V1));
        assert_eq!(inf[1].chart, ChartId::U2);
        assert_eq!(inf[1].report.kind, Kind::Degenerate);
    }

    #[test]
    fn equator_invariance_family() {
        for n in 1..=3 {
            for a in [-1.5, 0.5, 2.0] {
                let sys = lienard_form(RayleighParams::new(a, n).unwrap());
                for k in [ChartId::U1, ChartId::U2, ChartId::V1, ChartId::V2] {
                    assert!(chart_system(sys.exact(), k).unwrap().equator_invariant());
                }
            }
        }
    }

    #[test]
    fn json_has_chart_field() {
        let sys = lienard_form(RayleighParams::new(1.0, 1).unwrap());
        let v = chart_system(sys.exact(), ChartId::U2).unwrap().to_json();
        assert_eq!(v["chart"], "U2");
        assert_eq!(v["d"], 3);
    }
}
