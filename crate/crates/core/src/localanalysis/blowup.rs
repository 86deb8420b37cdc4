//! Directional blow-ups for the degenerate point at infinity.
//!
//! Vertical blow-up `u = x, v = z x`:
//! `x' = u'(x, z x)`, `z' = (v' - z u') / x`, then a common factor `x^k`
//! is divided out.
//!
//! Weighted blow-up `x = w^K r, z = w`:
//! `w' = z'(w^K r, w)`, `r' = (x' - K r w^{K-1} z') / w^K`, then a common
//! factor `w^m` is divided out. For the family `K = 2n`.
//!
//! Both transforms are generic over the coefficient ring, so the chain can be
//! run with the parameter `a` kept symbolic.

use serde::Serialize;

use super::{classify_point, EquilibriumReport, Kind, TransformRecord};
use crate::compactification::ChartSystem;
use crate::error::{Error, Result};
use crate::poly::{rat_to_f64, Coeff, Poly, Rational};
use crate::roots::{real_roots, Root};
use crate::vectorfield::{PlanarPolySystem, PolySystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Transform {
    /// `u = x, v = z x`
    Vertical,
    /// `x = w^weight r, z = w`
    Weighted { weight: u32 },
}

/// A blown-up field. Variables are `(x, z)` after the vertical blow-up and
/// `(r, w)` after the weighted one, stored in the `x`/`y` slots.
#[derive(Clone, Debug, PartialEq)]
pub struct BlowUpSystem<C> {
    pub system: PolySystem<C>,
    pub transform: Transform,
    pub cancelled_power: u32,
}

fn valuation_x<C: Coeff>(p: &Poly<C>) -> Option<u32> {
    (!p.is_empty()).then(|| p.x_valuation())
}

fn valuation_y<C: Coeff>(p: &Poly<C>) -> Option<u32> {
    (!p.is_empty()).then(|| p.y_valuation())
}

/// Vertical blow-up of the origin of `(u', v')`.
pub fn blowup_vertical_generic<C: Coeff>(sys: &PolySystem<C>) -> Result<BlowUpSystem<C>> {
    let x = Poly::x();
    let xz = Poly::monomial(1, 1, C::one());
    let du = sys.p.compose(&x, &xz);
    let dv = sys.q.compose(&x, &xz);
    let num = &dv - &(&Poly::y() * &du);
    let dz = num
        .div_monomial(1, 0)
        .ok_or_else(|| Error::Malformed("v' - z u' is not divisible by x; origin is not singular".into()))?;
    let k = match (valuation_x(&du), valuation_x(&dz)) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => return Err(Error::Malformed("blown-up field vanishes identically".into())),
    };
    if k == 0 {
        return Err(Error::Malformed("common factor absent after vertical blow-up".into()));
    }
    let system = PolySystem::new(du.div_monomial(k, 0).unwrap(), dz.div_monomial(k, 0).unwrap());
    Ok(BlowUpSystem { system, transform: Transform::Vertical, cancelled_power: k })
}

/// Weighted blow-up `x = w^weight r, z = w` of the origin of `(x', z')`.
pub fn blowup_weighted_generic<C: Coeff>(sys: &PolySystem<C>, weight: u32) -> Result<BlowUpSystem<C>> {
    if weight == 0 {
        return Err(Error::InvalidParams("weight must be positive".into()));
    }
    let sx = Poly::monomial(1, weight, C::one());
    let sz = Poly::y();
    let xt = sys.p.compose(&sx, &sz);
    let zt = sys.q.compose(&sx, &sz);
    let num = &xt - &(&Poly::monomial(1, weight - 1, C::from_i64(weight as i64)) * &zt);
    let vn = valuation_y(&num).map(|v| v as i64 - weight as i64);
    let vz = valuation_y(&zt).map(|v| v as i64);
    let m = match (vn, vz) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => return Err(Error::Malformed("blown-up field vanishes identically".into())),
    };
    if m <= 0 {
        return Err(Error::Malformed("common factor absent after weighted blow-up".into()));
    }
    let m = m as u32;
    let dr = num.div_monomial(0, weight + m).unwrap_or_else(Poly::zero);
    let dw = zt.div_monomial(0, m).unwrap_or_else(Poly::zero);
    Ok(BlowUpSystem {
        system: PolySystem::new(dr, dw),
        transform: Transform::Weighted { weight },
        cancelled_power: m,
    })
}

/// Vertical blow-up of a chart origin; the family cancels `x^{2n-1}`.
pub fn blowup_vertical<C: Coeff>(cs: &ChartSystem<C>, n: u32) -> Result<BlowUpSystem<C>> {
    let bs = blowup_vertical_generic(&cs.as_poly_system())?;
    if bs.cancelled_power != 2 * n - 1 {
        return Err(Error::Malformed(format!(
            "vertical blow-up cancelled x^{}, expected x^{}",
            bs.cancelled_power,
            2 * n - 1
        )));
    }
    Ok(bs)
}

/// Weighted blow-up with weight `2n`; the family cancels `w^{2n}`.
pub fn blowup_weighted<C: Coeff>(bs: &BlowUpSystem<C>, n: u32) -> Result<BlowUpSystem<C>> {
    if bs.transform != Transform::Vertical {
        return Err(Error::Malformed("weighted blow-up expects a vertical blow-up as input".into()));
    }
    let out = blowup_weighted_generic(&bs.system, 2 * n)?;
    if out.cancelled_power != 2 * n {
        return Err(Error::Malformed(format!(
            "weighted blow-up cancelled w^{}, expected w^{}",
            out.cancelled_power,
            2 * n
        )));
    }
    Ok(out)
}

fn norm2(a: f64, b: f64) -> f64 {
    a.hypot(b)
}

/// Relative mismatch between `x^k` times the blown-up field and the
/// transported original field at `(x, z)`, `x != 0`.
pub fn pullback_defect_vertical(src: &PlanarPolySystem, blown: &PlanarPolySystem, k: u32, x: f64, z: f64) -> f64 {
    let f = src.evaluate([x, z * x]);
    let lhs = blown.evaluate([x, z]);
    let xk = x.powi(k as i32);
    let want = [f[0], (f[1] - z * f[0]) / x];
    let got = [xk * lhs[0], xk * lhs[1]];
    norm2(got[0] - want[0], got[1] - want[1]) / (1e-300 + norm2(want[0], want[1]))
}

/// Same check for the weighted blow-up at `(r, w)`, `w != 0`.
pub fn pullback_defect_weighted(src: &PlanarPolySystem, blown: &PlanarPolySystem, weight: u32, m: u32, r: f64, w: f64) -> f64 {
    let kk = weight as i32;
    let f = src.evaluate([w.powi(kk) * r, w]);
    let want = [(f[0] - weight as f64 * r * w.powi(kk - 1) * f[1]) / w.powi(kk), f[1]];
    let lhs = blown.evaluate([r, w]);
    let wm = w.powi(m as i32);
    let got = [wm * lhs[0], wm * lhs[1]];
    norm2(got[0] - want[0], got[1] - want[1]) / (1e-300 + norm2(want[0], want[1]))
}

fn describe(t: Transform) -> String {
    match t {
        Transform::Vertical => "vertical blow-up u = x, v = z x".into(),
        Transform::Weighted { weight } => format!("weighted blow-up x = w^{weight} r, z = w"),
    }
}

/// Singular points on the exceptional divisor `{first variable = 0}` for
/// the vertical blow-up or `{w = 0}` for the weighted one.
fn divisor_points(bs: &BlowUpSystem<Rational>) -> Result<Vec<EquilibriumReport>> {
    let planar = PlanarPolySystem::from_exact(bs.system.clone());
    let zero = Rational::from_i64(0);
    let mut out = Vec::new();
    match bs.transform {
        Transform::Vertical => {
            // points (0, z) with x' = z' = 0
            let xr = bs.system.p.restrict_x0();
            let roots = real_roots(&bs.system.q.restrict_x0()).unwrap_or_default();
            for root in roots {
                let Root::Exact(z) = root else { continue };
                let xval = xr.iter().rev().fold(zero.clone(), |acc, c| acc * &z + c);
                if xval != zero {
                    continue;
                }
                out.push(classify_point(&planar, [0.0, rat_to_f64(&z)], Some((zero.clone(), z)), None)?);
            }
        }
        Transform::Weighted { .. } => {
            let wr = bs.system.q.restrict_y0();
            let roots = real_roots(&bs.system.p.restrict_y0()).unwrap_or_default();
            for root in roots {
                let (pt, exact) = match &root {
                    Root::Exact(r) => ([rat_to_f64(r), 0.0], Some((r.clone(), zero.clone()))),
                    Root::Approx(r) => ([*r, 0.0], None),
                };
                if !wr.is_empty() {
                    let wval: f64 = wr.iter().rev().fold(0.0, |acc, c| acc * pt[0] + rat_to_f64(c));
                    if wval.abs() > 1e-12 {
                        continue;
                    }
                }
                out.push(classify_point(&planar, pt, exact, None)?);
            }
        }
    }
    Ok(out)
}

/// Desingularizes the degenerate origin of a chart system of the family by
/// the vertical and the weighted (`K = 2n`) blow-ups.
pub fn resolve_degenerate(cs: &ChartSystem<Rational>, n: u32) -> Result<EquilibriumReport> {
    let zero = Rational::from_i64(0);
    let planar = cs.as_planar();
    let mut report = classify_point(&planar, [0.0, 0.0], Some((zero.clone(), zero.clone())), Some(cs.chart))?;
    if report.kind != Kind::Degenerate {
        return Err(Error::Malformed(format!("chart origin is {}, not degenerate", report.kind)));
    }
    let vertical = blowup_vertical(cs, n)?;
    let weighted = blowup_weighted(&vertical, n)?;
    let vsubs = divisor_points(&vertical)?;
    let wsubs = divisor_points(&weighted)?;
    if wsubs.iter().any(|r| r.kind == Kind::Degenerate) {
        report.notes.push("a degenerate point remains after the weighted blow-up".into());
        return Err(Error::Malformed("blow-up chain did not resolve the point".into()));
    }
    report.provenance.push(TransformRecord {
        transform: vertical.transform,
        description: describe(vertical.transform),
        cancelled_power: vertical.cancelled_power,
        sub_equilibria: vsubs,
    });
    report.provenance.push(TransformRecord {
        transform: weighted.transform,
        description: describe(weighted.transform),
        cancelled_power: weighted.cancelled_power,
        sub_equilibria: wsubs.clone(),
    });
    let hyperbolic_sectors = wsubs
        .iter()
        .filter(|r| matches!(r.kind, Kind::Saddle | Kind::SemiHyperbolicSaddle))
        .count();
    report.notes.push(format!(
        "blown down: {hyperbolic_sectors} saddle-type points on the divisor; two hyperbolic sectors separated by the equator"
    ));
    report.kind = Kind::ResolvedDegenerate;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compactification::{chart_system, ChartId};
    use crate::poly::rat;
    use crate::vectorfield::{lienard_form, rayleigh_system, RayleighParams};

    #[test]
    fn vertical_then_weighted_family() {
        for n in 1..=3 {
            let params = RayleighParams::new(-0.5, n).unwrap();
            let sys = lienard_form(params);
            let cs = chart_system(sys.exact(), ChartId::U2).unwrap();
            let v = blowup_vertical(&cs, n).unwrap();
            assert_eq!(v.cancelled_power, 2 * n - 1);
            let w = blowup_weighted(&v, n).unwrap();
            assert_eq!(w.cancelled_power, 2 * n);
            // w' = w(-1 + a r(-1 + w^{2n}))
            let a = rat(-1, 2);
            let want_w = Poly::from_terms([
                ((0, 1), rat(-1, 1)),
                ((1, 1), -a.clone()),
                ((1, 2 * n + 1), a.clone()),
            ]);
            assert_eq!(w.system.q, want_w);
        }
    }

    #[test]
    fn pullback_identity_numeric() {
        let params = RayleighParams::new(1.3, 2).unwrap();
        let cs = chart_system(lienard_form(params).exact(), ChartId::U2).unwrap();
        let src = cs.as_planar();
        let v = blowup_vertical(&cs, 2).unwrap();
        let vp = PlanarPolySystem::from_exact(v.system.clone());
        for &(x, z) in &[(0.3, 0.7), (-0.4, 1.1), (0.9, -0.2)] {
            assert!(pullback_defect_vertical(&src, &vp, v.cancelled_power, x, z) < 1e-12);
        }
        let w = blowup_weighted(&v, 2).unwrap();
        let wp = PlanarPolySystem::from_exact(w.system.clone());
        for &(r, ww) in &[(0.3, 0.7), (-2.0, 0.5), (1.5, -0.8)] {
            assert!(pullback_defect_weighted(&vp, &wp, 4, w.cancelled_power, r, ww) < 1e-12);
        }
    }

    #[test]
    fn resolved_structure() {
        let params = RayleighParams::new(2.0, 1).unwrap();
        let cs = chart_system(lienard_form(params).exact(), ChartId::U2).unwrap();
        let r = resolve_degenerate(&cs, 1).unwrap();
        assert_eq!(r.kind, Kind::ResolvedDegenerate);
        assert_eq!(r.provenance.len(), 2);
        let kinds: Vec<Kind> = r.provenance[1].sub_equilibria.iter().map(|s| s.kind).collect();
        assert_eq!(kinds, vec![Kind::SemiHyperbolicSaddle, Kind::Saddle]);
        let loc: Vec<f64> = r.provenance[1].sub_equilibria.iter().map(|s| s.location[0]).collect();
        assert_eq!(loc, vec![-0.5, 0.0]);
    }

    #[test]
    fn first_form_degenerate_point_in_u1() {
        let params = RayleighParams::new(-1.0, 2).unwrap();
        let cs = chart_system(rayleigh_system(params).exact(), ChartId::U1).unwrap();
        let r = resolve_degenerate(&cs, 2).unwrap();
        assert_eq!(r.kind, Kind::ResolvedDegenerate);
    }

    #[test]
    fn nonsingular_origin_errors() {
        let params = RayleighParams::new(0.0, 1).unwrap();
        let cs = chart_system(lienard_form(params).exact(), ChartId::U2).unwrap();
        assert!(matches!(resolve_degenerate(&cs, 1), Err(Error::NotSingular(_))));
    }
}
