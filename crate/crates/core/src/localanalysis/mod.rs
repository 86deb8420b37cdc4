//! Local phase portraits of singular points.
//!
//! Nondegenerate points are classified from the trace and determinant of the
//! linear part. Semi-hyperbolic points (one zero eigenvalue) are brought to
//! the normal form `x' = A(x, y)`, `y' = λ y + B(x, y)` and handled in
//! [`semihyperbolic`]. Nilpotent-free degenerate points (zero linear part)
//! are desingularized by the blow-ups in [`blowup`].

pub mod blowup;
pub mod semihyperbolic;

use serde::{Deserialize, Serialize};

use crate::compactification::ChartId;
use crate::error::{Error, Result};
use crate::poly::{rat_to_f64, rational_from_f64, Coeff, Poly, Rational};
use crate::vectorfield::{family_system, mat_det, mat_trace, Form, Mat2, PlanarPolySystem, Point, PolySystem, RayleighParams};

pub use blowup::{blowup_vertical, blowup_weighted, resolve_degenerate, BlowUpSystem, Transform};
pub use semihyperbolic::{classify_semihyperbolic, SemiHyperbolicData};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Saddle,
    StableNode,
    UnstableNode,
    StableFocus,
    UnstableFocus,
    /// Linear part is a center; higher-order terms decide.
    CenterOrWeakFocus,
    /// Linear systems with purely imaginary eigenvalues.
    Center,
    SemiHyperbolicSaddle,
    SemiHyperbolicNodeStable,
    SemiHyperbolicNodeUnstable,
    SaddleNode,
    Degenerate,
    #[serde(rename = "degenerate-resolved")]
    ResolvedDegenerate,
}

impl Kind {
    /// The kind seen after `t -> -t`.
    pub fn time_reversed(self) -> Kind {
        match self {
            Kind::StableNode => Kind::UnstableNode,
            Kind::UnstableNode => Kind::StableNode,
            Kind::StableFocus => Kind::UnstableFocus,
            Kind::UnstableFocus => Kind::StableFocus,
            Kind::SemiHyperbolicNodeStable => Kind::SemiHyperbolicNodeUnstable,
            Kind::SemiHyperbolicNodeUnstable => Kind::SemiHyperbolicNodeStable,
            other => other,
        }
    }

    pub fn is_attractor(self) -> bool {
        matches!(self, Kind::StableNode | Kind::StableFocus | Kind::SemiHyperbolicNodeStable)
    }

    pub fn is_repeller(self) -> bool {
        matches!(self, Kind::UnstableNode | Kind::UnstableFocus | Kind::SemiHyperbolicNodeUnstable)
    }

    pub fn label(self) -> &'static str {
        match self {
            Kind::Saddle => "saddle",
            Kind::StableNode => "stable-node",
            Kind::UnstableNode => "unstable-node",
            Kind::StableFocus => "stable-focus",
            Kind::UnstableFocus => "unstable-focus",
            Kind::CenterOrWeakFocus => "center-or-weak-focus",
            Kind::Center => "center",
            Kind::SemiHyperbolicSaddle => "semi-hyperbolic-saddle",
            Kind::SemiHyperbolicNodeStable => "semi-hyperbolic-node-stable",
            Kind::SemiHyperbolicNodeUnstable => "semi-hyperbolic-node-unstable",
            Kind::SaddleNode => "saddle-node",
            Kind::Degenerate => "degenerate",
            Kind::ResolvedDegenerate => "degenerate-resolved",
        }
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// One step of a desingularization chain.
#[derive(Clone, Debug, Serialize)]
pub struct TransformRecord {
    pub transform: Transform,
    pub description: String,
    pub cancelled_power: u32,
    pub sub_equilibria: Vec<EquilibriumReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquilibriumReport {
    pub location: Point,
    /// `None` for finite points of the original plane.
    pub chart: Option<ChartId>,
    pub jac: Mat2,
    pub delta: f64,
    pub gamma: f64,
    pub kind: Kind,
    pub provenance: Vec<TransformRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semi_hyperbolic: Option<SemiHyperbolicData>,
    pub notes: Vec<String>,
}

impl EquilibriumReport {
    /// The same point seen in the opposite chart, whose field is the
    /// original one multiplied by `factor = (-1)^{d-1}`.
    pub fn mirrored(&self, chart: ChartId, factor: i32) -> EquilibriumReport {
        let f = factor as f64;
        let mut out = self.clone();
        out.chart = Some(chart);
        out.jac = [[f * self.jac[0][0], f * self.jac[0][1]], [f * self.jac[1][0], f * self.jac[1][1]]];
        out.gamma = f * self.gamma;
        if factor < 0 {
            out.kind = self.kind.time_reversed();
            out.notes.push("orientation reversed by the antipodal chart".into());
        }
        out
    }
}

/// Classification of a hyperbolic or center-type linear part.
pub fn classify_nondegenerate(jac: &Mat2) -> Result<Kind> {
    let delta = mat_det(jac);
    let gamma = mat_trace(jac);
    let scale = jac.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale * scale;
    if delta.abs() <= tol || !delta.is_finite() {
        return Err(Error::NotNondegenerate { delta, gamma });
    }
    if delta < 0.0 {
        return Ok(Kind::Saddle);
    }
    if gamma.abs() <= 1e-12 * scale {
        return Ok(Kind::CenterOrWeakFocus);
    }
    let disc = gamma * gamma - 4.0 * delta;
    let kind = if disc >= -tol {
        if gamma < 0.0 { Kind::StableNode } else { Kind::UnstableNode }
    } else if gamma < 0.0 {
        Kind::StableFocus
    } else {
        Kind::UnstableFocus
    };
    Ok(kind)
}

fn rmat_to_f64(m: &[[Rational; 2]; 2]) -> Mat2 {
    [[rat_to_f64(&m[0][0]), rat_to_f64(&m[0][1])], [rat_to_f64(&m[1][0]), rat_to_f64(&m[1][1])]]
}

/// Classifies a singular point of `sys`. With `exact` coordinates the
/// degeneracy tests are exact; otherwise they use a relative tolerance.
pub fn classify_point(
    sys: &PlanarPolySystem,
    pt: Point,
    exact: Option<(Rational, Rational)>,
    chart: Option<ChartId>,
) -> Result<EquilibriumReport> {
    let zero = Rational::from_i64(0);
    let (jac, jac_exact) = match &exact {
        Some((x, y)) => {
            let e = sys.exact();
            if e.p.eval_exact(x, y) != zero || e.q.eval_exact(x, y) != zero {
                return Err(Error::NotSingular(format!("({x}, {y})")));
            }
            let j = sys.jacobian_exact(x, y);
            (rmat_to_f64(&j), Some(j))
        }
        None => {
            let f = sys.evaluate(pt);
            if f[0].hypot(f[1]) > 1e-9 * (1.0 + pt[0].hypot(pt[1])) {
                return Err(Error::NotSingular(format!("{pt:?}")));
            }
            (sys.jacobian(pt), None)
        }
    };
    let delta = mat_det(&jac);
    let gamma = mat_trace(&jac);
    let (delta_zero, gamma_zero) = match &jac_exact {
        Some(j) => {
            let d = &j[0][0] * &j[1][1] - &j[0][1] * &j[1][0];
            let g = &j[0][0] + &j[1][1];
            (d == zero, g == zero)
        }
        None => {
            let scale = jac.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            (delta.abs() <= 1e-12 * scale * scale, gamma.abs() <= 1e-12 * scale)
        }
    };
    let mut report = EquilibriumReport {
        location: pt,
        chart,
        jac,
        delta,
        gamma,
        kind: Kind::Degenerate,
        provenance: Vec::new(),
        semi_hyperbolic: None,
        notes: Vec::new(),
    };
    if !delta_zero {
        let mut kind = classify_nondegenerate(&jac)?;
        if kind == Kind::CenterOrWeakFocus && gamma_zero && sys.degree() == 1 {
            kind = Kind::Center;
        }
        report.kind = kind;
    } else if !gamma_zero {
        let (px, py) = match exact {
            Some(p) => p,
            None => {
                report.notes.push("semi-hyperbolic normal form built from a rounded location".into());
                (rational_from_f64(pt[0]), rational_from_f64(pt[1]))
            }
        };
        let j = jac_exact.unwrap_or_else(|| sys.jacobian_exact(&px, &py));
        let local = semihyperbolic_normal_form(sys.exact(), (&px, &py), &j)?;
        let (kind, data) = classify_semihyperbolic(&local)?;
        if data.time_reversed {
            report.notes.push("λ<0: table applied to the time-reversed normal form, stability swapped back".into());
        }
        report.kind = kind;
        report.semi_hyperbolic = Some(data);
    }
    Ok(report)
}

fn kernel(m: &[[Rational; 2]; 2]) -> [Rational; 2] {
    let zero = Rational::from_i64(0);
    if m[0][0] != zero || m[0][1] != zero {
        [-m[0][1].clone(), m[0][0].clone()]
    } else {
        [-m[1][1].clone(), m[1][0].clone()]
    }
}

/// Translates a semi-hyperbolic point to the origin and diagonalizes its
/// linear part to `diag(0, λ)`, so the center direction is `x`.
pub fn semihyperbolic_normal_form(
    sys: &PolySystem<Rational>,
    pt: (&Rational, &Rational),
    jac: &[[Rational; 2]; 2],
) -> Result<PolySystem<Rational>> {
    let lambda = &jac[0][0] + &jac[1][1];
    let shifted = [
        [&jac[0][0] - &lambda, jac[0][1].clone()],
        [jac[1][0].clone(), &jac[1][1] - &lambda],
    ];
    let e0 = kernel(jac);
    let el = kernel(&shifted);
    let det = &e0[0] * &el[1] - &el[0] * &e0[1];
    if det == Rational::from_i64(0) {
        return Err(Error::Malformed("semi-hyperbolic eigenvectors are parallel".into()));
    }
    let c = |r: &Rational| Poly::constant(r.clone());
    let sx = &(&c(pt.0) + &Poly::monomial(1, 0, e0[0].clone())) + &Poly::monomial(0, 1, el[0].clone());
    let sy = &(&c(pt.1) + &Poly::monomial(1, 0, e0[1].clone())) + &Poly::monomial(0, 1, el[1].clone());
    let p = sys.p.compose(&sx, &sy);
    let q = sys.q.compose(&sx, &sy);
    // inverse of [[e0x, elx], [e0y, ely]]
    let inv = [
        [&el[1] / &det, -(&el[0] / &det)],
        [-(&e0[1] / &det), &e0[0] / &det],
    ];
    let np = &p.scale(&inv[0][0]) + &q.scale(&inv[0][1]);
    let nq = &p.scale(&inv[1][0]) + &q.scale(&inv[1][1]);
    Ok(PolySystem::new(np, nq))
}

/// The finite origin, the only finite singular point of the family.
pub fn classify_origin_finite(params: RayleighParams, form: Form) -> Result<EquilibriumReport> {
    let zero = || Rational::from_i64(0);
    let eq2 = family_system(params, Form::Eq2);
    let base = classify_point(&eq2, [0.0, 0.0], Some((zero(), zero())), None)?;
    match form {
        Form::Eq2 => Ok(base),
        Form::Eq1 => {
            let eq1 = family_system(params, Form::Eq1);
            let mut direct = classify_point(&eq1, [0.0, 0.0], Some((zero(), zero())), None)?;
            let flipped = base.kind.time_reversed();
            if flipped == direct.kind {
                direct.notes.push("agrees with the swapped, time-reversed second form".into());
            } else {
                direct.notes.push(format!(
                    "mismatch: second form gives {} which flips to {}",
                    base.kind, flipped
                ));
            }
            Ok(direct)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    #[test]
    fn nondegenerate_table() {
        assert_eq!(classify_nondegenerate(&[[1.0, 0.0], [0.0, -1.0]]).unwrap(), Kind::Saddle);
        assert_eq!(classify_nondegenerate(&[[-1.0, 0.0], [0.0, -1.0]]).unwrap(), Kind::StableNode);
        assert_eq!(classify_nondegenerate(&[[1.0, 0.0], [0.0, 2.0]]).unwrap(), Kind::UnstableNode);
        assert_eq!(classify_nondegenerate(&[[-0.5, 1.0], [-1.0, -0.5]]).unwrap(), Kind::StableFocus);
        assert_eq!(classify_nondegenerate(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap(), Kind::CenterOrWeakFocus);
        // repeated eigenvalue counts as a node
        assert_eq!(classify_nondegenerate(&[[-1.0, 1.0], [0.0, -1.0]]).unwrap(), Kind::StableNode);
        assert!(matches!(
            classify_nondegenerate(&[[0.0, 1.0], [0.0, 0.0]]),
            Err(Error::NotNondegenerate { .. })
        ));
    }

    #[test]
    fn origin_of_family() {
        let p = |a| RayleighParams::new(a, 2).unwrap();
        assert_eq!(classify_origin_finite(p(-1.0), Form::Eq2).unwrap().kind, Kind::UnstableFocus);
        assert_eq!(classify_origin_finite(p(1.0), Form::Eq2).unwrap().kind, Kind::StableFocus);
        assert_eq!(classify_origin_finite(p(0.0), Form::Eq2).unwrap().kind, Kind::Center);
        assert_eq!(classify_origin_finite(p(-3.0), Form::Eq2).unwrap().kind, Kind::UnstableNode);
        let r = classify_origin_finite(p(1.0), Form::Eq1).unwrap();
        assert_eq!(r.kind, Kind::UnstableFocus);
        assert!(r.notes[0].starts_with("agrees"));
    }

    #[test]
    fn nonsingular_point_rejected() {
        let sys = PlanarPolySystem::new(Poly::constant(rat(1, 1)) + Poly::x(), Poly::y());
        let e = classify_point(&sys, [0.0, 0.0], Some((rat(0, 1), rat(0, 1))), None);
        assert!(matches!(e, Err(Error::NotSingular(_))));
    }

    #[test]
    fn mirrored_even_degree_flips() {
        let sys = PlanarPolySystem::new(-&Poly::x(), &(-&Poly::y()) + &Poly::monomial(2, 0, rat(1, 1)));
        let r = classify_point(&sys, [0.0, 0.0], Some((rat(0, 1), rat(0, 1))), None).unwrap();
        assert_eq!(r.kind, Kind::StableNode);
        let m = r.mirrored(ChartId::V1, -1);
        assert_eq!(m.kind, Kind::UnstableNode);
        assert_eq!(m.gamma, 2.0);
    }

    #[test]
    fn semihyperbolic_via_rotation() {
        // x' = x + y - (x+y)... build: linear part with eigenvalues 0 and 2, not diagonal
        // P = x + y + y^2, Q = x + y  (J = [[1,1],[1,1]])
        let p = &(&Poly::x() + &Poly::y()) + &Poly::monomial(0, 2, rat(1, 1));
        let q = &Poly::x() + &Poly::y();
        let sys = PlanarPolySystem::new(p, q);
        let r = classify_point(&sys, [0.0, 0.0], Some((rat(0, 1), rat(0, 1))), None).unwrap();
        let data = r.semi_hyperbolic.as_ref().unwrap();
        assert_eq!(data.alpha, 2);
        assert_eq!(r.kind, Kind::SaddleNode);
    }
}
