//! Global phase portraits on the Poincaré disc.
//!
//! A portrait collects the finite origin, the singular points at infinity
//! (with the degenerate pair resolved by blow-ups), the limit cycle and a fan
//! of sampled orbits, all projected into the unit disc by
//! `(x, y) -> (x, y) / sqrt(1 + x² + y²)`. The topological class is read off
//! the computed features, not assumed from the parameters.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::compactification::{chart_system, infinite_equilibria, ChartId, InfiniteEquilibrium};
use crate::error::{Error, Result};
use crate::flow::Dopri5;
use crate::limitcycle::{find_cycle_with, log_grid, CycleOptions, LimitCycleRecord, Stability, Tolerances};
use crate::localanalysis::{classify_origin_finite, resolve_degenerate, EquilibriumReport, Kind};
use crate::poly::Horner;
use crate::vectorfield::{family_system, Form, PlanarPolySystem, Point, RayleighParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscPoint {
    pub x: f64,
    pub y: f64,
}

impl DiscPoint {
    pub fn from_plane(p: Point) -> DiscPoint {
        let s = (1.0 + p[0] * p[0] + p[1] * p[1]).sqrt();
        DiscPoint { x: p[0] / s, y: p[1] / s }
    }

    /// Point of the boundary circle in the given direction.
    pub fn at_infinity(direction: Point) -> DiscPoint {
        let s = direction[0].hypot(direction[1]);
        DiscPoint { x: direction[0] / s, y: direction[1] / s }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClassTag {
    ANeg,
    Center,
    APos,
}

impl std::fmt::Display for ClassTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ClassTag::ANeg => "A_NEG",
            ClassTag::Center => "CENTER",
            ClassTag::APos => "A_POS",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Equivalence {
    Equivalent,
    Distinct,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PortraitOptions {
    pub seeds: usize,
    pub seed_r_min: f64,
    pub seed_r_max: f64,
    /// Distance to the origin or the cycle at which an orbit is stopped.
    pub approach: f64,
    /// Disc radius at which an orbit is stopped.
    pub disc_limit: f64,
    pub t_max: f64,
    /// Angular offset of the near-equator seeds from a degenerate point.
    pub equator_offset: f64,
    pub tol: Tolerances,
}

impl Default for PortraitOptions {
    fn default() -> Self {
        PortraitOptions {
            seeds: 8,
            seed_r_min: 0.05,
            seed_r_max: 8.0,
            approach: 1e-3,
            disc_limit: 0.995,
            t_max: 200.0,
            equator_offset: 0.15,
            tol: Tolerances::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Orbit {
    pub seed: Point,
    /// Disc points in forward-time order.
    pub points: Vec<DiscPoint>,
    pub stop_forward: String,
    pub stop_backward: String,
    /// Periodic orbit drawn as a closed loop.
    pub closed: bool,
    /// Near-equator arc whose arrangement is only qualitatively resolved.
    pub qualitative: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Features {
    pub origin: Kind,
    pub cycle: Option<Stability>,
    /// Attractivity of the nodes at infinity: `"attracting"`, `"repelling"`,
    /// `"mixed"` or `"none"`.
    pub infinite_nodes: String,
    pub resolved_degenerate_points: usize,
    /// Whether origin, cycle and infinity alternate in stability as required
    /// for a portrait with a single cycle.
    pub consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PortraitModel {
    pub params: RayleighParams,
    pub form: Form,
    pub degree: u32,
    pub finite_equilibria: Vec<EquilibriumReport>,
    pub infinite_equilibria: Vec<InfiniteEquilibrium>,
    pub cycle: Option<LimitCycleRecord>,
    pub cycle_polyline: Vec<DiscPoint>,
    pub orbits: Vec<Orbit>,
    /// Sense of the flow along the boundary circle at sample angles:
    /// `+1` counterclockwise, `-1` clockwise.
    pub equator_flow: Vec<(f64, i8)>,
    pub features: Features,
    pub class_tag: ClassTag,
    pub signature: String,
    pub options: PortraitOptions,
    pub notes: Vec<String>,
}

impl PortraitModel {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("portrait model serializes")
    }
}

fn infinity_with_resolution(sys: &PlanarPolySystem, n: u32) -> Result<Vec<InfiniteEquilibrium>> {
    let mut out = infinite_equilibria(sys)?;
    for ie in &mut out {
        if ie.report.kind != Kind::Degenerate {
            continue;
        }
        let cs = chart_system(sys.exact(), ie.chart)?;
        match resolve_degenerate(&cs, n) {
            Ok(rep) => {
                ie.opposite = rep.mirrored(ie.chart.opposite(), ie.orientation_factor);
                ie.report = rep;
            }
            Err(e) => ie.report.notes.push(format!("blow-up resolution failed: {e}")),
        }
    }
    Ok(out)
}

fn is_node(k: Kind) -> bool {
    matches!(
        k,
        Kind::StableNode | Kind::UnstableNode | Kind::SemiHyperbolicNodeStable | Kind::SemiHyperbolicNodeUnstable
    )
}

fn features(origin: Kind, cycle: Option<&LimitCycleRecord>, inf: &[InfiniteEquilibrium]) -> Features {
    let nodes: Vec<Kind> = inf
        .iter()
        .flat_map(|ie| [ie.report.kind, ie.opposite.kind])
        .filter(|k| is_node(*k))
        .collect();
    let infinite_nodes = if nodes.is_empty() {
        "none"
    } else if nodes.iter().all(|k| k.is_attractor()) {
        "attracting"
    } else if nodes.iter().all(|k| k.is_repeller()) {
        "repelling"
    } else {
        "mixed"
    };
    let resolved = inf
        .iter()
        .flat_map(|ie| [ie.report.kind, ie.opposite.kind])
        .filter(|k| *k == Kind::ResolvedDegenerate)
        .count();
    let cycle_stab = cycle.map(|c| c.stability);
    let consistent = match cycle_stab {
        None => matches!(origin, Kind::Center) && nodes.is_empty(),
        Some(s) => {
            let origin_attracts = origin.is_attractor();
            let origin_repels = origin.is_repeller();
            let alternate = (origin_attracts && s == Stability::Unstable) || (origin_repels && s == Stability::Stable);
            let inf_ok = match infinite_nodes {
                "attracting" => origin_attracts,
                "repelling" => origin_repels,
                _ => false,
            };
            alternate && inf_ok
        }
    };
    Features {
        origin,
        cycle: cycle_stab,
        infinite_nodes: infinite_nodes.to_string(),
        resolved_degenerate_points: resolved,
        consistent,
    }
}

/// Class from the features. The first form is the swapped, time-reversed
/// second form, so its features are read with the opposite orientation.
fn class_from_features(f: &Features, form: Form) -> Result<ClassTag> {
    if f.cycle.is_none() && f.origin == Kind::Center {
        return Ok(ClassTag::Center);
    }
    if !f.consistent {
        return Err(Error::Malformed(format!("inconsistent portrait features: {f:?}")));
    }
    let attracting_origin = f.origin.is_attractor();
    let positive = match form {
        Form::Eq2 => attracting_origin,
        Form::Eq1 => !attracting_origin,
    };
    Ok(if positive { ClassTag::APos } else { ClassTag::ANeg })
}

fn signature(f: &Features) -> String {
    format!(
        "origin={};cycle={};infinite-nodes={};resolved-degenerate={}",
        f.origin,
        f.cycle.map(|s| format!("{s:?}").to_lowercase()).unwrap_or_else(|| "none".into()),
        f.infinite_nodes,
        f.resolved_degenerate_points
    )
}

fn distance_to_polyline(p: Point, line: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for w in line.windows(2) {
        let (a, b) = (w[0], w[1]);
        let d = [b[0] - a[0], b[1] - a[1]];
        let len2 = d[0] * d[0] + d[1] * d[1];
        let s = if len2 == 0.0 {
            0.0
        } else {
            (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
        };
        let q = [a[0] + s * d[0] - p[0], a[1] + s * d[1] - p[1]];
        best = best.min(q[0].hypot(q[1]));
    }
    best
}

const DENSE_PER_STEP: usize = 4;

/// Integrates in one time direction until a stop condition; returns the
/// samples (excluding the seed) and the reason for stopping.
fn half_orbit(
    sys: &PlanarPolySystem,
    seed: Point,
    dir: f64,
    cycle: &[Point],
    opts: &PortraitOptions,
) -> (Vec<Point>, String) {
    let f = |s: &[f64; 2]| sys.evaluate(*s);
    let mut solver = match Dopri5::new(f, seed, 0.0, dir, opts.tol.rtol, opts.tol.atol) {
        Ok(s) => s,
        Err(e) => return (Vec::new(), format!("error: {e}")),
    };
    let r_limit = opts.disc_limit / (1.0 - opts.disc_limit * opts.disc_limit).sqrt();
    let mut out = Vec::new();
    loop {
        if solver.t().abs() >= opts.t_max {
            return (out, "time-limit".into());
        }
        if let Err(e) = solver.step(Some(dir * opts.t_max)) {
            let reason = if matches!(e, Error::BlowUp { .. }) { "infinity" } else { "integration-error" };
            return (out, reason.into());
        }
        let (t0, t1) = solver.last_step();
        for k in 1..DENSE_PER_STEP {
            let t = t0 + (t1 - t0) * k as f64 / DENSE_PER_STEP as f64;
            out.push(solver.dense(t));
        }
        let y = *solver.y();
        out.push(y);
        let r = y[0].hypot(y[1]);
        if r >= r_limit {
            return (out, "disc-limit".into());
        }
        if r <= opts.approach {
            return (out, "origin".into());
        }
        if !cycle.is_empty() && distance_to_polyline(y, cycle) <= opts.approach {
            return (out, "cycle".into());
        }
    }
}

fn sample_orbit(sys: &PlanarPolySystem, seed: Point, cycle: &[Point], opts: &PortraitOptions, qualitative: bool) -> Orbit {
    let (fwd, stop_forward) = half_orbit(sys, seed, 1.0, cycle, opts);
    let (mut bwd, stop_backward) = half_orbit(sys, seed, -1.0, cycle, opts);
    bwd.reverse();
    let points = bwd
        .iter()
        .chain(std::iter::once(&seed))
        .chain(&fwd)
        .map(|p| DiscPoint::from_plane(*p))
        .collect();
    Orbit { seed, points, stop_forward, stop_backward, closed: false, qualitative }
}

/// Periodic orbit of the linear center through `seed`, one full turn.
fn closed_orbit(sys: &PlanarPolySystem, seed: Point, opts: &PortraitOptions) -> Orbit {
    let period = 2.0 * std::f64::consts::PI;
    let f = |s: &[f64; 2]| sys.evaluate(*s);
    let mut points = vec![DiscPoint::from_plane(seed)];
    let mut stop = "period".to_string();
    match Dopri5::new(f, seed, 0.0, 1.0, opts.tol.rtol, opts.tol.atol) {
        Ok(mut solver) => {
            while solver.t() < period {
                if let Err(e) = solver.step(Some(period)) {
                    stop = format!("error: {e}");
                    break;
                }
                let (t0, t1) = solver.last_step();
                for k in 1..=DENSE_PER_STEP {
                    let t = t0 + (t1 - t0) * k as f64 / DENSE_PER_STEP as f64;
                    points.push(DiscPoint::from_plane(solver.dense(t)));
                }
            }
        }
        Err(e) => stop = format!("error: {e}"),
    }
    Orbit { seed, points, stop_forward: stop, stop_backward: "periodic".into(), closed: true, qualitative: false }
}

/// Sense of the flow on the boundary circle from the `U1` chart restricted to
/// `v = 0`; on the `V1` side the field carries the factor `(-1)^{d-1}`.
fn equator_flow(sys: &PlanarPolySystem, factor: i32) -> Result<Vec<(f64, i8)>> {
    let u1 = chart_system(sys.exact(), ChartId::U1)?;
    let du = Horner::new(&u1.du);
    let mut out = Vec::new();
    for k in 0..24 {
        let theta = (k as f64 + 0.5) * std::f64::consts::PI / 12.0;
        let c = theta.cos();
        if c.abs() < 1e-3 {
            continue;
        }
        let v = du.eval(theta.tan(), 0.0);
        if v == 0.0 {
            continue;
        }
        let s = if c > 0.0 { v.signum() } else { factor as f64 * v.signum() };
        out.push((theta, s as i8));
    }
    Ok(out)
}

pub fn build_portrait(params: RayleighParams, form: Form, options: &PortraitOptions) -> Result<PortraitModel> {
    if options.seeds < 2 || !(options.disc_limit > 0.0 && options.disc_limit < 1.0) {
        return Err(Error::InvalidParams("portrait options out of range".into()));
    }
    let sys = family_system(params, form);
    let degree = sys.degree();
    let origin = classify_origin_finite(params, form)?;
    let infinite = infinity_with_resolution(&sys, params.n)?;
    let factor = infinite.first().map(|ie| ie.orientation_factor).unwrap_or(1);
    let cycle = if params.a != 0.0 {
        let opts = CycleOptions { tol: options.tol, ..CycleOptions::default() };
        Some(find_cycle_with(params, form, &opts)?)
    } else {
        None
    };
    let cycle_pts: Vec<Point> = cycle.as_ref().map(|c| c.polyline.clone()).unwrap_or_default();

    let radii = log_grid(options.seed_r_min, options.seed_r_max, options.seeds);
    let seeds: Vec<Point> = radii
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let th = std::f64::consts::TAU * k as f64 / options.seeds as f64;
            [r * th.cos(), r * th.sin()]
        })
        .collect();
    let mut orbits: Vec<Orbit> = if cycle.is_none() {
        seeds.par_iter().map(|s| closed_orbit(&sys, *s, options)).collect()
    } else {
        seeds.par_iter().map(|s| sample_orbit(&sys, *s, &cycle_pts, options, false)).collect()
    };

    // near-equator arcs on both sides of each resolved degenerate point
    let rho = 0.5 * (1.0 + options.disc_limit) - 0.01;
    let r_eq = rho / (1.0 - rho * rho).sqrt();
    let mut eq_seeds = Vec::new();
    for ie in &infinite {
        if ie.report.kind != Kind::ResolvedDegenerate {
            continue;
        }
        for d in [ie.direction, [-ie.direction[0], -ie.direction[1]]] {
            let base = d[1].atan2(d[0]);
            for off in [-options.equator_offset, options.equator_offset] {
                let th = base + off;
                eq_seeds.push([r_eq * th.cos(), r_eq * th.sin()]);
            }
        }
    }
    orbits.extend(eq_seeds.par_iter().map(|s| sample_orbit(&sys, *s, &cycle_pts, options, true)).collect::<Vec<_>>());

    let feats = features(origin.kind, cycle.as_ref(), &infinite);
    let class_tag = class_from_features(&feats, form)?;
    let mut notes = Vec::new();
    let expected = if params.a == 0.0 {
        ClassTag::Center
    } else if params.a > 0.0 {
        ClassTag::APos
    } else {
        ClassTag::ANeg
    };
    if class_tag != expected {
        notes.push(format!("feature class {class_tag} differs from sign of a ({expected})"));
    }
    if !eq_seeds.is_empty() {
        notes.push("near-equator arcs are qualitative: they show the sector structure implied by the resolved saddle pair".into());
    }
    Ok(PortraitModel {
        params,
        form,
        degree,
        finite_equilibria: vec![origin],
        cycle_polyline: cycle_pts.iter().map(|p| DiscPoint::from_plane(*p)).collect(),
        equator_flow: equator_flow(&sys, factor)?,
        signature: signature(&feats),
        infinite_equilibria: infinite,
        cycle,
        orbits,
        features: feats,
        class_tag,
        options: *options,
        notes,
    })
}

pub fn topological_class(p1: &PortraitModel, p2: &PortraitModel) -> Equivalence {
    if p1.class_tag == p2.class_tag {
        Equivalence::Equivalent
    } else {
        Equivalence::Distinct
    }
}

struct Canvas {
    c: f64,
    r: f64,
}

impl Canvas {
    fn map(&self, p: DiscPoint) -> (f64, f64) {
        (self.c + self.r * p.x, self.c - self.r * p.y)
    }
}

fn glyph(out: &mut String, cv: &Canvas, at: DiscPoint, kind: Kind, place: &str) {
    let (x, y) = cv.map(at);
    let s = 6.0;
    let fill = if kind.is_attractor() {
        "#000"
    } else if kind.is_repeller() {
        "#fff"
    } else {
        "#888"
    };
    let attrs = format!(r##"class="equilibrium {place}" data-kind="{kind}" fill="{fill}" stroke="#000""##);
    let poly = |pts: &[(f64, f64)]| {
        pts.iter().map(|(dx, dy)| format!("{:.2},{:.2}", x + dx, y + dy)).collect::<Vec<_>>().join(" ")
    };
    let _ = match kind {
        Kind::StableNode | Kind::UnstableNode | Kind::SemiHyperbolicNodeStable | Kind::SemiHyperbolicNodeUnstable => {
            writeln!(out, r#"<rect {attrs} x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#, x - s, y - s, 2.0 * s, 2.0 * s)
        }
        Kind::StableFocus | Kind::UnstableFocus => {
            writeln!(out, r#"<polygon {attrs} points="{}"/>"#, poly(&[(0.0, -s), (s, s), (-s, s)]))
        }
        Kind::Saddle | Kind::SemiHyperbolicSaddle => writeln!(
            out,
            r#"<path {attrs} stroke-width="2" d="M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}"/>"#,
            x - s, y - s, x + s, y + s, x - s, y + s, x + s, y - s
        ),
        Kind::Center | Kind::CenterOrWeakFocus => {
            writeln!(out, r#"<polygon {attrs} points="{}"/>"#, poly(&[(0.0, -s), (s, 0.0), (0.0, s), (-s, 0.0)]))
        }
        Kind::SaddleNode => writeln!(
            out,
            r#"<polygon {attrs} points="{}"/>"#,
            poly(&[(0.0, -s), (s, -0.3 * s), (0.6 * s, s), (-0.6 * s, s), (-s, -0.3 * s)])
        ),
        Kind::Degenerate | Kind::ResolvedDegenerate => {
            let h = s * 0.87;
            writeln!(
                out,
                r#"<polygon {attrs} points="{}"/>"#,
                poly(&[(s, 0.0), (s / 2.0, h), (-s / 2.0, h), (-s, 0.0), (-s / 2.0, -h), (s / 2.0, -h)])
            )
        }
    };
}

fn arrowhead(out: &mut String, class: &str, tip: (f64, f64), dir: (f64, f64)) {
    let len = dir.0.hypot(dir.1);
    if len == 0.0 {
        return;
    }
    let (ux, uy) = (dir.0 / len, dir.1 / len);
    let (a, w) = (7.0, 3.5);
    let base = (tip.0 - a * ux, tip.1 - a * uy);
    let _ = writeln!(
        out,
        r##"<polygon class="{class}" fill="#236" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}"/>"##,
        tip.0, tip.1, base.0 - w * uy, base.1 + w * ux, base.0 + w * uy, base.1 - w * ux
    );
}

fn path_data(cv: &Canvas, pts: &[DiscPoint], close: bool) -> String {
    let mut d = String::new();
    for (i, p) in pts.iter().enumerate() {
        let (x, y) = cv.map(*p);
        let _ = write!(d, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, x, y);
    }
    if close {
        d.push('Z');
    }
    d.trim_end().to_string()
}

/// Arrow at the middle (by arc length in the disc) of a polyline.
fn mid_arrow(out: &mut String, cv: &Canvas, pts: &[DiscPoint]) {
    if pts.len() < 3 {
        return;
    }
    let mapped: Vec<(f64, f64)> = pts.iter().map(|p| cv.map(*p)).collect();
    let seg: Vec<f64> = mapped.windows(2).map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1)).collect();
    let total: f64 = seg.iter().sum();
    if total < 10.0 {
        return;
    }
    let mut acc = 0.0;
    for (i, l) in seg.iter().enumerate() {
        if acc + l >= total / 2.0 && *l > 0.0 {
            let (a, b) = (mapped[i], mapped[i + 1]);
            arrowhead(out, "arrow", b, (b.0 - a.0, b.1 - a.1));
            return;
        }
        acc += l;
    }
}

pub fn render_svg(model: &PortraitModel, size_px: u32) -> Result<String> {
    if size_px < 200 {
        return Err(Error::InvalidParams("size must be at least 200 px".into()));
    }
    let size = size_px as f64;
    let cv = Canvas { c: size / 2.0, r: 0.45 * size };
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size_px}" height="{size_px}" viewBox="0 0 {size_px} {size_px}">"#
    );
    let config = serde_json::json!({
        "params": model.params,
        "form": model.form,
        "size_px": size_px,
        "class_tag": model.class_tag.to_string(),
        "options": model.options,
    });
    let _ = writeln!(out, "<!-- config: {} -->", config.to_string().replace("--", "- -"));
    let _ = writeln!(
        out,
        r#"<title>a = {}, n = {}, form {}: {}</title>"#,
        model.params.a, model.params.n, model.form, model.class_tag
    );
    let _ = writeln!(out, r##"<rect class="background" x="0" y="0" width="{size_px}" height="{size_px}" fill="#fff"/>"##);
    let _ = writeln!(
        out,
        r##"<circle class="boundary" cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="#000" stroke-width="1.5"/>"##,
        cv.c, cv.c, cv.r
    );

    for orbit in &model.orbits {
        let class = match (orbit.closed, orbit.qualitative) {
            (true, _) => "orbit loop",
            (false, true) => "orbit qualitative",
            (false, false) => "orbit",
        };
        let dash = if orbit.qualitative { r#" stroke-dasharray="4,3""# } else { "" };
        let _ = writeln!(
            out,
            r##"<path class="{class}" fill="none" stroke="#236" stroke-width="1"{dash} d="{}"/>"##,
            path_data(&cv, &orbit.points, orbit.closed)
        );
        mid_arrow(&mut out, &cv, &orbit.points);
    }

    if !model.cycle_polyline.is_empty() {
        let _ = writeln!(
            out,
            r##"<path class="cycle" fill="none" stroke="#c00" stroke-width="2.5" d="{}"/>"##,
            path_data(&cv, &model.cycle_polyline, true)
        );
        mid_arrow(&mut out, &cv, &model.cycle_polyline);
    }

    for (theta, sense) in &model.equator_flow {
        let tip = cv.map(DiscPoint { x: theta.cos(), y: theta.sin() });
        // counterclockwise in the plane is (-sin, cos); screen y points down
        let s = *sense as f64;
        arrowhead(&mut out, "arrow equator", tip, (-s * theta.sin(), -s * theta.cos()));
    }

    for eq in &model.finite_equilibria {
        glyph(&mut out, &cv, DiscPoint::from_plane(eq.location), eq.kind, "finite");
    }
    for ie in &model.infinite_equilibria {
        let d = ie.direction;
        glyph(&mut out, &cv, DiscPoint::at_infinity(d), ie.report.kind, "infinite");
        glyph(&mut out, &cv, DiscPoint::at_infinity([-d[0], -d[1]]), ie.opposite.kind, "infinite");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(a: f64, n: u32, form: Form) -> PortraitModel {
        build_portrait(RayleighParams::new(a, n).unwrap(), form, &PortraitOptions::default()).unwrap()
    }

    #[test]
    fn disc_projection() {
        let p = DiscPoint::from_plane([3.0, 4.0]);
        assert!((p.norm() - 5.0 / 26f64.sqrt()).abs() < 1e-15);
        assert!(DiscPoint::from_plane([1e12, 0.0]).norm() < 1.0 + 1e-15);
        assert!((DiscPoint::at_infinity([0.0, 2.0]).y - 1.0).abs() < 1e-15);
    }

    #[test]
    fn classes_of_the_three_regimes() {
        let neg = quick(-1.0, 1, Form::Eq2);
        assert_eq!(neg.class_tag, ClassTag::ANeg);
        assert_eq!(neg.finite_equilibria[0].kind, Kind::UnstableFocus);
        assert_eq!(neg.features.infinite_nodes, "repelling");
        assert!(neg.cycle.is_some());
        let pos = quick(1.0, 2, Form::Eq2);
        assert_eq!(pos.class_tag, ClassTag::APos);
        assert_eq!(pos.features.infinite_nodes, "attracting");
        let c = quick(0.0, 1, Form::Eq2);
        assert_eq!(c.class_tag, ClassTag::Center);
        assert!(c.cycle.is_none());
        assert!(c.orbits.iter().all(|o| o.closed));
        assert_eq!(topological_class(&neg, &pos), Equivalence::Distinct);
        assert_eq!(topological_class(&c, &pos), Equivalence::Distinct);
        assert!(neg.notes.iter().all(|n| !n.contains("differs")));
    }

    #[test]
    fn first_form_tags_follow_sign_of_a() {
        assert_eq!(quick(0.5, 1, Form::Eq1).class_tag, ClassTag::APos);
        assert_eq!(quick(-0.5, 1, Form::Eq1).class_tag, ClassTag::ANeg);
    }

    #[test]
    fn orbits_stay_in_disc() {
        let m = quick(-0.5, 2, Form::Eq2);
        for o in &m.orbits {
            assert!(o.points.iter().all(|p| p.norm() <= 1.0));
        }
        assert!(m.orbits.iter().any(|o| o.qualitative));
        assert_eq!(m.features.resolved_degenerate_points, 2);
    }

    #[test]
    fn svg_rejects_small_canvas() {
        let m = quick(0.0, 1, Form::Eq2);
        assert!(render_svg(&m, 199).is_err());
        let s = render_svg(&m, 200).unwrap();
        assert_eq!(s.matches("<circle").count(), 1);
        assert!(!s.contains(r#"class="cycle""#));
    }
}
