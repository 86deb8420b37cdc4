//! Adaptive Dormand–Prince 5(4) integration with 4th-order dense output,
//! trajectory export and ray-section crossings.
//!
//! The stepper works on `N`-dimensional autonomous systems; planar flows run
//! with `N = 3`, the extra component accumulating `∫ div F dt` along the orbit.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::vectorfield::{PlanarPolySystem, Point};

#[cfg(test)]
const C2: f64 = 1.0 / 5.0;
#[cfg(test)]
const C3: f64 = 3.0 / 10.0;
#[cfg(test)]
const C4: f64 = 4.0 / 5.0;
#[cfg(test)]
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// States with a planar component beyond this magnitude count as escaped.
pub const ESCAPE_RADIUS: f64 = 1e6;
pub const RTOL_RANGE: (f64, f64) = (1e-13, 1e-3);

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Step-by-step DOPRI5 integrator. Time may run in either direction.
pub struct Dopri5<const N: usize, F: Fn(&[f64; N]) -> [f64; N]> {
    f: F,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    dir: f64,
    rtol: f64,
    atol: f64,
    t_old: f64,
    h_old: f64,
    rcont: [[f64; N]; 5],
    facold: f64,
    stats: Stats,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

impl<const N: usize, F: Fn(&[f64; N]) -> [f64; N]> Dopri5<N, F> {
    /// `direction` is the sign of time (`+1` forward, `-1` backward).
    pub fn new(f: F, y0: [f64; N], t0: f64, direction: f64, rtol: f64, atol: f64) -> Result<Self> {
        check_tolerances(rtol, atol)?;
        let k1 = f(&y0);
        let mut s = Dopri5 {
            f,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            dir: if direction < 0.0 { -1.0 } else { 1.0 },
            rtol,
            atol,
            t_old: t0,
            h_old: 0.0,
            rcont: [y0; 5],
            facold: 1e-4,
            stats: Stats { evaluations: 1, ..Stats::default() },
        };
        s.h = s.initial_step();
        Ok(s)
    }

    fn norm(&self, v: &[f64; N], y: &[f64; N]) -> f64 {
        let mut s = 0.0;
        for i in 0..N {
            let sc = self.atol + self.rtol * y[i].abs();
            s += (v[i] / sc).powi(2);
        }
        (s / N as f64).sqrt()
    }

    fn initial_step(&mut self) -> f64 {
        let d0 = self.norm(&self.y, &self.y);
        let d1 = self.norm(&self.k1, &self.y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1 = axpy(&self.y, self.dir * h0, &[(1.0, &self.k1)]);
        let f1 = (self.f)(&y1);
        self.stats.evaluations += 1;
        let mut diff = [0.0; N];
        for i in 0..N {
            diff[i] = f1[i] - self.k1[i];
        }
        let d2 = self.norm(&diff, &self.y) / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1) * self.dir
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    /// Start and end time of the last accepted step.
    pub fn last_step(&self) -> (f64, f64) {
        (self.t_old, self.t_old + self.h_old)
    }

    /// Dense output inside the last accepted step.
    pub fn dense(&self, t: f64) -> [f64; N] {
        let theta = if self.h_old == 0.0 { 0.0 } else { (t - self.t_old) / self.h_old };
        let th1 = 1.0 - theta;
        let r = &self.rcont;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = r[0][i] + theta * (r[1][i] + th1 * (r[2][i] + theta * (r[3][i] + th1 * r[4][i])));
        }
        out
    }

    /// One accepted step, not passing `t_limit` (in the integration direction).
    pub fn step(&mut self, t_limit: Option<f64>) -> Result<()> {
        let mut reject = false;
        loop {
            let mut h = self.h;
            let mut clipped = false;
            if let Some(tl) = t_limit {
                if (self.t + h - tl) * self.dir > 0.0 {
                    h = tl - self.t;
                    clipped = true;
                }
            }
            if h.abs() < 1e-14 * self.t.abs().max(1.0) && !clipped {
                let state = planar(&self.y);
                // collapse with radius-doubling time far below 1e-6 is a finite-time escape
                let speed = planar(&self.k1);
                if state[0].hypot(state[1]) < 1e-6 * speed[0].hypot(speed[1]) && state[0].hypot(state[1]) > 1.0 {
                    return Err(Error::BlowUp { t: self.t, state });
                }
                return Err(Error::StepUnderflow { t: self.t, state });
            }
            let f = &self.f;
            let y = &self.y;
            let k1 = self.k1;
            let k2 = f(&axpy(y, h, &[(A21, &k1)]));
            let k3 = f(&axpy(y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(&axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(&axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(&axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
            let y1 = axpy(y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = f(&y1);
            self.stats.evaluations += 6;
            let mut err = 0.0;
            for i in 0..N {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y1[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() || y1.iter().any(|v| !v.is_finite()) {
                if h.abs() < 1e-14 * self.t.abs().max(1.0) {
                    return Err(Error::BlowUp { t: self.t, state: planar(&self.y) });
                }
                self.h = h * 0.1;
                reject = true;
                self.stats.rejected += 1;
                continue;
            }
            // PI step-size control (Hairer's dopri5 defaults)
            let fac11 = err.powf(0.2 - 0.04 * 0.75);
            let fac = (fac11 / self.facold.powf(0.04)) / 0.9;
            let fac = fac.clamp(1.0 / 10.0, 1.0 / 0.2);
            let hnew = h / fac;
            if err <= 1.0 {
                self.facold = err.max(1e-4);
                self.stats.accepted += 1;
                let mut rc = [[0.0; N]; 5];
                for i in 0..N {
                    let ydiff = y1[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    rc[0][i] = y[i];
                    rc[1][i] = ydiff;
                    rc[2][i] = bspl;
                    rc[3][i] = ydiff - h * k7[i] - bspl;
                    rc[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                }
                self.rcont = rc;
                self.t_old = self.t;
                self.h_old = h;
                self.t = if clipped { t_limit.unwrap() } else { self.t + h };
                self.y = y1;
                self.k1 = k7;
                let hnew = if reject { hnew.abs().min(h.abs()) * self.dir } else { hnew };
                // keep the controller's proposal when the step was clipped
                self.h = if clipped { self.h.abs().max(hnew.abs()) * self.dir } else { hnew };
                if planar(&self.y).iter().any(|v| v.abs() > ESCAPE_RADIUS) {
                    return Err(Error::BlowUp { t: self.t, state: planar(&self.y) });
                }
                return Ok(());
            }
            self.h = h / (1.0 / 0.2f64).min(fac11 / 0.9);
            reject = true;
            self.stats.rejected += 1;
        }
    }
}

fn planar<const N: usize>(y: &[f64; N]) -> [f64; 2] {
    [y[0], if N > 1 { y[1] } else { 0.0 }]
}

pub fn check_tolerances(rtol: f64, atol: f64) -> Result<()> {
    if !(RTOL_RANGE.0..=RTOL_RANGE.1).contains(&rtol) {
        return Err(Error::InvalidParams(format!("rtol must lie in [1e-13, 1e-3], got {rtol}")));
    }
    if !(atol > 0.0 && atol.is_finite()) {
        return Err(Error::InvalidParams(format!("atol must be positive, got {atol}")));
    }
    Ok(())
}

/// `(x', y', div)` scaled by the time direction.
pub fn augmented(sys: &PlanarPolySystem, dir: f64) -> impl Fn(&[f64; 3]) -> [f64; 3] + '_ {
    move |s: &[f64; 3]| {
        let p = [s[0], s[1]];
        let f = sys.evaluate(p);
        [dir * f[0], dir * f[1], dir * sys.divergence(p)]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryMeta {
    pub degree: u32,
    pub rtol: f64,
    pub atol: f64,
    pub direction: f64,
    pub stats: Stats,
}

/// Sampled orbit, stored with `t` strictly increasing.
#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub states: Vec<Point>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,y\n");
        for (t, p) in self.t.iter().zip(&self.states) {
            s.push_str(&format!("{t:.17e},{:.17e},{:.17e}\n", p[0], p[1]));
        }
        s
    }

    pub fn last(&self) -> Point {
        *self.states.last().expect("trajectory has at least the initial point")
    }
}

/// Integrates from `x0` at `t = 0` to `t_end` (negative for backward time),
/// recording every accepted step.
pub fn integrate(sys: &PlanarPolySystem, x0: Point, t_end: f64, rtol: f64, atol: f64) -> Result<Trajectory> {
    if !t_end.is_finite() || x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParams("non-finite input".into()));
    }
    let dir = if t_end < 0.0 { -1.0 } else { 1.0 };
    let f = move |s: &[f64; 2]| sys.evaluate(*s);
    let mut ts = vec![0.0];
    let mut xs = vec![x0];
    let mut solver = Dopri5::new(f, x0, 0.0, dir, rtol, atol)?;
    while (t_end - solver.t()) * dir > 0.0 {
        solver.step(Some(t_end))?;
        ts.push(solver.t());
        xs.push(*solver.y());
    }
    if dir < 0.0 {
        ts.reverse();
        xs.reverse();
    }
    Ok(Trajectory {
        t: ts,
        states: xs,
        meta: TrajectoryMeta { degree: sys.degree(), rtol, atol, direction: dir, stats: solver.stats() },
    })
}

/// A ray `{ρ (cos θ, sin θ) : ρ > 0}` used as a transversal section.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ray {
    pub angle: f64,
}

impl Ray {
    pub const POSITIVE_X: Ray = Ray { angle: 0.0 };

    pub fn normal(&self) -> Point {
        [-self.angle.sin(), self.angle.cos()]
    }

    pub fn along(&self) -> Point {
        [self.angle.cos(), self.angle.sin()]
    }

    pub fn signed_distance(&self, p: Point) -> f64 {
        let n = self.normal();
        n[0] * p[0] + n[1] * p[1]
    }

    pub fn point(&self, rho: f64) -> Point {
        let a = self.along();
        [rho * a[0], rho * a[1]]
    }

    pub fn radius(&self, p: Point) -> f64 {
        let a = self.along();
        a[0] * p[0] + a[1] * p[1]
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SectionEvent {
    /// Elapsed time, always positive.
    pub t: f64,
    pub state: Point,
    pub section: Ray,
    /// `+1` if the crossing goes towards the ray normal in forward time.
    pub crossing_direction: i8,
}

#[derive(Clone, Copy, Debug)]
pub struct CrossingConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Time direction, `±1`.
    pub dir: f64,
    pub t_max: f64,
    pub record: bool,
}

impl CrossingConfig {
    pub fn new(rtol: f64, dir: f64) -> Self {
        CrossingConfig { rtol, atol: 1e-12, dir, t_max: 50.0 * std::f64::consts::TAU, record: false }
    }
}

#[derive(Clone, Debug)]
pub struct CrossingResult {
    pub event: SectionEvent,
    /// `∫ div F dt` over the physical time traversed, signed with `dir`.
    pub div_integral: f64,
    /// Orbit samples in integration order (only when recording).
    pub samples: Vec<Point>,
    pub stats: Stats,
}

/// Integrates from `start` until the orbit crosses `ray` with
/// `sign(d/dτ signed_distance) = side` (τ the integration time), excluding
/// the start instant. Crossings are located to `|distance| <= 1e-12`.
pub fn cross_ray(sys: &PlanarPolySystem, start: Point, ray: Ray, side: f64, cfg: &CrossingConfig) -> Result<CrossingResult> {
    let dir = if cfg.dir < 0.0 { -1.0 } else { 1.0 };
    // τ runs forward; the direction lives in the augmented field
    let mut solver = Dopri5::new(augmented(sys, dir), [start[0], start[1], 0.0], 0.0, 1.0, cfg.rtol, cfg.atol)?;
    let mut samples = if cfg.record { vec![start] } else { Vec::new() };
    let t_end = cfg.t_max;
    let phi = |s: &[f64; 3]| ray.signed_distance([s[0], s[1]]);
    loop {
        let before = *solver.y();
        if solver.t() >= t_end {
            return Err(Error::NonReturning { t_max: cfg.t_max });
        }
        solver.step(Some(t_end))?;
        let after = *solver.y();
        let (t0, t1) = solver.last_step();
        if cfg.record {
            for k in 1..=4 {
                let s = solver.dense(t0 + (t1 - t0) * k as f64 / 4.0);
                samples.push([s[0], s[1]]);
            }
        }
        let speed = sys.evaluate([after[0], after[1]]);
        if speed[0].hypot(speed[1]) <= 1e-10 {
            return Err(Error::Captured { t: solver.t(), state: [after[0], after[1]] });
        }
        let (p0, p1) = (phi(&before), phi(&after));
        let crosses = p0 * side < 0.0 && p1 * side >= 0.0;
        if !crosses {
            continue;
        }
        let (tc, sc) = locate(&solver, &phi, t0, t1, p0);
        if ray.radius([sc[0], sc[1]]) <= 0.0 {
            continue;
        }
        if cfg.record {
            // replace the samples of the final step by the part before the crossing
            samples.truncate(samples.len() - 4);
            for k in 1..4 {
                let s = solver.dense(t0 + (tc - t0) * k as f64 / 4.0);
                samples.push([s[0], s[1]]);
            }
            samples.push([sc[0], sc[1]]);
        }
        let f = sys.evaluate([sc[0], sc[1]]);
        let n = ray.normal();
        let vn = n[0] * f[0] + n[1] * f[1];
        return Ok(CrossingResult {
            event: SectionEvent {
                t: tc,
                state: [sc[0], sc[1]],
                section: ray,
                crossing_direction: if vn > 0.0 { 1 } else { -1 },
            },
            div_integral: sc[2],
            samples,
            stats: solver.stats(),
        });
    }
}

fn locate<const N: usize, F: Fn(&[f64; N]) -> [f64; N]>(
    solver: &Dopri5<N, F>,
    phi: &impl Fn(&[f64; N]) -> f64,
    t0: f64,
    t1: f64,
    p0: f64,
) -> (f64, [f64; N]) {
    let (mut lo, mut hi) = (t0, t1);
    let (mut flo, mut fhi) = (p0, phi(&solver.dense(t1)));
    let mut best = (t1, solver.dense(t1));
    if fhi.abs() <= 1e-12 {
        return best;
    }
    // Illinois-modified regula falsi, falling back to bisection
    let mut side = 0;
    for it in 0..200 {
        let mut t = (lo * fhi - hi * flo) / (fhi - flo);
        if !(t > lo.min(hi) && t < lo.max(hi)) || it % 8 == 7 {
            t = 0.5 * (lo + hi);
        }
        let s = solver.dense(t);
        let v = phi(&s);
        best = (t, s);
        if v.abs() <= 1e-12 || (hi - lo).abs() <= 1e-15 * t.abs().max(1.0) {
            break;
        }
        if (v > 0.0) == (flo > 0.0) {
            lo = t;
            flo = v;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = t;
            fhi = v;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    best
}

/// First return of the orbit through `(r, 0)`, `r > 0`, to the positive
/// `x`-axis in the same crossing direction.
pub fn first_return(sys: &PlanarPolySystem, r: f64, rtol: f64) -> Result<SectionEvent> {
    Ok(return_to_axis(sys, r, &CrossingConfig::new(rtol, 1.0))?.event)
}

/// [`first_return`] with full configuration (time direction, recording).
pub fn return_to_axis(sys: &PlanarPolySystem, r: f64, cfg: &CrossingConfig) -> Result<CrossingResult> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParams(format!("section radius must be positive, got {r}")));
    }
    let f = sys.evaluate([r, 0.0]);
    let vy = f[1] * cfg.dir.signum();
    if vy.abs() <= 1e-14 * (1.0 + f[0].abs()) {
        return Err(Error::NotTransversal);
    }
    cross_ray(sys, [r, 0.0], Ray::POSITIVE_X, vy.signum(), cfg)
}
