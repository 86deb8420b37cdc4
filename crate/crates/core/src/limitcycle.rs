//! Return map on the positive `x`-axis, limit-cycle location and stability,
//! the sign-change uniqueness scan, and the first-order averaging amplitude.
//!
//! The cycle is a fixed point `r*` of the return map `P`. Bisection on
//! `P(r) - r` (forward time; escaping orbits count as `+∞`) brackets it,
//! then a secant polish runs on the map in the attracting time direction.
//!
//! The multiplier `μ = P'(r*)` is a product of many small transition maps:
//! the cycle is cut at `K` rays through points equally spaced in time, and
//! each transition map between consecutive rays is differentiated by a
//! central difference. A single difference of `P` loses all accuracy once
//! `μ` drops below the integration error, which happens for moderate `|a|`
//! and `n ≥ 2`. `exp(∮ div F dt)` is computed alongside as a cross-check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{cross_ray, return_to_axis, CrossingConfig, Dopri5, Ray};
use crate::vectorfield::{family_system, Form, PlanarPolySystem, Point, RayleighParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-10, atol: 1e-12 }
    }
}

impl Tolerances {
    fn refined(&self) -> Tolerances {
        Tolerances { rtol: (self.rtol / 10.0).max(1e-13), atol: self.atol / 10.0 }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ReturnMapSample {
    pub r_in: f64,
    pub r_out: f64,
    pub period: f64,
    pub err_est: f64,
}

pub fn return_map(params: RayleighParams, form: Form, r: f64) -> Result<ReturnMapSample> {
    return_map_with(&family_system(params, form), r, Tolerances::default())
}

/// Forward return map; `err_est` is the change under a 10× tighter `rtol`.
pub fn return_map_with(sys: &PlanarPolySystem, r: f64, tol: Tolerances) -> Result<ReturnMapSample> {
    if !(r > 0.0 && r < 100.0) {
        return Err(Error::InvalidParams(format!("section radius must lie in (0, 100), got {r}")));
    }
    let coarse = single_return(sys, r, tol, 1.0)?;
    let fine = single_return(sys, r, tol.refined(), 1.0)?;
    Ok(ReturnMapSample { r_in: r, r_out: coarse.0, period: coarse.1, err_est: (coarse.0 - fine.0).abs() })
}

fn config(tol: Tolerances, dir: f64) -> CrossingConfig {
    let mut cfg = CrossingConfig::new(tol.rtol, dir);
    cfg.atol = tol.atol;
    cfg
}

/// `(r_out, period)` of the return in time direction `dir`.
fn single_return(sys: &PlanarPolySystem, r: f64, tol: Tolerances, dir: f64) -> Result<(f64, f64)> {
    let res = return_to_axis(sys, r, &config(tol, dir))?;
    Ok((res.event.state[0], res.event.t))
}

/// `P(r) - r` in forward time; `+∞` if the orbit escapes, `-r` if it is
/// captured by the equilibrium inside.
fn displacement(sys: &PlanarPolySystem, r: f64, tol: Tolerances) -> Result<f64> {
    match single_return(sys, r, tol, 1.0) {
        Ok((out, _)) => Ok(out - r),
        Err(Error::BlowUp { .. }) => Ok(f64::INFINITY),
        Err(Error::Captured { .. }) => Ok(-r),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub count: usize,
    pub sign_pattern: Vec<i8>,
    pub values: Vec<f64>,
}

/// Values `|P(r) - r|` at or below this count as zero in the scan.
pub const SCAN_ZERO: f64 = 1e-8;

pub fn uniqueness_scan(params: RayleighParams, form: Form, r_grid: &[f64]) -> Result<ScanResult> {
    uniqueness_scan_with(&family_system(params, form), r_grid, Tolerances::default())
}

pub fn uniqueness_scan_with(sys: &PlanarPolySystem, r_grid: &[f64], tol: Tolerances) -> Result<ScanResult> {
    if r_grid.len() < 50 {
        return Err(Error::InvalidParams("scan grid needs at least 50 points".into()));
    }
    if r_grid[0] <= 0.0 || r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("scan grid must be positive and increasing".into()));
    }
    let values: Vec<f64> = r_grid.par_iter().map(|&r| displacement(sys, r, tol)).collect::<Result<_>>()?;
    let sign_pattern: Vec<i8> = values
        .iter()
        .map(|&v| if v.abs() <= SCAN_ZERO { 0 } else if v > 0.0 { 1 } else { -1 })
        .collect();
    let nonzero: Vec<i8> = sign_pattern.iter().copied().filter(|&s| s != 0).collect();
    let count = nonzero.windows(2).filter(|w| w[0] != w[1]).count();
    Ok(ScanResult { count, sign_pattern, values })
}

/// Log-spaced grid of `n` points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (l, h) = (lo.ln(), hi.ln());
    (0..n).map(|k| (l + (h - l) * k as f64 / (n - 1) as f64).exp()).collect()
}

/// Radius where the mean of `(1 - r^{2n} sin^{2n}θ) r² sin²θ` over a
/// circle vanishes: `(2^{2n+1} / C(2n+2, n+1))^{1/(2n)}`.
pub fn averaging_amplitude(n: u32) -> f64 {
    assert!(n >= 1, "n must be ≥ 1");
    let m = n as f64;
    // C(2n+2, n+1) / 2^{2n+2} as a running product to stay in range
    let mut central = 1.0;
    for k in 1..=(n + 1) {
        central *= (n + 1 + k) as f64 / (4.0 * k as f64);
    }
    (0.5 / central).powf(1.0 / (2.0 * m))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Clone, Debug, Serialize)]
pub struct CycleDiagnostics {
    /// `∮ div F dt` over one period in forward time.
    pub divergence_integral: f64,
    pub multiplier_divergence: f64,
    /// Single central difference of the whole return map (forward time).
    pub multiplier_direct_fd: f64,
    pub multiplier_pieces: usize,
    pub residual: f64,
    /// Time direction of the map whose fixed-point residual is reported.
    pub residual_map: String,
    pub bracket: (f64, f64),
    pub flagged: bool,
    /// Which sign of `a` the measured stability goes with.
    pub sign_convention: String,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitCycleRecord {
    pub params: RayleighParams,
    pub form: Form,
    pub r_star: f64,
    pub period: f64,
    pub multiplier: f64,
    pub stability: Stability,
    pub amp_x: f64,
    pub amp_y: f64,
    pub diagnostics: CycleDiagnostics,
    /// Cycle samples in forward-time order, starting at `(r*, 0)`.
    #[serde(skip)]
    pub polyline: Vec<Point>,
}

#[derive(Clone, Copy, Debug)]
pub struct CycleOptions {
    pub tol: Tolerances,
    pub bracket: Option<(f64, f64)>,
    pub pieces: usize,
}

impl Default for CycleOptions {
    fn default() -> Self {
        CycleOptions { tol: Tolerances::default(), bracket: None, pieces: 48 }
    }
}

pub fn find_cycle(params: RayleighParams, form: Form, bracket: Option<(f64, f64)>) -> Result<LimitCycleRecord> {
    find_cycle_with(params, form, &CycleOptions { bracket, ..CycleOptions::default() })
}

fn fd_step(r: f64) -> f64 {
    (1e-5 * r).max(1e-6)
}

fn auto_bracket(sys: &PlanarPolySystem, params: RayleighParams, tol: Tolerances) -> Result<(f64, f64, f64, f64)> {
    let (mut lo, mut hi) = if params.a.abs() < 0.1 {
        let ra = averaging_amplitude(params.n);
        (0.5 * ra, 1.5 * ra)
    } else {
        (0.1, 10.0)
    };
    for _ in 0..8 {
        let (glo, ghi) = (displacement(sys, lo, tol)?, displacement(sys, hi, tol)?);
        if glo.signum() != ghi.signum() && glo != 0.0 && ghi != 0.0 {
            return Ok((lo, hi, glo, ghi));
        }
        lo = (lo / 2.0).max(1e-3);
        hi = (hi * 2.0).min(99.0);
    }
    Err(Error::NoCycle(format!("no sign change of P(r) - r on [{lo}, {hi}]")))
}

pub fn find_cycle_with(params: RayleighParams, form: Form, opts: &CycleOptions) -> Result<LimitCycleRecord> {
    if params.a == 0.0 {
        return Err(Error::NoCycle("a = 0 is a linear center: every orbit is periodic".into()));
    }
    let sys = family_system(params, form);
    let tol = opts.tol;
    let (mut lo, mut hi, mut glo, ghi) = match opts.bracket {
        Some((lo, hi)) => {
            let (glo, ghi) = (displacement(&sys, lo, tol)?, displacement(&sys, hi, tol)?);
            if glo.signum() == ghi.signum() {
                return Err(Error::NoCycle(format!("P(r) - r has the same sign at {lo} and {hi}")));
            }
            (lo, hi, glo, ghi)
        }
        None => auto_bracket(&sys, params, tol)?,
    };
    let bracket = (lo, hi);
    // outside-in contraction in forward time means the cycle attracts
    let dir = if ghi < 0.0 { 1.0 } else { -1.0 };
    let _ = glo;
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        let g = displacement(&sys, mid, tol)?;
        if g == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if g.signum() == glo.signum() {
            lo = mid;
            glo = g;
        } else {
            hi = mid;
        }
    }
    let g_dir = |r: f64| -> Result<f64> { Ok(single_return(&sys, r, tol, dir)?.0 - r) };
    let (mut r0, mut r1) = (lo, hi.max(lo + 1e-7));
    let (mut g0, mut g1) = (g_dir(r0)?, g_dir(r1)?);
    let mut r_star = if g0.abs() < g1.abs() { r0 } else { r1 };
    let mut residual = g0.abs().min(g1.abs());
    for _ in 0..30 {
        if residual <= 1e-11 || g1 == g0 {
            break;
        }
        let r2 = (r1 - g1 * (r1 - r0) / (g1 - g0)).clamp(lo - 1e-5, hi + 1e-5);
        let g2 = g_dir(r2)?;
        if g2.abs() < residual {
            r_star = r2;
            residual = g2.abs();
        }
        if (r2 - r1).abs() < 1e-14 {
            break;
        }
        (r0, g0, r1, g1) = (r1, g1, r2, g2);
    }

    let cfg = CrossingConfig { record: true, ..config(tol, dir) };
    let cyc = return_to_axis(&sys, r_star, &cfg)?;
    let period = cyc.event.t;
    let div_integral = dir * cyc.div_integral;
    let mu_div = div_integral.exp();
    let mut polyline = cyc.samples;
    if dir < 0.0 {
        polyline.reverse();
    }
    let amp_y = polyline.iter().fold(0.0f64, |m, p| m.max(p[1].abs()));

    let mu_dir = chained_multiplier(&sys, r_star, period, dir, tol, opts.pieces)?;
    let multiplier = if dir > 0.0 { mu_dir } else { 1.0 / mu_dir };
    let h = fd_step(r_star);
    let direct = {
        let up = single_return(&sys, r_star + h, tol, 1.0);
        let dn = single_return(&sys, r_star - h, tol, 1.0);
        match (up, dn) {
            (Ok(u), Ok(d)) => (u.0 - d.0) / (2.0 * h),
            _ => f64::NAN,
        }
    };

    let mut notes = Vec::new();
    let rel = (multiplier - mu_div).abs() / mu_div;
    let flagged = rel.is_nan() || rel > 0.05;
    if flagged {
        notes.push(format!("finite-difference and divergence multipliers differ by {:.2}%", 100.0 * rel));
    }
    let stability = if multiplier < 1.0 { Stability::Stable } else { Stability::Unstable };
    let stable_for_negative = (stability == Stability::Stable) == (params.a < 0.0);
    let sign_convention = if stable_for_negative { "stable-for-negative-a" } else { "stable-for-positive-a" }.to_string();
    Ok(LimitCycleRecord {
        params,
        form,
        r_star,
        period,
        multiplier,
        stability,
        amp_x: r_star,
        amp_y,
        diagnostics: CycleDiagnostics {
            divergence_integral: div_integral,
            multiplier_divergence: mu_div,
            multiplier_direct_fd: direct,
            multiplier_pieces: opts.pieces,
            residual,
            residual_map: if dir > 0.0 { "forward" } else { "backward" }.to_string(),
            bracket,
            flagged,
            sign_convention,
            notes,
        },
        polyline,
    })
}

/// Multiplier of the return map in time direction `dir`, as a product of
/// transition-map derivatives between rays through the cycle.
fn chained_multiplier(sys: &PlanarPolySystem, r_star: f64, period: f64, dir: f64, tol: Tolerances, pieces: usize) -> Result<f64> {
    let pieces = pieces.max(4);
    let field = move |s: &[f64; 2]| {
        let f = sys.evaluate(*s);
        [dir * f[0], dir * f[1]]
    };
    let mut solver = Dopri5::new(field, [r_star, 0.0], 0.0, 1.0, tol.rtol, tol.atol)?;
    let mut rays = vec![(Ray::POSITIVE_X, r_star)];
    for k in 1..pieces {
        let target = period * k as f64 / pieces as f64;
        while solver.t() < target {
            solver.step(Some(target))?;
        }
        let p = *solver.y();
        rays.push((Ray { angle: p[1].atan2(p[0]) }, p[0].hypot(p[1])));
    }
    let f0 = sys.evaluate([r_star, 0.0]);
    let side = (dir * f0[1]).signum();
    let mut cfg = config(tol, dir);
    cfg.t_max = period;
    let factors: Vec<f64> = (0..pieces)
        .into_par_iter()
        .map(|k| {
            let (from, rho) = rays[k];
            let (to, _) = rays[(k + 1) % pieces];
            let h = fd_step(rho);
            let t = |r: f64| -> Result<f64> {
                let res = cross_ray(sys, from.point(r), to, side, &cfg)?;
                Ok(to.radius(res.event.state))
            };
            Ok((t(rho + h)? - t(rho - h)?) / (2.0 * h))
        })
        .collect::<Result<_>>()?;
    Ok(factors.iter().product())
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub a: f64,
    pub n: u32,
    pub status: String,
    pub record: Option<LimitCycleRecord>,
}

/// One row per `(a, n)`; `a = 0` yields the `CENTER` sentinel row.
pub fn sweep(a_values: &[f64], ns: &[u32], form: Form, tol: Tolerances) -> Vec<SweepRow> {
    let jobs: Vec<(f64, u32)> = ns.iter().flat_map(|&n| a_values.iter().map(move |&a| (a, n))).collect();
    jobs.par_iter()
        .map(|&(a, n)| {
            if a == 0.0 {
                return SweepRow { a, n, status: "center".into(), record: None };
            }
            let res = RayleighParams::new(a, n)
                .and_then(|p| find_cycle_with(p, form, &CycleOptions { tol, ..CycleOptions::default() }));
            match res {
                Ok(rec) => {
                    let status = if rec.diagnostics.flagged { "flagged" } else { "ok" };
                    SweepRow { a, n, status: status.into(), record: Some(rec) }
                }
                Err(e) => SweepRow { a, n, status: format!("error: {e}"), record: None },
            }
        })
        .collect()
}

pub const SWEEP_HEADER: &str = "a,n,r_star,period,multiplier,stability,amp_x,amp_y,residual,status";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for row in rows {
        let status = row.status.replace(',', ";");
        match &row.record {
            Some(r) => s.push_str(&format!(
                "{},{},{:.12},{:.12},{:.12e},{},{:.12},{:.12},{:.3e},{}\n",
                row.a,
                row.n,
                r.r_star,
                r.period,
                r.multiplier,
                match r.stability {
                    Stability::Stable => "stable",
                    Stability::Unstable => "unstable",
                },
                r.amp_x,
                r.amp_y,
                r.diagnostics.residual,
                status
            )),
            None if row.status == "center" => s.push_str(&format!("{},{},,,,CENTER,,,,{}\n", row.a, row.n, status)),
            None => s.push_str(&format!("{},{},,,,,,,,{}\n", row.a, row.n, status)),
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, n: u32) -> RayleighParams {
        RayleighParams::new(a, n).unwrap()
    }

    #[test]
    fn averaging_values() {
        assert!((averaging_amplitude(1) - 2.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!((averaging_amplitude(2) - 1.6f64.powf(0.25)).abs() < 1e-14);
        let v: Vec<f64> = (1..=10).map(averaging_amplitude).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]));
        assert!(v.iter().all(|&x| x > 1.0));
    }

    #[test]
    fn identity_at_zero() {
        let s = return_map(params(0.0, 1), Form::Eq2, 1.0).unwrap();
        assert!((s.r_out - 1.0).abs() < 1e-9);
        assert!((s.period - std::f64::consts::TAU).abs() < 1e-9);
        assert!(s.err_est < 1e-9);
    }

    #[test]
    fn focus_and_infinity_directions() {
        assert!(return_map(params(-0.5, 1), Form::Eq2, 0.2).unwrap().r_out > 0.2);
        assert!(return_map(params(-0.5, 1), Form::Eq2, 5.0).unwrap().r_out < 5.0);
    }

    #[test]
    fn rejects_bad_radius() {
        assert!(matches!(return_map(params(1.0, 1), Form::Eq2, 0.0), Err(Error::InvalidParams(_))));
        assert!(matches!(return_map(params(1.0, 1), Form::Eq2, 100.0), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn classical_rayleigh_cycle() {
        let rec = find_cycle(params(-1.0, 1), Form::Eq2, None).unwrap();
        assert!((rec.r_star - 1.1081).abs() < 1e-3, "{}", rec.r_star);
        assert_eq!(rec.stability, Stability::Stable);
        assert!(rec.diagnostics.residual <= 1e-9);
        assert!(!rec.diagnostics.flagged, "{:?}", rec.diagnostics);
        assert!((rec.multiplier / 8.6e-4 - 1.0).abs() < 0.05, "{}", rec.multiplier);
    }

    #[test]
    fn unstable_cycle_for_positive_a() {
        let rec = find_cycle(params(1.0, 1), Form::Eq2, None).unwrap();
        assert_eq!(rec.stability, Stability::Unstable);
        assert_eq!(rec.diagnostics.residual_map, "backward");
        assert!((rec.r_star - 1.1081).abs() < 1e-3);
    }

    #[test]
    fn zero_a_has_no_cycle() {
        assert!(matches!(find_cycle(params(0.0, 1), Form::Eq2, None), Err(Error::NoCycle(_))));
    }

    #[test]
    fn sweep_csv_shape() {
        let rows = sweep(&[-1.0, 0.0], &[1], Form::Eq2, Tolerances::default());
        let csv = sweep_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SWEEP_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(lines[2].contains("CENTER"));
        assert_eq!(lines[1].split(',').count(), 10);
    }
}
