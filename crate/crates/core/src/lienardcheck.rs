//! Hypotheses of the Liénard uniqueness theorem for
//! `x' = -φ(y) - F(x)`, `y' = g(x)`.
//!
//! Reversing time in the second form gives `x' = -y + a(1 - x^{2n}) x`,
//! `y' = x`, so `F(x) = -a x + a x^{2n+1}`, `f = F' = -a + a(2n+1) x^{2n}`,
//! `g(x) = x`, `φ(y) = y`. Condition (2) concerns the monotonicity of `f/g`;
//! here `d/dx (f/g) = a (1/x² + (4n²-1) x^{2n-2})`, whose sign is that of `a`.
//! The statement asks for a non-increasing quotient while the way the theorem
//! is applied needs a non-decreasing one, so both readings are evaluated.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::poly::{rat_to_f64, Coeff, Poly, Rational};
use crate::roots::real_roots;
use crate::vectorfield::RayleighParams;

#[derive(Clone, Debug, PartialEq)]
pub struct LienardData {
    pub params: RayleighParams,
    /// Coefficient actually used in `f` (`-a` after the equivalence map).
    pub a_used: Rational,
    pub reflected: bool,
    pub f: Poly<Rational>,
    pub big_f: Poly<Rational>,
    pub g: Poly<Rational>,
    pub big_g: Poly<Rational>,
    pub phi: &'static str,
    pub flags: Vec<String>,
}

fn antiderivative(p: &Poly<Rational>) -> Poly<Rational> {
    Poly::from_terms(p.terms().map(|(&(i, j), c)| ((i + 1, j), c / Rational::from_i64(i as i64 + 1))))
}

fn coeffs(p: &Poly<Rational>) -> Vec<Rational> {
    p.restrict_y0()
}

fn eval(p: &Poly<Rational>, x: f64) -> f64 {
    p.eval_f64(x, 0.0)
}

fn data_for(params: RayleighParams, a: Rational, reflected: bool) -> LienardData {
    let n = params.n;
    let f = Poly::from_terms([
        ((0, 0), -a.clone()),
        ((2 * n, 0), &a * &Rational::from_i64(2 * n as i64 + 1)),
    ]);
    let g = Poly::x();
    let mut flags = Vec::new();
    if a == Rational::from_i64(0) {
        flags.push("f ≡ 0".to_string());
    }
    LienardData {
        params,
        big_f: antiderivative(&f),
        big_g: antiderivative(&g),
        a_used: a,
        reflected,
        f,
        g,
        phi: "identity",
        flags,
    }
}

/// Liénard data of the time-reversed second form with the given `a`.
/// For `a < 0` the theorem is applied to [`LienardData::reflected`].
pub fn build_lienard_data(params: RayleighParams) -> LienardData {
    let mut d = data_for(params, params.a_exact(), false);
    if params.a < 0.0 {
        d.flags.push("a < 0: hypotheses are checked on the image under (x,y,t) -> (-x,y,-t)".into());
    }
    d
}

impl LienardData {
    /// Data of the image under `(x, y, t) -> (-x, y, -t)`, which maps the
    /// family with parameter `a` to the one with `-a`.
    pub fn reflected(&self) -> LienardData {
        let mut d = data_for(self.params, -self.a_used.clone(), !self.reflected);
        d.flags.retain(|f| f == "f ≡ 0");
        d
    }

    /// `F' = f`, `G' = g`, `F(0) = G(0) = 0`.
    pub fn identities_hold(&self) -> bool {
        let zero = Rational::from_i64(0);
        self.big_f.deriv_x() == self.f
            && self.big_g.deriv_x() == self.g
            && self.big_f.coeff(0, 0) == zero
            && self.big_g.coeff(0, 0) == zero
    }

    pub fn to_json(&self) -> Value {
        json!({
            "params": self.params,
            "a_used": self.a_used.to_string(),
            "reflected": self.reflected,
            "f": self.f.to_string(),
            "F": self.big_f.to_string(),
            "g": self.g.to_string(),
            "G": self.big_g.to_string(),
            "phi": self.phi,
            "flags": self.flags,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionStatus {
    Holds,
    Fails,
    HoldsAfterTimeReversal,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionRecord {
    pub id: u8,
    pub status: ConditionStatus,
    pub witness: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReadingVerdict {
    pub requires: &'static str,
    pub condition_2_holds: bool,
    pub verdict: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub params: RayleighParams,
    pub conditions: Vec<ConditionRecord>,
    /// Measured direction of `f/g` on both half-lines.
    pub monotonicity: String,
    pub reading_as_stated: ReadingVerdict,
    pub reading_as_applied: ReadingVerdict,
    /// Reading under which the headline verdict is given.
    pub proof_reading: &'static str,
    pub verdict: String,
    pub system_checked: String,
}

pub const VERDICT_UNIQUE: &str = "at most one limit cycle, stable";
pub const VERDICT_AFTER_EQUIVALENCE: &str =
    "holds after the equivalence (x,y,t)→(−x,y,−t): at most one limit cycle, stable";
pub const VERDICT_NOT_APPLICABLE: &str = "theorem not applicable";

/// Sign of `p` on `(0, ∞)` (`side = 1`) or `(-∞, 0)` (`side = -1`);
/// `None` if it changes sign there.
fn half_line_sign(p: &Poly<Rational>, side: f64) -> Option<i8> {
    let c = coeffs(p);
    let roots = real_roots(&c)?;
    if roots.iter().any(|r| r.value() * side > 0.0) {
        return None;
    }
    let v = eval(p, side);
    Some(if v > 0.0 { 1 } else if v < 0.0 { -1 } else { 0 })
}

fn condition_1(d: &LienardData) -> (bool, Value) {
    let xg = &Poly::x() * &d.g;
    let only_zero_root = real_roots(&coeffs(&xg))
        .map(|r| r.iter().all(|x| x.value() == 0.0))
        .unwrap_or(false);
    let positive = eval(&xg, 1.0) > 0.0 && eval(&xg, -1.0) > 0.0;
    let deg = d.big_g.degree().unwrap_or(0);
    let lead = d.big_g.coeff(deg, 0);
    let diverges = deg.is_multiple_of(2) && deg > 0 && lead > Rational::from_i64(0);
    let ok = only_zero_root && positive && diverges;
    (
        ok,
        json!({
            "x_g": xg.to_string(),
            "x_g_positive_off_zero": only_zero_root && positive,
            "G": d.big_g.to_string(),
            "G_minus_inf": if diverges { "+inf" } else { "finite or -inf" },
            "G_plus_inf": if diverges { "+inf" } else { "finite or -inf" },
            "lipschitz": "g polynomial: Lipschitz on every compact interval",
        }),
    )
}

/// Numerator of `d/dx (f/g)`: `f' g - f g'`.
fn quotient_derivative_numerator(d: &LienardData) -> Poly<Rational> {
    &(&d.f.deriv_x() * &d.g) - &(&d.f * &d.g.deriv_x())
}

fn condition_2(d: &LienardData) -> (String, bool, Value) {
    let num = quotient_derivative_numerator(d);
    let nonconstant = !num.is_empty();
    let pos = half_line_sign(&num, 1.0);
    let neg = half_line_sign(&num, -1.0);
    let direction = match (pos, neg) {
        _ if !nonconstant => "constant",
        (Some(1), Some(1)) => "non-decreasing",
        (Some(-1), Some(-1)) => "non-increasing",
        _ => "mixed",
    };
    let f_continuous = true;
    let f0 = d.big_f.coeff(0, 0) == Rational::from_i64(0);
    (
        direction.to_string(),
        nonconstant && f_continuous && f0,
        json!({
            "derivative_numerator": num.to_string(),
            "derivative": "(f' g - f g') / g^2",
            "sign_on_positive_half_line": pos,
            "sign_on_negative_half_line": neg,
            "nonconstant_near_zero": nonconstant,
            "F(0)": d.big_f.coeff(0, 0).to_string(),
            "lipschitz": "f polynomial: Lipschitz on every compact interval",
        }),
    )
}

fn condition_3(d: &LienardData) -> (bool, Value) {
    (
        true,
        json!({
            "phi": d.phi,
            "y_phi_positive_off_zero": true,
            "non_decreasing": true,
            "phi_prime_plus_0": 1,
            "phi_prime_minus_0": 1,
            "f(0)": rat_to_f64(&d.f.coeff(0, 0)),
            "lipschitz": "identity: Lipschitz constant 1",
        }),
    )
}

pub fn check_hypotheses(data: &LienardData, params: RayleighParams) -> HypothesisReport {
    let reflect = params.a < 0.0 && !data.reflected;
    let work = if reflect { data.reflected() } else { data.clone() };
    let (c1, w1) = condition_1(&work);
    let (direction, c2_base, w2) = condition_2(&work);
    let (c3, w3) = condition_3(&work);
    let stated = c2_base && direction == "non-increasing";
    let applied = c2_base && direction == "non-decreasing";
    let ok_status = if reflect { ConditionStatus::HoldsAfterTimeReversal } else { ConditionStatus::Holds };
    let status = |ok: bool| if ok { ok_status } else { ConditionStatus::Fails };
    let verdict_for = |c2: bool| {
        if c1 && c2 && c3 {
            if reflect { VERDICT_AFTER_EQUIVALENCE } else { VERDICT_UNIQUE }
        } else {
            VERDICT_NOT_APPLICABLE
        }
        .to_string()
    };
    let mut w2 = w2;
    w2["monotonicity"] = json!(direction);
    w2["holds_as_stated"] = json!(stated);
    w2["holds_as_applied"] = json!(applied);
    HypothesisReport {
        params,
        conditions: vec![
            ConditionRecord { id: 1, status: status(c1), witness: w1 },
            ConditionRecord { id: 2, status: status(applied), witness: w2 },
            ConditionRecord { id: 3, status: status(c3), witness: w3 },
        ],
        monotonicity: direction,
        reading_as_stated: ReadingVerdict { requires: "f/g non-increasing", condition_2_holds: stated, verdict: verdict_for(stated) },
        reading_as_applied: ReadingVerdict { requires: "f/g non-decreasing", condition_2_holds: applied, verdict: verdict_for(applied) },
        proof_reading: "f/g non-decreasing",
        verdict: verdict_for(applied),
        system_checked: format!(
            "x' = -y - ({}), y' = x",
            work.big_f
        ),
    }
}

impl HypothesisReport {
    /// Condition-by-condition table for terminal output.
    pub fn to_table(&self) -> String {
        let mut s = format!("Liénard hypotheses for a = {}, n = {}\n", self.params.a, self.params.n);
        s.push_str(&format!("  system: {}\n", self.system_checked));
        for c in &self.conditions {
            let st = match c.status {
                ConditionStatus::Holds => "holds",
                ConditionStatus::Fails => "fails",
                ConditionStatus::HoldsAfterTimeReversal => "holds-after-time-reversal",
            };
            s.push_str(&format!("  ({}) {st}\n", c.id));
        }
        s.push_str(&format!("  f/g is {}\n", self.monotonicity));
        s.push_str(&format!("  reading '{}': {}\n", self.reading_as_stated.requires, self.reading_as_stated.verdict));
        s.push_str(&format!("  reading '{}': {}\n", self.reading_as_applied.requires, self.reading_as_applied.verdict));
        s.push_str(&format!("  verdict: {}\n", self.verdict));
        s
    }
}

/// Samples of `f(x)/g(x)`; the grid must avoid `x = 0`.
pub fn monotonicity_probe(data: &LienardData, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if grid.iter().any(|&x| x == 0.0 || !x.is_finite()) {
        return Err(Error::InvalidParams("probe grid must exclude 0".into()));
    }
    Ok(grid.iter().map(|&x| (x, eval(&data.f, x) / eval(&data.g, x))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn params(a: f64, n: u32) -> RayleighParams {
        RayleighParams::new(a, n).unwrap()
    }

    #[test]
    fn data_instances() {
        let d = build_lienard_data(params(1.0, 1));
        assert_eq!(d.f, Poly::from_terms([((0, 0), rat(-1, 1)), ((2, 0), rat(3, 1))]));
        assert_eq!(d.big_f, Poly::from_terms([((1, 0), rat(-1, 1)), ((3, 0), rat(1, 1))]));
        assert_eq!(d.g, Poly::x());
        assert_eq!(d.big_g, Poly::monomial(2, 0, rat(1, 2)));
        let d = build_lienard_data(params(2.0, 2));
        assert_eq!(d.f, Poly::from_terms([((0, 0), rat(-2, 1)), ((4, 0), rat(10, 1))]));
        assert!(d.identities_hold());
    }

    #[test]
    fn verdicts() {
        let r = check_hypotheses(&build_lienard_data(params(1.0, 1)), params(1.0, 1));
        assert_eq!(r.verdict, VERDICT_UNIQUE);
        assert!(r.conditions.iter().all(|c| c.status == ConditionStatus::Holds));
        assert_eq!(r.monotonicity, "non-decreasing");
        assert_eq!(r.reading_as_stated.verdict, VERDICT_NOT_APPLICABLE);

        let r = check_hypotheses(&build_lienard_data(params(0.0, 1)), params(0.0, 1));
        assert_eq!(r.verdict, VERDICT_NOT_APPLICABLE);
        assert_eq!(r.monotonicity, "constant");

        let r = check_hypotheses(&build_lienard_data(params(-1.0, 2)), params(-1.0, 2));
        assert_eq!(r.verdict, VERDICT_AFTER_EQUIVALENCE);
        assert!(r.conditions.iter().all(|c| c.status == ConditionStatus::HoldsAfterTimeReversal));
    }

    #[test]
    fn probe() {
        let grid: Vec<f64> = (1..=20).map(|k| k as f64 * 0.1).collect();
        let up = monotonicity_probe(&build_lienard_data(params(1.0, 1)), &grid).unwrap();
        assert!(up.windows(2).all(|w| w[1].1 > w[0].1));
        let down = monotonicity_probe(&build_lienard_data(params(-1.0, 1)), &grid).unwrap();
        assert!(down.windows(2).all(|w| w[1].1 < w[0].1));
        assert!(monotonicity_probe(&build_lienard_data(params(1.0, 1)), &[0.0]).is_err());
    }

    #[test]
    fn reflection_flips_a() {
        let d = build_lienard_data(params(-0.5, 3));
        let r = d.reflected();
        assert_eq!(r.a_used, rat(1, 2));
        assert!(r.reflected);
        assert_eq!(r.reflected().f, d.f);
    }
}
