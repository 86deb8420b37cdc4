use rayleigh_core::lienardcheck::*;
use rayleigh_core::vectorfield::RayleighParams;

fn p(a: f64, n: u32) -> RayleighParams {
    RayleighParams::new(a, n).unwrap()
}

fn ev(poly: &rayleigh_core::poly::Poly<rayleigh_core::poly::Rational>, x: f64) -> f64 {
    poly.eval_f64(x, 0.0)
}

#[test]
fn antiderivatives_by_finite_differences() {
    for n in 1..=3 {
        for a in [-1.5, 0.5, 2.0] {
            let d = build_lienard_data(p(a, n));
            assert!(d.identities_hold());
            for k in 1..20 {
                let x = -1.9 + 0.2 * k as f64;
                let h = 1e-5;
                let fd_f = (ev(&d.big_f, x + h) - ev(&d.big_f, x - h)) / (2.0 * h);
                let fd_g = (ev(&d.big_g, x + h) - ev(&d.big_g, x - h)) / (2.0 * h);
                assert!((fd_f - ev(&d.f, x)).abs() < 1e-6 * (1.0 + fd_f.abs()));
                assert!((fd_g - x).abs() < 1e-8);
            }
            // f = -a + a(2n+1) x^{2n}
            let x: f64 = 0.7;
            assert!((ev(&d.f, x) - (-a + a * (2 * n + 1) as f64 * x.powi(2 * n as i32))).abs() < 1e-12);
        }
    }
}

/// The quotient `f/x` is monotone on each half-line with the sign of `a`,
/// sampled at 200 points per half-line.
#[test]
fn monotonicity_follows_sign_of_a() {
    for n in 1..=3 {
        for a in [-2.0, -0.5, 0.5, 2.0] {
            let d = build_lienard_data(p(a, n));
            let right: Vec<f64> = (1..=200).map(|k| 0.01 * k as f64).collect();
            let left: Vec<f64> = right.iter().rev().map(|x| -x).collect();
            for grid in [left, right] {
                let s = monotonicity_probe(&d, &grid).unwrap();
                for w in s.windows(2) {
                    let slope = w[1].1 - w[0].1;
                    assert!(slope * a > 0.0, "a={a} n={n} at x={}", w[0].0);
                }
            }
            let report = check_hypotheses(&d, p(a, n));
            // the report is on the reflected system for a < 0
            assert_eq!(report.monotonicity, "non-decreasing");
        }
    }
}

#[test]
fn verdicts_per_parameter() {
    for n in 1..=3 {
        for a in [0.5, 1.0, 2.0] {
            let r = check_hypotheses(&build_lienard_data(p(a, n)), p(a, n));
            assert!(r.verdict.contains("at most one limit cycle"));
            assert!(r.conditions.iter().all(|c| c.status == ConditionStatus::Holds));
            assert!(r.reading_as_applied.condition_2_holds);
            assert!(!r.reading_as_stated.condition_2_holds);
            let r = check_hypotheses(&build_lienard_data(p(-a, n)), p(-a, n));
            assert_eq!(r.verdict, VERDICT_AFTER_EQUIVALENCE);
        }
        let r = check_hypotheses(&build_lienard_data(p(0.0, n)), p(0.0, n));
        assert!(r.verdict.contains("not applicable"));
        assert_eq!(r.conditions[1].status, ConditionStatus::Fails);
    }
}

#[test]
fn flags_and_serialization() {
    let d = build_lienard_data(p(0.0, 1));
    assert!(d.flags.iter().any(|f| f == "f ≡ 0"));
    let r = check_hypotheses(&d, p(0.0, 1));
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["conditions"][1]["status"], "fails");
    assert_eq!(d.to_json()["phi"], "identity");
    assert!(r.to_table().contains("verdict: theorem not applicable"));
    let neg = check_hypotheses(&build_lienard_data(p(-1.0, 2)), p(-1.0, 2));
    let v = serde_json::to_value(&neg).unwrap();
    assert_eq!(v["conditions"][0]["status"], "holds-after-time-reversal");
}

#[test]
fn probe_rejects_zero() {
    let d = build_lienard_data(p(1.0, 1));
    assert!(monotonicity_probe(&d, &[-1.0, 0.0, 1.0]).is_err());
    assert!(monotonicity_probe(&d, &[f64::NAN]).is_err());
}
