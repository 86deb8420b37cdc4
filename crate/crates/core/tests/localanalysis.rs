use proptest::prelude::*;
use rayleigh_core::compactification::{chart_system, ChartId};
use rayleigh_core::localanalysis::blowup::{pullback_defect_vertical, pullback_defect_weighted};
use rayleigh_core::localanalysis::*;
use rayleigh_core::poly::{rat, Poly};
use rayleigh_core::vectorfield::*;

/// Classification of the origin of the second form from the eigenvalues of
/// `[[-a, 1], [-1, 0]]`, computed independently.
fn eigen_oracle(a: f64) -> Kind {
    let disc = a * a - 4.0;
    if a == 0.0 {
        Kind::Center
    } else if disc >= 0.0 {
        if a > 0.0 { Kind::StableNode } else { Kind::UnstableNode }
    } else if a > 0.0 {
        Kind::StableFocus
    } else {
        Kind::UnstableFocus
    }
}

#[test]
fn origin_matches_eigenvalue_oracle() {
    for n in 1..=3 {
        for a in [-3.5, -2.0, -1.999, -0.4, 0.0, 0.01, 1.0, 2.0, 2.001, 5.0] {
            let p = RayleighParams::new(a, n).unwrap();
            let r2 = classify_origin_finite(p, Form::Eq2).unwrap();
            assert_eq!(r2.kind, eigen_oracle(a), "a={a} n={n}");
            let r1 = classify_origin_finite(p, Form::Eq1).unwrap();
            assert_eq!(r1.kind, eigen_oracle(a).time_reversed(), "first form a={a}");
            assert!(r1.notes.iter().any(|s| s.starts_with("agrees")));
        }
    }
}

/// `X' = A(X)`, `Y' = Y` moved by `x = X + Y + x0`, `y = Y + y0`.
fn disguised(a_terms: &[(u32, i64)], x0: i64, y0: i64) -> PlanarPolySystem {
    let big_x = &Poly::x() - &Poly::y();
    let shift_x = &Poly::x() - &Poly::constant(rat(x0, 1));
    let shift_y = &Poly::y() - &Poly::constant(rat(y0, 1));
    let xx = big_x.compose(&shift_x, &shift_y);
    let yy = shift_y.clone();
    let mut a = Poly::zero();
    for &(k, c) in a_terms {
        a = &a + &xx.pow(k).scale(&rat(c, 1));
    }
    // x' = X' + Y', y' = Y'
    PlanarPolySystem::new(&a + &yy, yy)
}

#[test]
fn semi_hyperbolic_points_off_the_origin() {
    let at = (rat(1, 1), rat(2, 1));
    let cases = [
        (vec![(2, 1)], Kind::SaddleNode),
        (vec![(3, -1)], Kind::SemiHyperbolicSaddle),
        (vec![(3, 2), (4, 1)], Kind::SemiHyperbolicNodeUnstable),
    ];
    for (terms, want) in cases {
        let sys = disguised(&terms, 1, 2);
        let rep = classify_point(&sys, [1.0, 2.0], Some(at.clone()), None).unwrap();
        assert_eq!(rep.kind, want, "{terms:?}");
        assert!(rep.semi_hyperbolic.is_some());
    }
    // time-reversed copies swap stability only
    let rev = disguised(&[(3, 2)], 1, 2).time_reversed();
    let rep = classify_point(&rev, [1.0, 2.0], Some(at), None).unwrap();
    assert_eq!(rep.kind, Kind::SemiHyperbolicNodeStable);
}

#[test]
fn nonsingular_points_are_rejected() {
    let sys = family_system(RayleighParams::new(1.0, 1).unwrap(), Form::Eq2);
    assert!(classify_point(&sys, [1.0, 0.0], Some((rat(1, 1), rat(0, 1))), None).is_err());
}

#[test]
fn degenerate_point_at_infinity_resolves() {
    for n in 1..=3 {
        for a in [-1.0, 0.5, 2.5] {
            let sys = family_system(RayleighParams::new(a, n).unwrap(), Form::Eq2);
            let cs = chart_system(sys.exact(), ChartId::U2).unwrap();
            let rep = resolve_degenerate(&cs, n).unwrap();
            assert_eq!(rep.kind, Kind::ResolvedDegenerate);
            assert_eq!(rep.provenance.len(), 2);
            assert_eq!(rep.provenance[0].cancelled_power, 2 * n - 1);
            assert_eq!(rep.provenance[1].cancelled_power, 2 * n);
            let subs = &rep.provenance[1].sub_equilibria;
            let at = |r: f64| subs.iter().find(|s| (s.location[0] - r).abs() < 1e-12).map(|s| s.kind);
            assert_eq!(at(0.0), Some(Kind::Saddle));
            assert_eq!(at(-1.0 / a), Some(Kind::SemiHyperbolicSaddle));
            let sh = subs.iter().find_map(|s| s.semi_hyperbolic.clone()).unwrap();
            assert_eq!(sh.alpha, 4 * n + 1);
        }
    }
}

proptest! {
    #[test]
    fn blowups_pull_back(a in prop::sample::select(vec![-2.0, -0.5, 0.75, 1.5]), n in 1u32..=3,
                         x in 0.05f64..0.9, z in -0.9f64..0.9) {
        prop_assume!(x.abs() > 1e-3 && z.abs() > 1e-3);
        let sys = family_system(RayleighParams::new(a, n).unwrap(), Form::Eq2);
        let cs = chart_system(sys.exact(), ChartId::U2).unwrap();
        let v = blowup_vertical(&cs, n).unwrap();
        let vp = PlanarPolySystem::from_exact(v.system.clone());
        prop_assert!(pullback_defect_vertical(&cs.as_planar(), &vp, v.cancelled_power, x, z) < 1e-10);
        let w = blowup_weighted(&v, n).unwrap();
        let wp = PlanarPolySystem::from_exact(w.system.clone());
        prop_assert!(pullback_defect_weighted(&vp, &wp, 2 * n, w.cancelled_power, x, z) < 1e-10);
    }
}
