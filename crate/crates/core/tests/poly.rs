use proptest::prelude::*;
use rayleigh_core::poly::*;

fn poly() -> impl Strategy<Value = Poly<Rational>> {
    prop::collection::vec(((0u32..4, 0u32..4), -6i64..7, 1i64..4), 0..6)
        .prop_map(|ts| Poly::from_terms(ts.into_iter().map(|(e, n, d)| (e, rat(n, d)))))
}

fn point() -> impl Strategy<Value = (Rational, Rational)> {
    ((-5i64..6, 1i64..4), (-5i64..6, 1i64..4)).prop_map(|((a, b), (c, d))| (rat(a, b), rat(c, d)))
}

proptest! {
    #[test]
    fn ring_laws(p in poly(), q in poly(), r in poly()) {
        prop_assert_eq!(&p + &q, &q + &p);
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert!((&p - &p).is_empty());
    }

    #[test]
    fn evaluation_is_a_homomorphism(p in poly(), q in poly(), (x, y) in point()) {
        prop_assert_eq!((&p * &q).eval_exact(&x, &y), p.eval_exact(&x, &y) * q.eval_exact(&x, &y));
        prop_assert_eq!((&p + &q).eval_exact(&x, &y), p.eval_exact(&x, &y) + q.eval_exact(&x, &y));
    }

    #[test]
    fn derivatives_obey_product_rule(p in poly(), q in poly()) {
        prop_assert_eq!((&p * &q).deriv_x(), &(&p.deriv_x() * &q) + &(&p * &q.deriv_x()));
        prop_assert_eq!((&p * &q).deriv_y(), &(&p.deriv_y() * &q) + &(&p * &q.deriv_y()));
    }

    #[test]
    fn composition_matches_evaluation(p in poly(), sx in poly(), sy in poly(), (x, y) in point()) {
        let direct = p.eval_exact(&sx.eval_exact(&x, &y), &sy.eval_exact(&x, &y));
        prop_assert_eq!(p.compose(&sx, &sy).eval_exact(&x, &y), direct);
    }

    #[test]
    fn decimal_parsing_round_trips(n in -100000i64..100000, k in 0u32..5) {
        let r = rat(n, 10i64.pow(k));
        let s = terminating_decimal(&r).unwrap();
        prop_assert_eq!(rational_from_decimal(&s), Some(r));
    }
}

#[test]
fn non_terminating_fraction_has_no_decimal() {
    assert!(terminating_decimal(&rat(1, 3)).is_none());
    assert_eq!(terminating_decimal(&rat(-3, 8)).as_deref(), Some("-0.375"));
}
