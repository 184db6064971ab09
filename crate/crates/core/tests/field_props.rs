use std::cmp::Ordering;

use num_traits::Signed;
use proptest::prelude::*;
use tsp_core::epsfield::EpsPolynomial;
use tsp_core::{EpsRational, Rational, Sign};

fn poly(max_len: usize) -> impl Strategy<Value = EpsPolynomial> {
    prop::collection::vec(-6i64..=6, 0..=max_len).prop_map(|c| EpsPolynomial::from_ints(&c))
}

fn element() -> impl Strategy<Value = EpsRational> {
    (poly(4), poly(3))
        .prop_filter("nonzero denominator", |(_, d)| !d.is_zero())
        .prop_map(|(n, d)| EpsRational::new(n, d).unwrap())
}

/// Past `n0` the rational function has no zeros or poles at `e = 1/n`, from
/// the Cauchy lower bound on the absolute value of nonzero roots.
fn past_roots(p: &EpsPolynomial) -> Rational {
    let Some(v) = p.valuation() else { return Rational::from_integer(1.into()) };
    let low = p.coeff(v).abs();
    let big = p.coeffs().iter().map(|c| c.abs()).max().unwrap();
    (&low + &big) / &low + Rational::from_integer(1.into())
}

proptest! {
    #[test]
    fn field_axioms(a in element(), b in element(), c in element()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a - &a, EpsRational::zero());
        if !a.is_zero() {
            prop_assert_eq!(&a * &a.recip().unwrap(), EpsRational::one());
        }
    }

    #[test]
    fn canonical_form(a in element()) {
        let den = a.den();
        prop_assert!(den.lowest().unwrap().is_positive());
        prop_assert!(a.num().coeffs().iter().all(|c| c.is_integer()));
        prop_assert!(den.coeffs().iter().all(|c| c.is_integer()));
        prop_assert!(EpsPolynomial::gcd(a.num(), den).is_constant() || a.is_zero());
    }

    #[test]
    fn text_and_json_round_trip(a in element()) {
        let back: EpsRational = a.to_string().parse().unwrap();
        prop_assert_eq!(&back, &a);
        let js = serde_json::to_string(&a).unwrap();
        let back: EpsRational = serde_json::from_str(&js).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn order_is_compatible(a in element(), b in element(), c in element()) {
        if a < b {
            prop_assert!(&a + &c < &b + &c);
        }
        if a.is_positive() && b.is_positive() {
            prop_assert!((&a * &b).is_positive());
        }
        prop_assert_eq!(a.compare(&b), a.cmp(&b));
        prop_assert_eq!((&a - &b).sign() == Sign::Zero, a.compare(&b) == Ordering::Equal);
    }

    #[test]
    fn sign_matches_small_evaluation(a in element()) {
        let n0 = past_roots(a.num()).max(past_roots(a.den())).ceil();
        let t = Rational::from_integer(1.into()) / n0;
        let v = a.eval_at(&t).unwrap();
        prop_assert_eq!(Sign::of_rational(&v), a.sign());
    }

    #[test]
    fn shadow_is_a_homomorphism(a in element(), b in element()) {
        if let (Ok(sa), Ok(sb)) = (a.shadow(), b.shadow()) {
            prop_assert_eq!((&a + &b).shadow().unwrap(), &sa + &sb);
            prop_assert_eq!((&a * &b).shadow().unwrap(), &sa * &sb);
        }
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in element(), b in element(), k in 2i64..50) {
        let t = Rational::new(1.into(), k.into());
        if let (Ok(va), Ok(vb)) = (a.eval_at(&t), b.eval_at(&t)) {
            if let Ok(s) = (&a + &b).eval_at(&t) {
                prop_assert_eq!(s, &va + &vb);
            }
            if let Ok(p) = (&a * &b).eval_at(&t) {
                prop_assert_eq!(p, &va * &vb);
            }
        }
    }

    #[test]
    fn eps_is_infinitesimal(p in 1i64..1_000_000, q in 1i64..1_000_000) {
        let r = EpsRational::from_frac(p, q);
        prop_assert!(EpsRational::eps() < r);
        prop_assert!(EpsRational::eps().recip().unwrap() > r);
        prop_assert!(EpsRational::eps().is_infinitesimal());
    }
}

#[test]
fn alpha_hand_expanded() {
    let a = EpsRational::parse("(1/8)*(1 + e/(6*(1-e)))").unwrap();
    assert_eq!(a.to_string(), "(6-5e)/(48-48e)");
    // independent evaluation at e = 1/10: (1/8)(1 + (1/10)/(54/10)) = 55/432
    assert_eq!(
        a.eval_at(&Rational::new(1.into(), 10.into())).unwrap(),
        Rational::new(55.into(), 432.into())
    );
}

#[test]
fn parse_errors_carry_columns() {
    match EpsRational::parse("1 + * e") {
        Err(tsp_core::Error::Parse { column, .. }) => assert!(column >= 3),
        other => panic!("expected a parse error, got {other:?}"),
    }
    assert!(EpsRational::parse("1/(e-e)").is_err());
}
