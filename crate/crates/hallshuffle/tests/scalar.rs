use hallshuffle::scalar::Scalar;
use hallshuffle::{Error, ScalarMode};
use proptest::prelude::*;

const SYM: ScalarMode = ScalarMode::Symbolic;

fn p(s: &str, m: ScalarMode) -> Scalar {
    Scalar::parse(s, m).unwrap()
}

#[test]
fn v_squared_is_q() {
    let v = Scalar::v(SYM);
    assert_eq!((&v * &v).to_string(), "v^2");
    let v2 = Scalar::v(ScalarMode::Numeric(2));
    assert_eq!(&v2 * &v2, Scalar::from_int(2));
}

#[test]
fn quadratic_inverse() {
    let m = ScalarMode::Numeric(2);
    let x = p("1+v", m).try_inv().unwrap();
    let (a, b) = x.quad_parts().unwrap();
    assert_eq!((a.to_string(), b.to_string()), ("-1".into(), "1".into()));
    assert_eq!(x.to_string(), "v-1");
}

#[test]
fn eval_examples() {
    assert_eq!(p("(v^2-1)/(v-1)", SYM).eval(9).unwrap(), Scalar::from_int(4));
    assert_eq!(p("v", SYM).eval(4).unwrap(), Scalar::from_int(2));
    assert!(matches!(p("1/(v^2-4)", SYM).eval(4), Err(Error::Domain(_))));
    assert_eq!(p("v^3-v", SYM).eval(4).unwrap(), Scalar::from_int(6));
    assert_eq!(p("v^3-v", ScalarMode::Numeric(4)), Scalar::from_int(6));
}

#[test]
fn canonical_printing() {
    for s in ["3*v^2-1/2", "-v", "7", "v-1", "v^-1", "1/2*v"] {
        assert_eq!(p(s, SYM).to_string(), s);
    }
    assert_eq!(p("(v^2-1)/(v-1)", SYM).to_string(), "v+1");
    assert_eq!(p("1/(v+1)", SYM).to_string(), "(1)/(v+1)");
    assert_eq!(p("v/(2*v^2-2)", SYM).to_string(), "(v)/(2*v^2-2)");
}

#[test]
fn mode_mismatch() {
    let a = Scalar::v(ScalarMode::Numeric(2));
    let b = Scalar::v(ScalarMode::Numeric(3));
    assert_eq!(a.try_add(&b), Err(Error::ModeMismatch));
    assert_eq!(a.try_mul(&Scalar::v(SYM)), Err(Error::ModeMismatch));
    assert_eq!(Scalar::one().try_div(&Scalar::zero()), Err(Error::DivisionByZero));
}

#[test]
fn square_q_stays_rational() {
    let m = ScalarMode::Numeric(9);
    let x = p("(v+1)^3/(v-2)", m);
    assert!(x.as_rational().is_some());
    assert_eq!(x, Scalar::from_int(64));
}

#[test]
fn parse_errors() {
    assert!(matches!(Scalar::parse("v+", SYM), Err(Error::Parse { .. })));
    assert!(matches!(Scalar::parse("w", SYM), Err(Error::Parse { .. })));
}

fn sym_strategy() -> impl Strategy<Value = Scalar> {
    (prop::collection::vec(-3i64..=3, 1..4), prop::collection::vec(-3i64..=3, 1..3), -2i64..=2).prop_map(|(n, d, s)| {
        let v = Scalar::v(SYM);
        let poly = |c: &[i64]| c.iter().rev().fold(Scalar::zero(), |acc, &x| &(&acc * &v) + &Scalar::from_int(x));
        let den = poly(&d);
        let den = if den.is_zero() { Scalar::one() } else { den };
        &(&poly(&n) / &den) * &v.pow(s).unwrap()
    })
}

fn quad_strategy() -> impl Strategy<Value = Scalar> {
    (-5i64..=5, 1i64..=3, -5i64..=5, 1i64..=3).prop_map(|(a, b, c, d)| {
        &Scalar::ratio(a, b) + &(&Scalar::ratio(c, d) * &Scalar::v(ScalarMode::Numeric(2)))
    })
}

proptest! {
    #[test]
    fn symbolic_field_axioms(x in sym_strategy(), y in sym_strategy(), z in sym_strategy()) {
        prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&x * &y, &y * &x);
        if !x.is_zero() {
            prop_assert!((&x / &x).is_one());
        }
        prop_assert!((&x - &x).is_zero());
    }

    #[test]
    fn quadratic_field_axioms(x in quad_strategy(), y in quad_strategy(), z in quad_strategy()) {
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        if !x.is_zero() {
            prop_assert!((&x * &x.try_inv().unwrap()).is_one());
        }
    }

    #[test]
    fn print_parse_round_trip(x in sym_strategy()) {
        prop_assert_eq!(Scalar::parse(&x.to_string(), SYM).unwrap(), x);
    }

    #[test]
    fn eval_commutes_with_arith(x in sym_strategy(), y in sym_strategy(), q in prop::sample::select(vec![4u64, 9, 2])) {
        if let (Ok(a), Ok(b), Ok(s), Ok(m)) = (x.eval(q), y.eval(q), (&x + &y).eval(q), (&x * &y).eval(q)) {
            prop_assert_eq!(s, &a + &b);
            prop_assert_eq!(m, &a * &b);
        }
    }
}
